#include "ycbench/transport.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace ycbench {

namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

void ignore_sigpipe() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

FdChannel::FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) { ignore_sigpipe(); }

FdChannel::~FdChannel() { close_fds(); }

void FdChannel::close_fds() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdChannel::send(const std::string& line) {
  if (line.find('\n') != std::string::npos) throw TransportError("message contains a newline");
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(sys_error("agent channel write failed"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdChannel::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(sys_error("agent channel poll failed"));
    }
    if (rc == 0) return std::nullopt;
    char buf[4096];
    const ssize_t n = ::read(read_fd_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(sys_error("agent channel read failed"));
    }
    if (n == 0) throw TransportError("agent closed the channel");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

ChildProcessChannel::ChildProcessChannel(int read_fd, int write_fd, pid_t pid)
    : FdChannel(read_fd, write_fd), pid_(pid) {}

std::unique_ptr<ChildProcessChannel> ChildProcessChannel::spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError(sys_error("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(sys_error("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(sys_error("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::unique_ptr<ChildProcessChannel>(new ChildProcessChannel(from_child[0], to_child[1], pid));
}

ChildProcessChannel::~ChildProcessChannel() {
  close_fds();
  if (pid_ <= 0) return;
  // give the agent a moment to exit on EOF, then make sure it is gone
  for (int i = 0; i < 50; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    ::usleep(20'000);
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
}

UnixSocketChannel::UnixSocketChannel(int fd, std::filesystem::path path) : FdChannel(fd, fd), path_(std::move(path)) {}

UnixSocketChannel::~UnixSocketChannel() {
  close_fds();
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

namespace {

sockaddr_un socket_address(const std::filesystem::path& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string p = path.string();
  if (p.size() >= sizeof addr.sun_path) throw TransportError("socket path too long: " + p);
  std::memcpy(addr.sun_path, p.c_str(), p.size() + 1);
  return addr;
}

}  // namespace

std::unique_ptr<UnixSocketChannel> UnixSocketChannel::listen(const std::filesystem::path& path,
                                                             std::chrono::milliseconds accept_timeout) {
  const sockaddr_un addr = socket_address(path);
  const int srv = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (srv < 0) throw TransportError(sys_error("socket"));
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (::bind(srv, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(srv, 1) != 0) {
    const std::string msg = sys_error("cannot listen on " + path.string());
    ::close(srv);
    throw TransportError(msg);
  }
  pollfd pfd{srv, POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(accept_timeout.count()));
  if (rc <= 0) {
    ::close(srv);
    std::filesystem::remove(path, ec);
    throw TransportError("no agent connected to " + path.string());
  }
  const int fd = ::accept4(srv, nullptr, nullptr, SOCK_CLOEXEC);
  ::close(srv);
  if (fd < 0) throw TransportError(sys_error("accept"));
  return std::unique_ptr<UnixSocketChannel>(new UnixSocketChannel(fd, path));
}

std::unique_ptr<FdChannel> connect_unix_socket(const std::filesystem::path& path) {
  const sockaddr_un addr = socket_address(path);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(sys_error("socket"));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = sys_error("cannot connect to " + path.string());
    ::close(fd);
    throw TransportError(msg);
  }
  return std::make_unique<FdChannel>(fd, fd);
}

}  // namespace ycbench
