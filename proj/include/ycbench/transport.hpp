#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <sys/types.h>

namespace ycbench {

class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bidirectional newline-delimited message channel to an agent.
class LineChannel {
public:
  virtual ~LineChannel() = default;
  /// Sends one message; `line` must not contain a newline.
  virtual void send(const std::string& line) = 0;
  /// Next message, or nullopt on timeout. Throws TransportError on EOF.
  virtual std::optional<std::string> receive(std::chrono::milliseconds timeout) = 0;
};

/// Line channel over a pair of file descriptors.
class FdChannel : public LineChannel {
public:
  FdChannel(int read_fd, int write_fd);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void send(const std::string& line) override;
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override;

protected:
  void close_fds();

private:
  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

/// Agent launched as `sh -c command`; envelopes on its stdin, replies on its stdout.
class ChildProcessChannel : public FdChannel {
public:
  static std::unique_ptr<ChildProcessChannel> spawn(const std::string& command);
  ~ChildProcessChannel() override;

private:
  ChildProcessChannel(int read_fd, int write_fd, pid_t pid);
  pid_t pid_;
};

/// Listens on a unix socket and serves the first agent that connects.
class UnixSocketChannel : public FdChannel {
public:
  static std::unique_ptr<UnixSocketChannel> listen(const std::filesystem::path& path,
                                                   std::chrono::milliseconds accept_timeout);
  ~UnixSocketChannel() override;

private:
  UnixSocketChannel(int fd, std::filesystem::path path);
  std::filesystem::path path_;
};

/// Client side: connects to a listening harness.
std::unique_ptr<FdChannel> connect_unix_socket(const std::filesystem::path& path);

}  // namespace ycbench
