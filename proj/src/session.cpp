#include "ycbench/session.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ycbench/commands.hpp"
#include "ycbench/snapshot.hpp"

namespace ycbench {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_session_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("YC_SESSION_DIR"); env && *env) return env;
  return ".yc-bench-session";
}

FileLock::FileLock(const fs::path& path) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw SessionError("cannot open lock file " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX) != 0) {
    const int err = errno;
    ::close(fd_);
    throw SessionError("cannot lock " + path.string() + ": " + std::strerror(err));
  }
}

FileLock::FileLock(FileLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void atomic_write(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw SessionError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw SessionError("write failed for " + tmp.string() + ": " + std::strerror(err));
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SessionError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json session_meta(const Episode& ep, std::string_view session_id) {
  return json{{"schema", kSessionSchema},
              {"session_id", session_id},
              {"log_seq", ep.log_seq()},
              {"turn_counter", ep.turn()},
              {"idle_turn_counter", ep.idle_turns()},
              {"resumed_this_turn", ep.resumed_this_turn()},
              {"finished", ep.finished()},
              {"scratchpad", ep.scratchpad()}};
}

namespace {

/// Drops log records past the committed sequence number (a crash between the
/// log append and the snapshot rename leaves such a tail).
std::int64_t truncate_log(const fs::path& path, std::int64_t log_seq) {
  const std::string text = read_file(path);
  std::string kept;
  std::int64_t last = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    const bool complete = end != std::string::npos;
    if (!complete) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty() || !complete) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.contains("seq")) break;
    const auto seq = rec.at("seq").get<std::int64_t>();
    if (seq > log_seq) break;
    if (seq != last + 1) break;
    last = seq;
    kept.append(line);
    kept.push_back('\n');
  }
  if (last != log_seq)
    throw SessionError("run log " + path.string() + " ends at seq " + std::to_string(last) +
                       " but the snapshot was committed at seq " + std::to_string(log_seq));
  if (kept.size() != text.size()) atomic_write(path, kept);
  return last;
}

std::string recovery_hint(const SessionPaths& p) {
  return "; the run log is authoritative: run `yc-bench session rebuild --session " + p.dir.string() +
         "` to rebuild the snapshot, or delete the directory to start over";
}

}  // namespace

Session::Session(SessionPaths paths, FileLock lock, Episode episode)
    : paths_(std::move(paths)),
      id_(paths_.dir.filename().string()),
      lock_(std::move(lock)),
      episode_(std::move(episode)) {
  if (id_.empty() || id_ == ".") id_ = fs::absolute(paths_.dir).lexically_normal().parent_path().filename().string();
}

bool Session::exists(const fs::path& dir) { return fs::exists(SessionPaths{dir}.snapshot()); }

namespace {

Episode load_episode(const SessionPaths& paths) {
  json meta;
  WorldState state;
  try {
    state = parse_snapshot_file(read_file(paths.snapshot()), &meta);
  } catch (const SnapshotError& e) {
    throw SessionError(std::string(e.what()) + recovery_hint(paths));
  }
  if (meta.value("schema", "") != kSessionSchema)
    throw SessionError("snapshot " + paths.snapshot().string() + " carries no session metadata" + recovery_hint(paths));
  const auto log_seq = meta.at("log_seq").get<std::int64_t>();
  truncate_log(paths.run_log(), log_seq);
  Episode ep(std::move(state), meta.at("scratchpad").get<std::string>(), paths.run_log(), log_seq + 1,
             meta.at("turn_counter").get<int>(), meta.at("idle_turn_counter").get<int>());
  ep.set_resumed_this_turn(meta.at("resumed_this_turn").get<bool>());
  ep.set_finished(meta.at("finished").get<bool>());
  return ep;
}

}  // namespace

Session Session::open_or_create(const fs::path& dir, std::uint64_t seed, const BenchConfig& cfg) {
  SessionPaths paths{dir};
  fs::create_directories(dir);
  FileLock lock(paths.lock());
  if (fs::exists(paths.snapshot())) return Session(paths, std::move(lock), load_episode(paths));
  // A log without a snapshot is an interrupted create.
  fs::remove(paths.run_log());
  atomic_write(paths.config(), config_to_json(cfg).dump(2) + "\n");
  Session s(paths, std::move(lock), Episode::start(seed, cfg, "session", paths.run_log()));
  s.commit();
  return s;
}

Session Session::open(const fs::path& dir) {
  SessionPaths paths{dir};
  if (!fs::exists(paths.snapshot()))
    throw SessionError("no session at " + dir.string() + "; create one with `yc-bench session create --seed N`");
  FileLock lock(paths.lock());
  return Session(paths, std::move(lock), load_episode(paths));
}

Session Session::rebuild(const fs::path& dir) {
  SessionPaths paths{dir};
  FileLock lock(paths.lock());
  RunLog log = read_run_log(paths.run_log());
  if (log.truncated) {
    // keep the clean prefix
    std::string kept;
    for (const auto& rec : log.records) kept += rec.dump() + "\n";
    atomic_write(paths.run_log(), kept);
  }
  ReplayResult r = replay(log);
  const std::int64_t next = log.records.empty() ? 1 : log.records.back().at("seq").get<std::int64_t>() + 1;
  Episode ep(std::move(r.state), std::move(r.scratchpad), paths.run_log(), next, r.turns, r.idle_turns);
  ep.set_finished(log.complete);
  Session s(paths, std::move(lock), std::move(ep));
  s.commit();
  return s;
}

void Session::commit() {
  episode_.log().flush();
  atomic_write(paths_.snapshot(), snapshot_file_text(episode_.state(), session_meta(episode_, id_)));
  atomic_write(paths_.scratchpad(), episode_.scratchpad());
}

CommandResult Session::run(std::string_view line, std::string_view origin) {
  CommandResult r = episode_.run(line, origin);
  if (episode_.state().terminated()) episode_.finish();
  commit();
  return r;
}

CommandResult Session::scratchpad_write(std::string_view content) {
  Command cmd;
  cmd.verb = Verb::scratchpad_write;
  cmd.content = std::string(content);
  return run(format_command(cmd));
}

CommandResult Session::scratchpad_append(std::string_view content) {
  Command cmd;
  cmd.verb = Verb::scratchpad_append;
  cmd.content = std::string(content);
  return run(format_command(cmd));
}

json Session::next_turn() {
  json out = json::object();
  if (episode_.turn() > 0 && !episode_.state().terminated()) {
    if (auto forced = episode_.end_turn()) out["forced_resume"] = forced->to_json();
  }
  if (episode_.state().terminated()) {
    episode_.finish();
    out["turn"] = episode_.turn();
    out["terminated"] = true;
    out["status"] = peek_status(episode_.state()).to_json();
  } else {
    out["turn"] = episode_.turn() + 1;
    out["terminated"] = false;
    out["status"] = episode_.begin_turn().to_json();
  }
  commit();
  return out;
}

}  // namespace ycbench
