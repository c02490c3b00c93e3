#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ycbench/episode.hpp"

namespace ycbench {

inline constexpr std::string_view kSessionSchema = "yc-bench/session/v1";

class SessionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File layout of a session directory.
struct SessionPaths {
  std::filesystem::path dir;

  std::filesystem::path snapshot() const { return dir / "snapshot.json"; }
  std::filesystem::path run_log() const { return dir / "runlog.jsonl"; }
  std::filesystem::path scratchpad() const { return dir / "scratchpad.txt"; }
  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path lock() const { return dir / "lock"; }
};

/// `--session` wins over YC_SESSION_DIR; falls back to ./.yc-bench-session.
std::filesystem::path resolve_session_dir(const std::optional<std::string>& flag);

/// Exclusive advisory lock (flock) held for the object's lifetime.
class FileLock {
public:
  explicit FileLock(const std::filesystem::path& path);
  FileLock(FileLock&& other) noexcept;
  FileLock& operator=(FileLock&&) = delete;
  FileLock(const FileLock&) = delete;
  ~FileLock();

private:
  int fd_{-1};
};

/// Writes to a temp file in the same directory, fsyncs and renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Metadata stored in the snapshot header: the commit point of the session.
nlohmann::json session_meta(const Episode& ep, std::string_view session_id);

class Session {
public:
  /// Creates the session on first use, otherwise loads it (seed/config are then ignored).
  static Session open_or_create(const std::filesystem::path& dir, std::uint64_t seed, const BenchConfig& cfg);
  /// Loads an existing session; throws SessionError when absent or corrupt.
  static Session open(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);
  /// Rebuilds snapshot and scratchpad from the run log (recovery after corruption).
  static Session rebuild(const std::filesystem::path& dir);

  const std::string& id() const { return id_; }
  const SessionPaths& paths() const { return paths_; }
  Episode& episode() { return episode_; }
  const WorldState& state() const { return episode_.state(); }
  const std::string& scratchpad() const { return episode_.scratchpad(); }
  int turn_counter() const { return episode_.turn(); }
  int idle_turn_counter() const { return episode_.idle_turns(); }

  /// Executes one command line, logs it and commits the snapshot.
  CommandResult run(std::string_view line, std::string_view origin = "agent");
  CommandResult scratchpad_write(std::string_view content);
  CommandResult scratchpad_append(std::string_view content);
  /// Closes the current turn (forcing a resume if due) and opens the next one.
  nlohmann::json next_turn();
  void commit();

private:
  Session(SessionPaths paths, FileLock lock, Episode episode);

  SessionPaths paths_;
  std::string id_;
  FileLock lock_;
  Episode episode_;
};

}  // namespace ycbench
