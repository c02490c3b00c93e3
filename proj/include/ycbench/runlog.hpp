#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ycbench/commands.hpp"
#include "ycbench/model.hpp"

namespace ycbench {

inline constexpr std::string_view kRunLogSchema = "yc-bench/runlog/v1";

/// Append-only JSON-lines writer. Every record gets the next sequence number.
class RunLogWriter {
public:
  /// Opens `path` for appending; `next_seq` continues an existing log.
  explicit RunLogWriter(const std::filesystem::path& path, std::int64_t next_seq = 1);

  std::int64_t append(nlohmann::json record);
  std::int64_t last_seq() const { return next_seq_ - 1; }
  void flush();

private:
  std::ofstream out_;
  std::int64_t next_seq_;
};

struct RunLog {
  std::vector<nlohmann::json> records;
  /// Last line unparsable or the sequence has a gap.
  bool truncated{false};
  /// No end record.
  bool complete{false};

  const nlohmann::json& header() const;
};

RunLog read_run_log(const std::filesystem::path& path);
RunLog parse_run_log(std::string_view text);

nlohmann::json header_record(std::uint64_t seed, const BenchConfig& cfg, std::string_view label);
nlohmann::json end_record(const WorldState& state, int turns);
nlohmann::json turn_record(int turn, const StatusObservation& status);
/// Full observable lifecycle record of a task (no hidden client fields).
nlohmann::json task_record(const WorldState& state, const TaskRecord& task, std::string_view action);

/// Executes one command line and appends the command record followed by the
/// task, digest and ledger records it produced.
CommandResult execute_logged(WorldState& state, std::string& scratchpad, std::string_view line, RunLogWriter& log,
                             int turn, std::string_view origin);

struct ReplayResult {
  WorldState state;
  std::string scratchpad;
  int turns{0};
  int idle_turns{0};  // turns since the last successful resume
  /// Commands whose ok/error outcome differed from the recorded one.
  std::vector<std::int64_t> divergent_seqs;
};

/// Rebuilds the world from the header and re-executes every command and turn
/// boundary in order.
ReplayResult replay(const RunLog& log);

}  // namespace ycbench
