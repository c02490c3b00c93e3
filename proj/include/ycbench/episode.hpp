#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ycbench/commands.hpp"
#include "ycbench/model.hpp"
#include "ycbench/runlog.hpp"

namespace ycbench {

/// Owns one running episode: the world, the scratchpad, the run log and the
/// turn bookkeeping (including the forced advance after idle turns).
class Episode {
public:
  /// Generates the world and writes the log header.
  static Episode start(std::uint64_t seed, const BenchConfig& cfg, std::string_view label,
                       const std::filesystem::path& log_path);
  /// Continues an episode from an existing (replayed) state.
  Episode(WorldState state, std::string scratchpad, const std::filesystem::path& log_path, std::int64_t next_seq,
          int turn, int idle_turns);

  WorldState& state() { return state_; }
  const WorldState& state() const { return state_; }
  const std::string& scratchpad() const { return scratchpad_; }
  int turn() const { return turn_; }
  int idle_turns() const { return idle_turns_; }
  bool resumed_this_turn() const { return resumed_this_turn_; }
  RunLogWriter& log() { return log_; }
  std::int64_t log_seq() const { return log_.last_seq(); }
  void set_resumed_this_turn(bool v) { resumed_this_turn_ = v; }
  bool finished() const { return finished_; }
  void set_finished(bool v) { finished_ = v; }

  /// Opens the next turn: renders (and clears) the status observation.
  StatusObservation begin_turn();
  CommandResult run(std::string_view line, std::string_view origin = "agent");
  /// Closes the turn; forces a resume after `auto_advance_turns` turns without one.
  std::optional<CommandResult> end_turn();
  /// Appends the end record (once).
  void finish();

private:
  WorldState state_;
  std::string scratchpad_;
  RunLogWriter log_;
  int turn_{0};
  int idle_turns_{0};
  bool resumed_this_turn_{false};
  bool finished_{false};
};

}  // namespace ycbench
