#include "ycbench/episode.hpp"

#include "ycbench/worldgen.hpp"

namespace ycbench {

Episode Episode::start(std::uint64_t seed, const BenchConfig& cfg, std::string_view label,
                       const std::filesystem::path& log_path) {
  Episode ep(generate_world(seed, cfg), "", log_path, 1, 0, 0);
  ep.log_.append(header_record(seed, cfg, label));
  return ep;
}

Episode::Episode(WorldState state, std::string scratchpad, const std::filesystem::path& log_path,
                 std::int64_t next_seq, int turn, int idle_turns)
    : state_(std::move(state)),
      scratchpad_(std::move(scratchpad)),
      log_(log_path, next_seq),
      turn_(turn),
      idle_turns_(idle_turns) {}

StatusObservation Episode::begin_turn() {
  ++turn_;
  resumed_this_turn_ = false;
  StatusObservation status = render_status(state_);
  log_.append(turn_record(turn_, status));
  return status;
}

CommandResult Episode::run(std::string_view line, std::string_view origin) {
  CommandResult r = execute_logged(state_, scratchpad_, line, log_, turn_, origin);
  if (r.ok) {
    try {
      if (parse_command(line).verb == Verb::sim_resume) resumed_this_turn_ = true;
    } catch (const ParseError&) {
    }
  }
  return r;
}

std::optional<CommandResult> Episode::end_turn() {
  std::optional<CommandResult> forced;
  idle_turns_ = resumed_this_turn_ ? 0 : idle_turns_ + 1;
  if (!state_.terminated() && idle_turns_ >= state_.config.auto_advance_turns) {
    forced = run("sim resume", "auto");
    idle_turns_ = 0;
  }
  log_.append(nlohmann::json{{"type", "turn_end"},
                             {"turn", turn_},
                             {"idle_turns", idle_turns_},
                             {"forced_resume", forced.has_value()}});
  log_.flush();
  return forced;
}

void Episode::finish() {
  if (finished_) return;
  finished_ = true;
  log_.append(end_record(state_, turn_));
  log_.flush();
}

}  // namespace ycbench
