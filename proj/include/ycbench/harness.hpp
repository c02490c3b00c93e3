#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ycbench/commands.hpp"
#include "ycbench/model.hpp"
#include "ycbench/transport.hpp"

namespace ycbench {

inline constexpr std::string_view kWireSchema = "yc-bench/wire/v1";
inline constexpr std::string_view kReportSchema = "yc-bench/report/v1";

/// One past turn as the agent saw it: the commands it sent and their answers.
struct TurnRecord {
  int turn{0};
  std::vector<std::string> commands;
  std::vector<CommandResult> results;

  nlohmann::json to_json() const;
  static TurnRecord from_json(const nlohmann::json& j);
};

/// Everything the agent receives at the start of a turn.
struct TurnEnvelope {
  int turn{0};
  std::string system_prompt;
  std::vector<TurnRecord> history;
  nlohmann::json status;

  nlohmann::json to_json() const;
  static TurnEnvelope from_json(const nlohmann::json& j);
};

/// Agent-supplied usage figures; absent values stay null.
struct Telemetry {
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  std::optional<double> cost_usd;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
  static Telemetry from_json(const nlohmann::json& j);
};

struct AgentReply {
  std::vector<std::string> commands;
  Telemetry telemetry;
};

/// Lets an in-process agent execute commands before returning its batch.
class TurnContext {
public:
  virtual ~TurnContext() = default;
  virtual CommandResult run(std::string_view line) = 0;
};

class Agent {
public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual AgentReply act(const TurnEnvelope& envelope, TurnContext& ctx) = 0;
  virtual void episode_end(const nlohmann::json& summary) { (void)summary; }
};

/// Highest-reward accessible task of a `market browse` payload.
std::optional<std::string> greedy_pick(const nlohmann::json& browse_payload);
/// Commands that follow the browse: accept, assign all, dispatch, resume (or just resume).
std::vector<std::string> greedy_commands(const nlohmann::json& browse_payload, int roster_size);

class GreedyBaselineAgent : public Agent {
public:
  explicit GreedyBaselineAgent(int roster_size) : roster_size_(roster_size) {}
  std::string name() const override { return "greedy"; }
  AgentReply act(const TurnEnvelope& envelope, TurnContext& ctx) override;

private:
  int roster_size_;
};

/// Never sends a command.
class SilentAgent : public Agent {
public:
  std::string name() const override { return "silent"; }
  AgentReply act(const TurnEnvelope&, TurnContext&) override { return {}; }
};

/// Sends pre-recorded batches, one per turn, then nothing.
class ScriptedAgent : public Agent {
public:
  explicit ScriptedAgent(std::vector<std::vector<std::string>> batches) : batches_(std::move(batches)) {}
  std::string name() const override { return "scripted"; }
  AgentReply act(const TurnEnvelope& envelope, TurnContext& ctx) override;

private:
  std::vector<std::vector<std::string>> batches_;
  std::size_t next_{0};
};

/// Speaks the wire protocol over a line channel (child process or socket).
class WireAgent : public Agent {
public:
  WireAgent(std::unique_ptr<LineChannel> channel, std::string name, std::chrono::milliseconds timeout);
  std::string name() const override { return name_; }
  AgentReply act(const TurnEnvelope& envelope, TurnContext& ctx) override;
  void episode_end(const nlohmann::json& summary) override;

private:
  std::unique_ptr<LineChannel> channel_;
  std::string name_;
  std::chrono::milliseconds timeout_;
};

nlohmann::json wire_turn_message(const TurnEnvelope& envelope);
nlohmann::json wire_end_message(const nlohmann::json& summary);
/// Parses an inbound reply. Throws std::invalid_argument when malformed.
AgentReply parse_wire_reply(const nlohmann::json& j, int expected_turn);

/// Keeps the most recent `k` turns.
std::vector<TurnRecord> truncate_history(const std::vector<TurnRecord>& history, int k);

/// Shipped prompt template (placeholders unresolved).
std::string load_system_prompt_template();
/// Fills in the template; the scratchpad is inserted exactly once.
std::string render_system_prompt(const std::string& tmpl, const std::string& scratchpad, const BenchConfig& cfg,
                                 int context_window);

struct TurnTelemetry {
  int turn{0};
  int commands_issued{0};
  int commands_executed{0};
  int commands_dropped{0};
  bool forced_resume{false};
  Telemetry agent;

  nlohmann::json to_json() const;
};

struct EpisodeReport {
  std::uint64_t seed{0};
  std::string agent;
  Outcome outcome{Outcome::running};
  Money final_funds;
  int turns{0};
  std::string snapshot_sha256;
  std::optional<std::string> transport_error;
  std::vector<TurnTelemetry> telemetry;
  /// Executed command lines per turn, plus the forced resume flag; enough to replay.
  nlohmann::json transcript = nlohmann::json::array();

  nlohmann::json to_json() const;
};

struct RunOptions {
  std::optional<int> context_window;  // defaults to the config value
  std::optional<std::filesystem::path> out_dir;
  std::string label{"run"};
  /// Safety stop for tests; the benchmark itself has no turn cap.
  std::optional<int> max_turns;
};

/// Runs one full episode. With `out_dir`, writes runlog.jsonl, report.json,
/// snapshot.json, scratchpad.txt and timing.jsonl there.
EpisodeReport run_episode(std::uint64_t seed, const BenchConfig& cfg, Agent& agent, const RunOptions& options = {});

/// Re-executes a report transcript on a fresh world.
WorldState replay_transcript(std::uint64_t seed, const BenchConfig& cfg, const nlohmann::json& transcript);

struct ConformanceCheck {
  std::string name;
  bool passed{false};
  std::string detail;
};

/// Drives an agent over the wire through a short scripted episode and checks
/// its replies against the protocol.
std::vector<ConformanceCheck> run_conformance(LineChannel& channel, std::chrono::milliseconds timeout, int turns = 6);

}  // namespace ycbench
