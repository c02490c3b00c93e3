#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ycbench/model.hpp"
#include "ycbench/runlog.hpp"

namespace ycbench {

enum class FailureCause { adversarial, incapable_assignment, overcommitment, other };
std::string_view to_string(FailureCause c);

struct FailureHistogram {
  int adversarial{0};
  int incapable_assignment{0};
  int overcommitment{0};
  int other{0};

  int total() const { return adversarial + incapable_assignment + overcommitment + other; }
  void add(FailureCause c);
  friend bool operator==(const FailureHistogram&, const FailureHistogram&) = default;
};

struct TrajectoryPoint {
  std::string at;
  std::int64_t funds_cents{0};
  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct RunStats {
  std::string label;
  std::uint64_t seed{0};
  std::string outcome;
  std::int64_t final_funds_cents{0};
  /// Funds right after each payroll.
  std::vector<TrajectoryPoint> trajectory;
  bool bankrupt{false};
  int turns{0};
  int tasks_accepted{0};
  int tasks_completed{0};
  int tasks_failed{0};
  int tasks_cancelled{0};
  /// Needs the privileged snapshot; empty otherwise.
  std::optional<double> adversarial_acceptance_ratio;
  std::optional<double> trust_gated_completion_ratio;
  std::map<std::string, double> final_trust;
  FailureHistogram failures;
  bool adversarial_attributed{false};
  double scratchpad_writes_per_100_turns{0};
  std::optional<double> inspect_accept_ratio;
  double avg_concurrent_tasks{0};
  double commands_per_turn{0};
  std::optional<double> cost_usd;
  std::optional<double> revenue_per_cost_dollar;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  /// Log was truncated or has no end record.
  bool partial{false};

  nlohmann::json to_json() const;
};

/// Failure cause of one "failed" task record. `adversarial` comes from the
/// privileged snapshot (false when unknown).
FailureCause classify_failure(const nlohmann::json& failed_task_record, bool adversarial,
                              const BusinessHours& hours);

/// Recomputes every statistic from the run log. `snapshot` (privileged) adds
/// adversarial attribution; `report` supplies agent telemetry.
RunStats compute_stats(const RunLog& log, const WorldState* snapshot = nullptr,
                       const nlohmann::json* report = nullptr);

struct RunArtifacts {
  RunLog log;
  std::optional<WorldState> snapshot;
  std::optional<nlohmann::json> report;
};
/// Loads runlog.jsonl plus snapshot.json and report.json when present.
/// `path` may be the log file or its directory.
RunArtifacts load_run(const std::filesystem::path& path);

struct Summary {
  double mean{0};
  double stddev{0};  // population
  double min{0};
  double max{0};
  int n{0};
};
Summary summarize(const std::vector<double>& values);

/// Groups runs by label and writes one CSV per table plus summary.json.
/// Throws std::invalid_argument on an empty input.
void aggregate(const std::vector<RunStats>& runs, const std::filesystem::path& out_dir);

}  // namespace ycbench
