#include "ycbench/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ycbench/commands.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"

namespace ycbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(FailureCause c) {
  switch (c) {
    case FailureCause::adversarial: return "adversarial";
    case FailureCause::incapable_assignment: return "incapable_assignment";
    case FailureCause::overcommitment: return "overcommitment";
    case FailureCause::other: return "other";
  }
  return "other";
}

void FailureHistogram::add(FailureCause c) {
  switch (c) {
    case FailureCause::adversarial: ++adversarial; break;
    case FailureCause::incapable_assignment: ++incapable_assignment; break;
    case FailureCause::overcommitment: ++overcommitment; break;
    case FailureCause::other: ++other; break;
  }
}

namespace {

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

/// Can the assignees, each at rate/split, finish every domain within `hours`?
bool feasible(const json& task, double hours, int split) {
  for (const auto& [domain, work] : task.at("effective_work").items()) {
    double rate = 0;
    for (const auto& a : task.at("assignees")) rate += a.at("rates").value(domain, 0.0) / split;
    if (rate * hours + 1e-6 < work.get<double>()) return false;
  }
  return true;
}

}  // namespace

FailureCause classify_failure(const json& rec, bool adversarial, const BusinessHours& hours) {
  if (adversarial) return FailureCause::adversarial;
  if (rec.at("accepted_at").is_null() || rec.at("deadline").is_null()) return FailureCause::other;
  const SimTime from = parse_time(rec.at("accepted_at").get<std::string>());
  const SimTime to = parse_time(rec.at("deadline").get<std::string>());
  const double budget = static_cast<double>(business_minutes(from, to, hours)) / 60.0;
  if (!feasible(rec, budget, 1)) return FailureCause::incapable_assignment;
  const int split = std::max(1, rec.value("max_split", 1));
  if (split > 1 && !feasible(rec, budget, split)) return FailureCause::overcommitment;
  return FailureCause::other;
}

json RunStats::to_json() const {
  json traj = json::array();
  for (const auto& p : trajectory) traj.push_back(json{{"at", p.at}, {"funds_cents", p.funds_cents}});
  return json{{"label", label},
              {"seed", seed},
              {"outcome", outcome},
              {"final_funds_cents", final_funds_cents},
              {"trajectory", traj},
              {"bankrupt", bankrupt},
              {"turns", turns},
              {"tasks_accepted", tasks_accepted},
              {"tasks_completed", tasks_completed},
              {"tasks_failed", tasks_failed},
              {"tasks_cancelled", tasks_cancelled},
              {"adversarial_acceptance_ratio", opt_json(adversarial_acceptance_ratio)},
              {"trust_gated_completion_ratio", opt_json(trust_gated_completion_ratio)},
              {"final_trust", final_trust},
              {"failures",
               json{{"adversarial", failures.adversarial},
                    {"incapable_assignment", failures.incapable_assignment},
                    {"overcommitment", failures.overcommitment},
                    {"other", failures.other}}},
              {"adversarial_attributed", adversarial_attributed},
              {"scratchpad_writes_per_100_turns", scratchpad_writes_per_100_turns},
              {"inspect_accept_ratio", opt_json(inspect_accept_ratio)},
              {"avg_concurrent_tasks", avg_concurrent_tasks},
              {"commands_per_turn", commands_per_turn},
              {"cost_usd", opt_json(cost_usd)},
              {"revenue_per_cost_dollar", opt_json(revenue_per_cost_dollar)},
              {"input_tokens", opt_json(input_tokens)},
              {"output_tokens", opt_json(output_tokens)},
              {"partial", partial}};
}

RunStats compute_stats(const RunLog& log, const WorldState* snapshot, const json* report) {
  const json& header = log.header();
  const BenchConfig cfg = config_from_json(header.at("config"));
  RunStats s;
  s.label = header.value("label", "");
  s.seed = header.at("seed").get<std::uint64_t>();
  s.partial = log.truncated || !log.complete;
  s.final_funds_cents = cfg.initial_funds.cents();

  std::set<std::string> adversarial_clients;
  if (snapshot != nullptr) {
    s.adversarial_attributed = true;
    for (const auto& c : snapshot->clients)
      if (c.adversarial) adversarial_clients.insert(c.id);
  }

  int accepted_adversarial = 0;
  int completed_gated = 0;
  int pad_writes = 0;
  int inspects = 0;
  int accept_cmds = 0;
  int agent_commands = 0;
  double active_sum = 0;

  for (const auto& rec : log.records) {
    const std::string type = rec.value("type", "");
    if (type == "turn") {
      s.turns = rec.at("turn").get<int>();
      active_sum += rec.at("status").value("active_tasks", 0);
    } else if (type == "command") {
      if (rec.value("origin", "agent") == "auto") continue;
      ++agent_commands;
      Verb verb;
      try {
        verb = parse_command(rec.at("line").get<std::string>()).verb;
      } catch (const ParseError&) {
        continue;
      }
      if (verb == Verb::task_inspect) ++inspects;
      if (verb == Verb::task_accept) ++accept_cmds;
      if ((verb == Verb::scratchpad_write || verb == Verb::scratchpad_append) && rec.at("ok").get<bool>()) ++pad_writes;
    } else if (type == "task") {
      const std::string action = rec.at("action").get<std::string>();
      const std::string client = rec.at("client_id").get<std::string>();
      if (action == "accepted") {
        ++s.tasks_accepted;
        if (adversarial_clients.count(client)) ++accepted_adversarial;
      } else if (action == "completed") {
        ++s.tasks_completed;
        if (rec.at("required_trust").get<int>() > 0) ++completed_gated;
      } else if (action == "failed") {
        ++s.tasks_failed;
        s.failures.add(classify_failure(rec, adversarial_clients.count(client) > 0, cfg.business_hours));
      } else if (action == "cancelled") {
        ++s.tasks_cancelled;
      }
    } else if (type == "ledger") {
      s.final_funds_cents = rec.at("funds_cents").get<std::int64_t>();
      if (rec.at("kind") == "payroll")
        s.trajectory.push_back(TrajectoryPoint{rec.at("at").get<std::string>(), s.final_funds_cents});
    } else if (type == "end") {
      s.outcome = rec.at("outcome").get<std::string>();
      s.final_funds_cents = rec.at("final_funds_cents").get<std::int64_t>();
      s.final_trust = rec.at("client_trust").get<std::map<std::string, double>>();
      s.turns = rec.at("turns").get<int>();
    }
  }
  if (s.outcome.empty()) s.outcome = "running";
  s.bankrupt = s.outcome == "bankrupt";
  if (snapshot != nullptr && s.tasks_accepted > 0)
    s.adversarial_acceptance_ratio = static_cast<double>(accepted_adversarial) / s.tasks_accepted;
  if (s.tasks_completed > 0) s.trust_gated_completion_ratio = static_cast<double>(completed_gated) / s.tasks_completed;
  if (s.turns > 0) {
    s.scratchpad_writes_per_100_turns = 100.0 * pad_writes / s.turns;
    s.avg_concurrent_tasks = active_sum / s.turns;
    s.commands_per_turn = static_cast<double>(agent_commands) / s.turns;
  }
  if (accept_cmds > 0) s.inspect_accept_ratio = static_cast<double>(inspects) / accept_cmds;

  if (report != nullptr) {
    auto pick_double = [&](const char* key) -> std::optional<double> {
      if (!report->contains(key) || report->at(key).is_null()) return std::nullopt;
      return report->at(key).get<double>();
    };
    s.cost_usd = pick_double("total_cost_usd");
    if (auto v = pick_double("total_input_tokens")) s.input_tokens = static_cast<std::int64_t>(*v);
    if (auto v = pick_double("total_output_tokens")) s.output_tokens = static_cast<std::int64_t>(*v);
    if (s.cost_usd && *s.cost_usd > 0) s.revenue_per_cost_dollar = (s.final_funds_cents / 100.0) / *s.cost_usd;
  }
  return s;
}

RunArtifacts load_run(const fs::path& path) {
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  const fs::path log_path = fs::is_directory(path) ? dir / "runlog.jsonl" : path;
  RunArtifacts a{read_run_log(log_path), std::nullopt, std::nullopt};
  if (fs::exists(dir / "snapshot.json")) a.snapshot = parse_snapshot_file(read_file(dir / "snapshot.json"));
  if (fs::exists(dir / "report.json")) a.report = json::parse(read_file(dir / "report.json"));
  return a;
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty group");
  Summary s;
  s.n = static_cast<int>(values.size());
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / s.n);
  return s;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvFile {
public:
  CsvFile(const fs::path& path, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_escape(cells[i]);
    out_ << "\n";
  }

private:
  std::ofstream out_;
};

std::vector<double> collect(const std::vector<const RunStats*>& runs, double (*get)(const RunStats&)) {
  std::vector<double> v;
  for (const auto* r : runs) v.push_back(get(*r));
  return v;
}

std::vector<double> collect_opt(const std::vector<const RunStats*>& runs,
                                std::optional<double> (*get)(const RunStats&)) {
  std::vector<double> v;
  for (const auto* r : runs)
    if (auto x = get(*r)) v.push_back(*x);
  return v;
}

json summary_json(const Summary& s) {
  return json{{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}, {"n", s.n}};
}

}  // namespace

void aggregate(const std::vector<RunStats>& runs, const fs::path& out_dir) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  fs::create_directories(out_dir);
  std::map<std::string, std::vector<const RunStats*>> groups;
  for (const auto& r : runs) groups[r.label].push_back(&r);

  struct Row {
    std::string label;
    Summary funds;
    int bankrupt;
  };
  std::vector<Row> board;
  for (const auto& [label, members] : groups) {
    int bankrupt = 0;
    for (const auto* r : members) bankrupt += r->bankrupt ? 1 : 0;
    board.push_back(Row{label, summarize(collect(members, [](const RunStats& r) { return r.final_funds_cents / 100.0; })),
                        bankrupt});
  }
  std::stable_sort(board.begin(), board.end(), [](const Row& a, const Row& b) { return a.funds.mean > b.funds.mean; });

  {
    CsvFile f(out_dir / "leaderboard.csv",
              {"rank", "label", "runs", "mean_final_funds", "stddev_final_funds", "min_final_funds", "max_final_funds",
               "bankrupt"});
    int rank = 0;
    for (const auto& row : board)
      f.row({std::to_string(++rank), row.label, std::to_string(row.funds.n), fmt(row.funds.mean), fmt(row.funds.stddev),
             fmt(row.funds.min), fmt(row.funds.max), std::to_string(row.bankrupt) + "/" + std::to_string(row.funds.n)});
  }
  {
    CsvFile f(out_dir / "trajectory.csv", {"label", "seed", "month_index", "at", "funds"});
    for (const auto& r : runs)
      for (std::size_t i = 0; i < r.trajectory.size(); ++i)
        f.row({r.label, std::to_string(r.seed), std::to_string(i + 1), r.trajectory[i].at,
               fmt(r.trajectory[i].funds_cents / 100.0)});
  }
  {
    CsvFile f(out_dir / "trust.csv", {"label", "seed", "client_id", "final_trust", "trust_gated_completion_ratio"});
    for (const auto& r : runs)
      for (const auto& [client, trust] : r.final_trust)
        f.row({r.label, std::to_string(r.seed), client, fmt(trust), fmt(r.trust_gated_completion_ratio)});
  }
  {
    CsvFile f(out_dir / "adversarial.csv", {"label", "seed", "tasks_accepted", "adversarial_acceptance_ratio"});
    for (const auto& r : runs)
      f.row({r.label, std::to_string(r.seed), std::to_string(r.tasks_accepted), fmt(r.adversarial_acceptance_ratio)});
  }
  {
    CsvFile f(out_dir / "failures.csv",
              {"label", "seed", "failed", "adversarial", "incapable_assignment", "overcommitment", "other",
               "adversarial_attributed"});
    for (const auto& r : runs)
      f.row({r.label, std::to_string(r.seed), std::to_string(r.failures.total()), std::to_string(r.failures.adversarial),
             std::to_string(r.failures.incapable_assignment), std::to_string(r.failures.overcommitment),
             std::to_string(r.failures.other), r.adversarial_attributed ? "true" : "false"});
  }
  {
    CsvFile f(out_dir / "behavior.csv",
              {"label", "seed", "turns", "scratchpad_writes_per_100_turns", "inspect_accept_ratio",
               "avg_concurrent_tasks", "commands_per_turn", "cost_usd", "revenue_per_cost_dollar"});
    for (const auto& r : runs)
      f.row({r.label, std::to_string(r.seed), std::to_string(r.turns), fmt(r.scratchpad_writes_per_100_turns),
             fmt(r.inspect_accept_ratio), fmt(r.avg_concurrent_tasks), fmt(r.commands_per_turn), fmt(r.cost_usd),
             fmt(r.revenue_per_cost_dollar)});
  }

  json summary = json::object();
  summary["leaderboard"] = json::array();
  for (const auto& row : board) {
    const auto& members = groups.at(row.label);
    json g{{"label", row.label},
           {"final_funds", summary_json(row.funds)},
           {"bankrupt", std::to_string(row.bankrupt) + "/" + std::to_string(row.funds.n)}};
    auto add = [&](const char* key, const std::vector<double>& v) {
      g[key] = v.empty() ? json(nullptr) : summary_json(summarize(v));
    };
    add("scratchpad_writes_per_100_turns",
        collect(members, [](const RunStats& r) { return r.scratchpad_writes_per_100_turns; }));
    add("inspect_accept_ratio", collect_opt(members, [](const RunStats& r) { return r.inspect_accept_ratio; }));
    add("avg_concurrent_tasks", collect(members, [](const RunStats& r) { return r.avg_concurrent_tasks; }));
    add("commands_per_turn", collect(members, [](const RunStats& r) { return r.commands_per_turn; }));
    add("adversarial_acceptance_ratio",
        collect_opt(members, [](const RunStats& r) { return r.adversarial_acceptance_ratio; }));
    add("trust_gated_completion_ratio",
        collect_opt(members, [](const RunStats& r) { return r.trust_gated_completion_ratio; }));
    add("turns", collect(members, [](const RunStats& r) { return static_cast<double>(r.turns); }));
    add("cost_usd", collect_opt(members, [](const RunStats& r) { return r.cost_usd; }));
    summary["leaderboard"].push_back(std::move(g));
  }
  summary["runs"] = json::array();
  for (const auto& r : runs) summary["runs"].push_back(r.to_json());
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
}

}  // namespace ycbench
