// One PASS/FAIL line per benchmark-level criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "analytics_fixture.hpp"
#include "oracles.hpp"
#include "unit/test_util.hpp"
#include "ycbench/analytics.hpp"
#include "ycbench/engine.hpp"
#include "ycbench/harness.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"

using namespace ycbench;
using nlohmann::json;

namespace {

/// Collects failed expectations for one criterion.
class Check {
public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }
  std::string detail() const {
    std::string out;
    for (const auto& s : ok() ? notes_ : failures_) out += (out.empty() ? "" : "; ") + s;
    return out;
  }

private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  int failed_{0};
};

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

void determinism(Check& c) {
  const BenchConfig cfg;
  testutil::TempDir dir;
  for (std::uint64_t seed : {1, 2, 3}) {
    const std::string tag = "seed " + std::to_string(seed);
    std::string snap[2];
    std::string report[2];
    for (int i = 0; i < 2; ++i) {
      GreedyBaselineAgent agent(cfg.employees);
      RunOptions opt;
      opt.out_dir = dir / (std::to_string(seed) + (i == 0 ? "a" : "b")) / "run";
      const auto t0 = std::chrono::steady_clock::now();
      const EpisodeReport rep = run_episode(seed, cfg, agent, opt);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      c.expect(secs < 10.0, tag + " took " + num(secs) + " s");
      snap[i] = read_file(*opt.out_dir / "snapshot.json");
      report[i] = read_file(*opt.out_dir / "report.json");
      if (i == 0) c.note(tag + ": " + num(secs, 2) + " s, " + std::to_string(rep.turns) + " turns");
    }
    c.expect(!snap[0].empty() && snap[0] == snap[1], tag + ": snapshots differ");
    c.expect(!report[0].empty() && report[0] == report[1], tag + ": reports differ");
  }
}

void config_fidelity(Check& c) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const WorldState w = generate_world(seed, BenchConfig{});
    const std::string s = "seed " + std::to_string(seed) + ": ";
    int tiers[3] = {0, 0, 0};
    for (const auto& e : w.roster) ++tiers[static_cast<int>(e.tier)];
    int adversarial = 0;
    for (const auto& cl : w.clients) adversarial += cl.adversarial;
    c.expect(w.roster.size() == 8, s + "roster size");
    c.expect(tiers[0] == 4 && tiers[1] == 3 && tiers[2] == 1, s + "tier split");
    c.expect(w.clients.size() == 6, s + "client count");
    c.expect(adversarial == 2, s + "adversarial clients");
    c.expect(w.market.size() == 200, s + "market size");
    c.expect(w.funds == Money::from_dollars(200'000), s + "funds");
    for (double p : w.prestige) c.expect(p == 1.0, s + "prestige");
    c.expect(validate(w).empty(), s + "invariants");
  }
  c.note("20 seeds: 8 staff (4/3/1), 6 clients (2 adversarial), 200 tasks, $200K, prestige 1.0");
}

void adversarial_share(Check& c) {
  int total = 0, adversarial = 0;
  for (std::uint64_t seed = 1; total < 10'000; ++seed) {
    const WorldState w = generate_world(seed, BenchConfig{});
    for (const auto& t : w.market) {
      ++total;
      adversarial += w.find_client(t.client_id)->adversarial;
    }
  }
  const double share = static_cast<double>(adversarial) / total;
  c.expect(std::abs(share - 1.0 / 3.0) <= 0.02, "share " + num(share));
  c.note(std::to_string(total) + " tasks, adversarial share " + num(share));
}

void arithmetic(Check& c) {
  using testutil::client;
  using testutil::employee;
  using testutil::market_task;
  {
    WorldState s = testutil::scenario({employee("Emp_1", 1.0)}, {client("Acme")},
                                      {market_task("Task-1", "Acme", Domain::research, 300, 10'000)});
    accept_task(s, "Task-1");
    assign(s, "Task-1", {"Emp_1"});
    dispatch(s, "Task-1");
    while (active_task_count(s) > 0) resume(s);
    Money penalty;
    for (const auto& e : s.ledger)
      if (e.kind == LedgerKind::failure_penalty) penalty += e.amount;
    c.expect(penalty == Money::from_cents(-350'000), "penalty " + penalty.to_string());
  }
  {
    const BenchConfig cfg;
    const TaskRecord t = market_task("T", "A", Domain::inference, 1000, 1);
    c.expect(effective_work_for(t, client("A", 5.0), cfg)[index_of(Domain::inference)] == 500, "max-trust reduction");
    c.expect(effective_work_for(t, client("A", 0.0), cfg)[index_of(Domain::inference)] == 1000, "zero-trust work");
  }
  {
    WorldState s = testutil::scenario({employee("Emp_1", 6.0)}, {client("Acme")},
                                      {market_task("Task-1", "Acme", Domain::research, 600, 1000),
                                       market_task("Task-2", "Acme", Domain::research, 600, 1000),
                                       market_task("Task-3", "Acme", Domain::research, 600, 1000)});
    for (const char* id : {"Task-1", "Task-2", "Task-3"}) {
      accept_task(s, id);
      assign(s, id, {"Emp_1"});
      dispatch(s, id);
    }
    for (const char* id : {"Task-1", "Task-2", "Task-3"})
      c.expect(task_throughput(s, *s.find_book_task(id))[index_of(Domain::research)] == 2.0, "rate/3 split");
  }
  {
    BenchConfig cfg;
    cfg.initial_funds = Money::from_dollars(10'000'000);
    WorldState s = generate_world(1, cfg);
    while (!s.terminated()) resume(s);
    std::vector<std::string> dates;
    for (const auto& e : s.ledger)
      if (e.kind == LedgerKind::payroll) dates.push_back(format_time(e.at));
    const std::vector<std::string> expected{"2025-02-03 09:00", "2025-03-03 09:00", "2025-04-01 09:00",
                                            "2025-05-01 09:00", "2025-06-02 09:00", "2025-07-01 09:00",
                                            "2025-08-01 09:00", "2025-09-01 09:00", "2025-10-01 09:00",
                                            "2025-11-03 09:00", "2025-12-01 09:00", "2026-01-01 09:00"};
    c.expect(dates == expected, "payroll dates");
  }
  c.note("penalty -$3,500.00 on $10,000; 1000 -> 500 units at trust 5; 6/h -> 2/h x3; 12 payrolls on first weekdays");
}

void trap(Check& c) {
  const BenchConfig cfg;
  int adv = 0, adv_infeasible = 0, honest = 0, honest_feasible = 0;
  for (std::uint64_t seed = 1; adv + honest < 1000; ++seed) {
    const WorldState w = generate_world(seed, cfg);
    for (const auto& t : w.market) {
      if (adv + honest >= 1000) break;
      const bool feasible = oracle::feasible_with_full_roster(w, t);
      if (w.find_client(t.client_id)->adversarial) {
        ++adv;
        adv_infeasible += !feasible;
      } else {
        ++honest;
        honest_feasible += feasible;
      }
    }
  }
  const double a = static_cast<double>(adv_infeasible) / adv;
  const double h = static_cast<double>(honest_feasible) / honest;
  c.expect(a >= 0.90, "adversarial infeasible " + num(a));
  c.expect(h >= 0.90, "honest feasible " + num(h));
  c.note(std::to_string(adv) + " adversarial, " + num(100 * a) + "% infeasible; " + std::to_string(honest) +
         " honest, " + num(100 * h) + "% feasible");
}

void brute_force(Check& c) {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const double d = oracle::engine_vs_brute_force(seed);
    c.expect(d <= 1.0, "scenario " + std::to_string(seed) + " differs by " + num(d));
    worst = std::max(worst, d);
  }
  c.note("200 scenarios, worst difference " + num(worst) + " units");
}

void replay_oracle(Check& c) {
  testutil::TempDir dir;
  const BenchConfig cfg;
  int logs = 0;
  auto verify = [&](const std::filesystem::path& run) {
    const RunLog log = read_run_log(run / "runlog.jsonl");
    const ReplayResult r = replay(log);
    const std::string expected = log.records.back().value("snapshot_sha256", "");
    c.expect(log.complete && snapshot_hash(r.state) == expected, run.filename().string() + ": hash mismatch");
    c.expect(r.divergent_seqs.empty(), run.filename().string() + ": divergent commands");
    ++logs;
  };
  for (std::uint64_t seed : {1, 2, 3}) {
    GreedyBaselineAgent greedy(cfg.employees);
    RunOptions opt;
    opt.out_dir = dir / ("greedy-" + std::to_string(seed));
    run_episode(seed, cfg, greedy, opt);
    verify(*opt.out_dir);
    SilentAgent silent;
    opt.out_dir = dir / ("silent-" + std::to_string(seed));
    run_episode(seed, cfg, silent, opt);
    verify(*opt.out_dir);
  }
  {
    const auto d = dir / "session";
    {
      Session s = Session::open_or_create(d, 4, cfg);
      for (int turn = 0; turn < 12; ++turn) {
        s.next_turn();
        const auto browse = s.run("market browse");
        if (const auto cmds = greedy_commands(browse.payload, cfg.employees); turn % 3 == 0)
          for (const auto& line : cmds) s.run(line);
        s.scratchpad_append("turn " + std::to_string(turn));
      }
    }
    const RunLog log = read_run_log(SessionPaths{d}.run_log());
    Session s = Session::open(d);
    const ReplayResult r = replay(log);
    c.expect(snapshot_hash(r.state) == snapshot_hash(s.state()), "session: hash mismatch");
    c.expect(r.scratchpad == s.scratchpad(), "session: scratchpad mismatch");
    ++logs;
  }
  c.note(std::to_string(logs) + " run logs replayed to their stored hashes");
}

void liveness(Check& c) {
  BenchConfig cfg;
  cfg.initial_funds = Money::from_dollars(10'000'000);
  SilentAgent agent;
  const EpisodeReport rep = run_episode(1, cfg, agent);
  c.expect(rep.outcome == Outcome::horizon, "silent run ended " + std::string(to_string(rep.outcome)));
  // each forced resume stops at a payroll or the horizon: 12 + 1 events
  const int bound = cfg.auto_advance_turns * 13;
  c.expect(rep.turns <= bound, "turns " + std::to_string(rep.turns) + " > " + std::to_string(bound));
  int forced = 0;
  for (const auto& t : rep.telemetry) forced += t.forced_resume;
  c.expect(forced == 13, "forced resumes " + std::to_string(forced));

  const BenchConfig def;
  for (std::int64_t delta : {0, -1}) {
    WorldState s = generate_world(2, def);
    s.funds = monthly_payroll(s) + Money::from_cents(delta);
    resume(s);
    const bool bankrupt = s.outcome == Outcome::bankrupt;
    c.expect(bankrupt == (delta < 0), "funds = payroll" + std::string(delta < 0 ? " - 1 cent" : "") +
                                          (bankrupt ? " went bankrupt" : " survived"));
  }
  SilentAgent poor;
  const EpisodeReport p = run_episode(2, def, poor);
  c.expect(p.outcome == Outcome::bankrupt && p.final_funds.cents() < 0, "default silent run did not go bankrupt");
  c.note("horizon after " + std::to_string(rep.turns) + " turns (bound " + std::to_string(bound) +
         "); bankrupt exactly below payroll");
}

void analytics_fidelity(Check& c) {
  const RunLog log = fixture::hand_log();
  const WorldState snap = fixture::hand_snapshot();
  const json report = fixture::hand_report();
  const json got = compute_stats(log, &snap, &report).to_json();
  const json want = fixture::expected_hand_stats();
  for (const auto& [key, value] : want.items()) c.expect(got.value(key, json()) == value, "field " + key);
  c.expect(got.size() == want.size(), "field count");

  const BusinessHours hours{9, 18};
  const json pair = json::array({fixture::assignee("Emp_1", 8.0), fixture::assignee("Emp_2", 8.0)});
  const json junior = json::array({fixture::assignee("Emp_1", 2.0)});
  c.expect(classify_failure(fixture::failed(2400, junior, 1), true, hours) == FailureCause::adversarial, "adversarial");
  c.expect(classify_failure(fixture::failed(2400, junior, 1), false, hours) == FailureCause::incapable_assignment,
           "incapable");
  c.expect(classify_failure(fixture::failed(1000, pair, 3), false, hours) == FailureCause::overcommitment,
           "overcommitment");
  c.note(std::to_string(want.size()) + " fields exact; adversarial / incapable / overcommitment classified");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"Determinism", determinism},
      {"Config fidelity", config_fidelity},
      {"Adversarial market share", adversarial_share},
      {"Penalty and payout arithmetic", arithmetic},
      {"Adversarial trap property", trap},
      {"Event/brute-force equivalence", brute_force},
      {"Replay oracle", replay_oracle},
      {"Liveness", liveness},
      {"Analytics fidelity", analytics_fidelity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    failed += !c.ok();
    std::printf("%s  %s  (%s)\n", c.ok() ? "PASS" : "FAIL", name.c_str(), c.detail().c_str());
  }
  std::printf("N/A   Model leaderboard  (needs commercial models; covered by the suites above and baseline determinism)\n");
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
