#include <doctest.h>

#include <fstream>
#include <sstream>

#include "../analytics_fixture.hpp"
#include "test_util.hpp"
#include "ycbench/analytics.hpp"
#include "ycbench/harness.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"

using namespace ycbench;
using nlohmann::json;

namespace {

using namespace fixture;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("statistics of a hand-built run log") {
  const RunLog log = hand_log();
  REQUIRE(log.complete);
  const WorldState snap = hand_snapshot();
  const json report = hand_report();
  const RunStats s = compute_stats(log, &snap, &report);
  CHECK(s.to_json() == expected_hand_stats());

  CHECK(s.label == "hand");
  CHECK(s.seed == 42);
  CHECK(s.outcome == "horizon");
  CHECK_FALSE(s.bankrupt);
  CHECK_FALSE(s.partial);
  CHECK(s.final_funds_cents == 15'000'000);
  CHECK(s.turns == 3);
  CHECK(s.tasks_accepted == 3);
  CHECK(s.tasks_completed == 1);
  CHECK(s.tasks_failed == 2);
  CHECK(s.tasks_cancelled == 1);
  REQUIRE(s.trajectory.size() == 1);
  CHECK(s.trajectory[0] == TrajectoryPoint{"2025-02-03 09:00", 15'500'000});
  CHECK(*s.adversarial_acceptance_ratio == doctest::Approx(1.0 / 3.0));
  CHECK(*s.trust_gated_completion_ratio == doctest::Approx(1.0));
  CHECK(s.final_trust.at("Client_1") == 1.0);
  CHECK(s.failures == FailureHistogram{1, 1, 0, 0});
  CHECK(s.adversarial_attributed);
  CHECK(s.scratchpad_writes_per_100_turns == doctest::Approx(100.0 / 3.0));
  CHECK(*s.inspect_accept_ratio == doctest::Approx(1.0 / 3.0));
  CHECK(s.avg_concurrent_tasks == doctest::Approx(1.0));
  CHECK(s.commands_per_turn == doctest::Approx(7.0 / 3.0));
  CHECK(*s.cost_usd == 2.0);
  CHECK(*s.revenue_per_cost_dollar == doctest::Approx(75'000.0));
  CHECK(*s.input_tokens == 1000);
  CHECK_FALSE(s.output_tokens);

  // without the privileged snapshot the adversarial failure cannot be attributed
  const RunStats blind = compute_stats(log);
  CHECK_FALSE(blind.adversarial_acceptance_ratio);
  CHECK_FALSE(blind.adversarial_attributed);
  CHECK(blind.failures == FailureHistogram{0, 2, 0, 0});
  CHECK_FALSE(blind.cost_usd);
}

TEST_CASE("a log without an end record is partial") {
  const RunLog full = hand_log();
  std::string text;
  for (std::size_t i = 0; i + 1 < full.records.size(); ++i) text += full.records[i].dump() + "\n";
  const RunStats s = compute_stats(parse_run_log(text));
  CHECK(s.partial);
  CHECK(s.outcome == "running");
  CHECK(s.final_funds_cents == 15'500'000);
}

TEST_CASE("failure classification") {
  const BusinessHours hours{9, 18};
  // 12 business days between acceptance and deadline: 108 hours
  const json junior = failed(2400, json::array({assignee("Emp_1", 2.0)}), 1);
  CHECK(classify_failure(junior, false, hours) == FailureCause::incapable_assignment);
  CHECK(classify_failure(junior, true, hours) == FailureCause::adversarial);

  const json pair = json::array({assignee("Emp_1", 8.0), assignee("Emp_2", 8.0)});
  // 16/h undivided covers 1728 units, but a three-way split leaves 576
  CHECK(classify_failure(failed(1000, pair, 3), false, hours) == FailureCause::overcommitment);
  CHECK(classify_failure(failed(1000, pair, 1), false, hours) == FailureCause::other);
  CHECK(classify_failure(failed(1728, pair, 1), false, hours) == FailureCause::other);
  CHECK(classify_failure(failed(1729, pair, 1), false, hours) == FailureCause::incapable_assignment);
  CHECK(classify_failure(failed(576, pair, 3), false, hours) == FailureCause::other);

  json never = failed(100, pair, 1);
  never["accepted_at"] = nullptr;
  CHECK(classify_failure(never, false, hours) == FailureCause::other);
}

TEST_CASE("summaries use the population standard deviation") {
  const Summary s = summarize({100, 200, 600});
  CHECK(s.mean == doctest::Approx(300));
  CHECK(s.stddev == doctest::Approx(216.02469));
  CHECK(s.min == 100);
  CHECK(s.max == 600);
  CHECK(s.n == 3);
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("aggregate writes the leaderboard and tables") {
  std::vector<RunStats> runs;
  const std::vector<std::pair<std::int64_t, bool>> a{{100, true}, {200, true}, {600, false}};
  std::uint64_t seed = 1;
  for (auto [dollars, bankrupt] : a) {
    RunStats r;
    r.label = "alpha";
    r.seed = seed++;
    r.final_funds_cents = dollars * 100;
    r.bankrupt = bankrupt;
    r.turns = 10;
    runs.push_back(r);
  }
  RunStats b;
  b.label = "beta";
  b.seed = 1;
  b.final_funds_cents = 100'000;
  b.final_trust = {{"Client_1", 2.5}};
  b.trajectory = {{"2025-02-03 09:00", 90'000}};
  runs.push_back(b);

  testutil::TempDir dir;
  aggregate(runs, dir.path());
  std::istringstream board(slurp(dir / "leaderboard.csv"));
  std::string header, first, second;
  std::getline(board, header);
  std::getline(board, first);
  std::getline(board, second);
  CHECK(header == "rank,label,runs,mean_final_funds,stddev_final_funds,min_final_funds,max_final_funds,bankrupt");
  CHECK(first == "1,beta,1,1000,0,1000,1000,0/1");
  CAPTURE(second);
  CHECK(second.rfind("2,alpha,3,300,216.024", 0) == 0);
  CHECK(second.substr(second.rfind(',') + 1) == "2/3");

  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("leaderboard").at(1).at("bankrupt") == "2/3");
  CHECK(summary.at("runs").size() == 4);
  CHECK(slurp(dir / "trust.csv").find("beta,1,Client_1,2.5,") != std::string::npos);
  CHECK(slurp(dir / "trajectory.csv").find("beta,1,1,2025-02-03 09:00,900") != std::string::npos);
  for (const char* f : {"adversarial.csv", "failures.csv", "behavior.csv"}) CHECK(std::filesystem::exists(dir / f));
  CHECK_THROWS_AS(aggregate({}, dir.path()), std::invalid_argument);
}

TEST_CASE("statistics of a real run agree with the world and are stable") {
  testutil::TempDir dir;
  const BenchConfig cfg;
  GreedyBaselineAgent agent(cfg.employees);
  RunOptions opt;
  opt.out_dir = dir / "run";
  const EpisodeReport rep = run_episode(3, cfg, agent, opt);

  const RunArtifacts a = load_run(dir / "run");
  REQUIRE(a.snapshot);
  REQUIRE(a.report);
  const RunStats s1 = compute_stats(a.log, &*a.snapshot, &*a.report);
  const RunStats s2 = compute_stats(load_run(dir / "run" / "runlog.jsonl").log, &*a.snapshot, &*a.report);
  CHECK(s1.to_json() == s2.to_json());

  const WorldState& w = *a.snapshot;
  CHECK(s1.final_funds_cents == rep.final_funds.cents());
  CHECK(s1.final_funds_cents == w.funds.cents());
  CHECK(s1.turns == rep.turns);
  CHECK(s1.outcome == std::string(to_string(rep.outcome)));
  int completed = 0, failed_n = 0, adv = 0;
  for (const auto& t : w.book) {
    completed += t.status == TaskStatus::completed;
    failed_n += t.status == TaskStatus::failed;
    adv += w.find_client(t.client_id)->adversarial;
  }
  CHECK(s1.tasks_accepted == static_cast<int>(w.book.size()));
  CHECK(s1.tasks_completed == completed);
  CHECK(s1.tasks_failed == failed_n);
  CHECK(s1.failures.total() == failed_n);
  if (!w.book.empty()) CHECK(*s1.adversarial_acceptance_ratio == doctest::Approx(double(adv) / w.book.size()));
  int payrolls = 0;
  for (const auto& e : w.ledger) payrolls += e.kind == LedgerKind::payroll;
  CHECK(static_cast<int>(s1.trajectory.size()) == payrolls);
  for (const auto& [id, trust] : s1.final_trust) CHECK(trust == w.find_client(id)->trust);
}
