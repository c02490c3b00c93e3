#include <doctest.h>

#include <thread>

#include "test_util.hpp"
#include "ycbench/harness.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"
#include "ycbench/transport.hpp"

using namespace ycbench;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::vector<TurnRecord> fake_history(int n) {
  std::vector<TurnRecord> h;
  for (int i = 1; i <= n; ++i) {
    TurnRecord r;
    r.turn = i;
    r.commands = {"company status"};
    r.results = {CommandResult::success(json{{"i", i}})};
    h.push_back(r);
  }
  return h;
}

/// Records every envelope it receives, then plays a script.
class RecordingAgent : public Agent {
public:
  explicit RecordingAgent(std::vector<std::vector<std::string>> batches) : batches_(std::move(batches)) {}
  std::string name() const override { return "recording"; }
  AgentReply act(const TurnEnvelope& env, TurnContext&) override {
    envelopes.push_back(env);
    const std::size_t i = envelopes.size() - 1;
    return AgentReply{i < batches_.size() ? batches_[i] : std::vector<std::string>{}, {}};
  }
  std::vector<TurnEnvelope> envelopes;

private:
  std::vector<std::vector<std::string>> batches_;
};

BenchConfig rich_config() {
  BenchConfig cfg;
  cfg.initial_funds = Money::from_dollars(100'000'000);
  return cfg;
}

std::string wire_agent_cmd(const std::string& mode) { return std::string(YCBENCH_WIRE_TEST_AGENT) + " " + mode; }

}  // namespace

TEST_CASE("history keeps the most recent turns") {
  CHECK(truncate_history(fake_history(19), 20).size() == 19);
  CHECK(truncate_history(fake_history(20), 20).size() == 20);
  const auto h = truncate_history(fake_history(25), 20);
  REQUIRE(h.size() == 20);
  CHECK(h.front().turn == 6);
  CHECK(h.back().turn == 25);
  CHECK(truncate_history(fake_history(3), 1).front().turn == 3);
  CHECK(truncate_history({}, 5).empty());
  CHECK_THROWS_AS(truncate_history(fake_history(3), 0), std::invalid_argument);
}

TEST_CASE("envelopes carry at most K turns of history and the scratchpad once") {
  RecordingAgent agent({{"scratchpad write --content 'rule: avoid Client_3'"}});
  RunOptions opt;
  opt.context_window = 4;
  opt.max_turns = 12;
  run_episode(1, rich_config(), agent, opt);
  REQUIRE(agent.envelopes.size() == 12);
  for (std::size_t i = 0; i < agent.envelopes.size(); ++i) {
    const auto& env = agent.envelopes[i];
    CHECK(env.turn == static_cast<int>(i + 1));
    CHECK(env.history.size() == std::min<std::size_t>(i, 4));
    if (!env.history.empty()) CHECK(env.history.back().turn == env.turn - 1);
    CHECK(env.system_prompt.find("{{") == std::string::npos);
    if (i > 0) {
      const auto& p = env.system_prompt;
      const auto first = p.find("rule: avoid Client_3");
      REQUIRE(first != std::string::npos);
      CHECK(p.find("rule: avoid Client_3", first + 1) == std::string::npos);
    }
  }
  CHECK(agent.envelopes[0].system_prompt.find("(empty)") != std::string::npos);
  CHECK(agent.envelopes[5].history.front().turn == 2);
}

TEST_CASE("envelope and history round-trip through JSON") {
  TurnEnvelope env{3, "prompt", fake_history(2), json{{"funds_cents", 5}}};
  env.history[1].results[0] = CommandResult::failure("unknown_task", "no task");
  const TurnEnvelope back = TurnEnvelope::from_json(json::parse(env.to_json().dump()));
  CHECK(back.to_json() == env.to_json());
  const json msg = wire_turn_message(env);
  CHECK(msg.at("schema") == "yc-bench/wire/v1");
  CHECK(msg.at("type") == "turn");
}

TEST_CASE("the system prompt template is pinned and fully resolved") {
  const std::string tmpl = load_system_prompt_template();
  CHECK(sha256_hex(tmpl) == "84f9190a39803cbafe459e0b95828af7c77bcef625f5b3f91fed94e41d34b98e");
  const std::string p = render_system_prompt(tmpl, "line one\nline two", BenchConfig{}, 20);
  CHECK(p.find("{{") == std::string::npos);
  CHECK(p.find("5 turns without resuming") != std::string::npos);
  CHECK(p.find("last 20 turns") != std::string::npos);
  CHECK(p.find("line one\nline two") != std::string::npos);
  for (Verb v : all_verbs()) CHECK(p.find(std::string(verb_text(v))) != std::string::npos);
}

TEST_CASE("the shipped default preset matches the built-in defaults") {
  CHECK(sha256_hex(read_file(preset_dir() / "default.json")) ==
        "3c9a760565d0d50a7787537403e07c370b5046477b79332b3241ca4721f10e0e");
  CHECK(load_config_or_preset("default") == BenchConfig{});
}

TEST_CASE("greedy baseline: first turn") {
  const BenchConfig cfg;
  const WorldState w = generate_world(1, cfg);
  std::string pad;
  WorldState probe = w;
  const auto browse = execute_line(probe, pad, "market browse");
  const auto pick = greedy_pick(browse.payload);
  REQUIRE(pick);
  // independent pick: highest reward among accessible offers, smallest id on ties
  std::int64_t best = -1;
  std::string best_id;
  for (const auto& t : browse.payload.at("tasks")) {
    if (!t.at("accessible").get<bool>()) continue;
    const auto r = t.at("reward_cents").get<std::int64_t>();
    const std::string id = t.at("id");
    if (r > best || (r == best && id < best_id)) {
      best = r;
      best_id = id;
    }
  }
  CHECK(*pick == best_id);

  GreedyBaselineAgent agent(cfg.employees);
  RunOptions opt;
  opt.max_turns = 1;
  const EpisodeReport rep = run_episode(1, cfg, agent, opt);
  const json cmds = rep.transcript.at(0).at("commands");
  CHECK(cmds == json::array({"market browse", "task accept --task-id " + best_id,
                             "task assign --task-id " + best_id + " --employees Emp_1,Emp_2,Emp_3,Emp_4,Emp_5,Emp_6,Emp_7,Emp_8",
                             "task dispatch --task-id " + best_id, "sim resume"}));
}

TEST_CASE("greedy baseline with nothing to take just resumes") {
  CHECK(greedy_commands(json{{"tasks", json::array()}}, 8) == std::vector<std::string>{"sim resume"});
  CHECK(greedy_commands(json{{"tasks", json::array({{{"id", "Task-1"}, {"reward_cents", 5}, {"accessible", false}}})}},
                        8) == std::vector<std::string>{"sim resume"});
  BenchConfig cfg;
  cfg.market_size = 0;
  GreedyBaselineAgent agent(cfg.employees);
  RunOptions opt;
  opt.max_turns = 2;
  const EpisodeReport rep = run_episode(2, cfg, agent, opt);
  CHECK(rep.transcript.at(0).at("commands") == json::array({"market browse", "sim resume"}));
}

TEST_CASE("a silent agent is advanced every fifth turn") {
  SilentAgent agent;
  RunOptions opt;
  opt.max_turns = 23;
  const EpisodeReport rep = run_episode(3, BenchConfig{}, agent, opt);
  std::vector<int> forced;
  for (const auto& t : rep.telemetry)
    if (t.forced_resume) forced.push_back(t.turn);
  CHECK(forced == std::vector<int>{5, 10, 15, 20});
}

TEST_CASE("a silent agent with deep pockets reaches the horizon") {
  SilentAgent agent;
  const EpisodeReport rep = run_episode(3, rich_config(), agent);
  CHECK(rep.outcome == Outcome::horizon);
  CHECK(rep.turns == 65);  // 13 forced resumes, five turns each
  CHECK_FALSE(rep.transport_error);
}

TEST_CASE("runs are deterministic and replayable") {
  testutil::TempDir dir;
  const BenchConfig cfg;
  GreedyBaselineAgent a1(cfg.employees), a2(cfg.employees);
  RunOptions o1, o2;
  o1.out_dir = dir / "a";
  o2.out_dir = dir / "b";
  o1.label = o2.label = "det";
  const EpisodeReport r1 = run_episode(5, cfg, a1, o1);
  const EpisodeReport r2 = run_episode(5, cfg, a2, o2);
  CHECK(r1.snapshot_sha256 == r2.snapshot_sha256);
  CHECK(read_file(dir / "a" / "runlog.jsonl") == read_file(dir / "b" / "runlog.jsonl"));
  CHECK(read_file(dir / "a" / "report.json") == read_file(dir / "b" / "report.json"));

  CHECK(snapshot_hash(replay_transcript(5, cfg, r1.transcript)) == r1.snapshot_sha256);

  const RunLog log = read_run_log(dir / "a" / "runlog.jsonl");
  CHECK(log.complete);
  const ReplayResult rr = replay(log);
  CHECK(rr.divergent_seqs.empty());
  CHECK(snapshot_hash(rr.state) == r1.snapshot_sha256);
  CHECK(log.records.back().at("snapshot_sha256") == r1.snapshot_sha256);

  // a finished run directory opens as a session
  Session s = Session::open(dir / "a");
  CHECK(snapshot_hash(s.state()) == r1.snapshot_sha256);
}

TEST_CASE("commands past the per-turn cap are dropped and logged") {
  BenchConfig cfg;
  cfg.max_commands_per_turn = 3;
  std::vector<std::string> batch(7, "company status");
  RecordingAgent agent({batch});
  testutil::TempDir dir;
  RunOptions opt;
  opt.max_turns = 2;
  opt.out_dir = dir / "r";
  const EpisodeReport rep = run_episode(1, cfg, agent, opt);
  CHECK(rep.telemetry[0].commands_issued == 7);
  CHECK(rep.telemetry[0].commands_executed == 3);
  CHECK(rep.telemetry[0].commands_dropped == 4);
  CHECK(rep.transcript[0].at("commands").size() == 3);
  const auto& hist = agent.envelopes[1].history.at(0);
  REQUIRE(hist.results.size() == 7);
  CHECK(hist.results[2].ok);
  CHECK(hist.results[3].error_code == "command_cap_exceeded");
  const RunLog log = read_run_log(dir / "r" / "runlog.jsonl");
  int warnings = 0;
  for (const auto& r : log.records)
    if (r.at("type") == "warning" && r.at("code") == "command_cap_exceeded") {
      ++warnings;
      CHECK(r.at("dropped") == 4);
    }
  CHECK(warnings == 1);
}

TEST_CASE("wire replies are validated") {
  const json good{{"schema", "yc-bench/wire/v1"}, {"turn", 4}, {"commands", {"sim resume"}},
                  {"telemetry", {{"input_tokens", 10}, {"cost_usd", 0.5}}}};
  const AgentReply r = parse_wire_reply(good, 4);
  CHECK(r.commands == std::vector<std::string>{"sim resume"});
  CHECK(r.telemetry.input_tokens == 10);
  CHECK_FALSE(r.telemetry.output_tokens);
  CHECK(r.telemetry.cost_usd == doctest::Approx(0.5));
  CHECK(parse_wire_reply(json{{"turn", 4}}, 4).commands.empty());
  CHECK_THROWS_AS(parse_wire_reply(good, 5), std::invalid_argument);
  CHECK_THROWS_AS(parse_wire_reply(json::array(), 4), std::invalid_argument);
  CHECK_THROWS_AS(parse_wire_reply(json{{"turn", 4}, {"commands", {1}}}, 4), std::invalid_argument);
  CHECK_THROWS_AS(parse_wire_reply(json{{"turn", 4}, {"schema", "other/v9"}}, 4), std::invalid_argument);
  CHECK_THROWS(parse_wire_reply(json{{"turn", 4}, {"telemetry", {{"input_tokens", "x"}}}}, 4));
}

TEST_CASE("a child-process agent plays a full episode over the wire") {
  WireAgent agent(ChildProcessChannel::spawn(wire_agent_cmd("resume")), "child", 5000ms);
  const EpisodeReport rep = run_episode(2, rich_config(), agent);
  CHECK(rep.outcome == Outcome::horizon);
  CHECK_FALSE(rep.transport_error);
  CHECK(rep.turns == 13);
  const json j = rep.to_json();
  CHECK(j.at("total_cost_usd").get<double>() == doctest::Approx(0.13));
  CHECK(j.at("total_input_tokens") == 1300);

  SilentAgent silent;
  CHECK(rep.snapshot_sha256 == run_episode(2, rich_config(), silent, RunOptions{}).snapshot_sha256);
}

TEST_CASE("a unix-socket agent connects and plays") {
  testutil::TempDir dir;
  const auto sock = dir / "agent.sock";
  auto child = ChildProcessChannel::spawn(wire_agent_cmd("resume --socket " + sock.string()));
  WireAgent agent(UnixSocketChannel::listen(sock, 5000ms), "socket", 5000ms);
  RunOptions opt;
  opt.max_turns = 4;
  const EpisodeReport rep = run_episode(2, rich_config(), agent, opt);
  CHECK(rep.turns == 4);
  CHECK_FALSE(rep.transport_error);
  for (const auto& t : rep.transcript) CHECK(t.at("commands") == json::array({"sim resume"}));
}

TEST_CASE("a slow reply counts as an empty batch and is then skipped") {
  WireAgent agent(ChildProcessChannel::spawn(wire_agent_cmd("sleep:450")), "slow", 300ms);
  RunOptions opt;
  opt.max_turns = 3;
  const EpisodeReport rep = run_episode(2, rich_config(), agent, opt);
  REQUIRE(rep.telemetry.size() == 3);
  CHECK(rep.telemetry[0].agent.error == std::optional<std::string>("timeout"));
  CHECK(rep.transcript[0].at("commands").empty());
  // the late turn-1 answer is discarded and turn 2 gets its own reply
  CHECK(rep.transcript[1].at("commands") == json::array({"sim resume"}));
  CHECK_FALSE(rep.telemetry[1].agent.error);
}

TEST_CASE("malformed replies become empty batches") {
  WireAgent agent(ChildProcessChannel::spawn(wire_agent_cmd("garbage")), "garbage", 2000ms);
  RunOptions opt;
  opt.max_turns = 2;
  const EpisodeReport rep = run_episode(2, rich_config(), agent, opt);
  REQUIRE(rep.telemetry.size() == 2);
  for (const auto& t : rep.telemetry) {
    REQUIRE(t.agent.error);
    CHECK(t.agent.error->rfind("malformed reply", 0) == 0);
  }
}

TEST_CASE("an agent that exits ends the run with a transport error") {
  testutil::TempDir dir;
  WireAgent agent(ChildProcessChannel::spawn(wire_agent_cmd("exit")), "quitter", 2000ms);
  RunOptions opt;
  opt.out_dir = dir / "r";
  const EpisodeReport rep = run_episode(2, BenchConfig{}, agent, opt);
  CHECK(rep.transport_error);
  CHECK(rep.turns == 1);
  CHECK(rep.outcome == Outcome::running);
  const RunLog log = read_run_log(dir / "r" / "runlog.jsonl");
  CHECK(log.complete);
  bool warned = false;
  for (const auto& r : log.records) warned |= r.at("type") == "warning" && r.at("code") == "transport_failure";
  CHECK(warned);
}

TEST_CASE("conformance checks") {
  {
    auto ch = ChildProcessChannel::spawn(wire_agent_cmd("resume"));
    for (const auto& c : run_conformance(*ch, 2000ms)) {
      CAPTURE(c.name);
      CAPTURE(c.detail);
      CHECK(c.passed);
    }
  }
  {
    auto ch = ChildProcessChannel::spawn(wire_agent_cmd("badtypes"));
    std::map<std::string, bool> by_name;
    for (const auto& c : run_conformance(*ch, 2000ms)) by_name[c.name] = c.passed;
    CHECK(by_name.at("commands_are_strings") == false);
    CHECK(by_name.at("telemetry_types") == false);
    CHECK(by_name.at("turn_echo") == true);
  }
  {
    auto ch = ChildProcessChannel::spawn(wire_agent_cmd("garbage"));
    std::map<std::string, bool> by_name;
    for (const auto& c : run_conformance(*ch, 2000ms)) by_name[c.name] = c.passed;
    CHECK(by_name.at("replies_are_json_objects") == false);
  }
}
