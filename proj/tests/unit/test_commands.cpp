#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "ycbench/commands.hpp"
#include "ycbench/engine.hpp"
#include "ycbench/snapshot.hpp"

using namespace ycbench;
using nlohmann::json;

namespace {

std::string random_word(std::mt19937_64& gen) {
  static const std::string alphabet = "abcXYZ019 _-'\"\\,=";
  std::string out;
  const int n = static_cast<int>(gen() % 8);
  for (int i = 0; i < n; ++i) out += alphabet[gen() % alphabet.size()];
  return out;
}

Command random_command(std::mt19937_64& gen) {
  const auto verbs = all_verbs();
  Command c;
  c.verb = verbs[gen() % verbs.size()];
  auto id = [&] { return "Task-" + std::to_string(gen() % 500); };
  switch (c.verb) {
    case Verb::task_inspect:
    case Verb::task_accept:
    case Verb::task_dispatch:
      c.task_id = id();
      break;
    case Verb::task_assign:
      c.task_id = id();
      for (int i = 0, n = 1 + static_cast<int>(gen() % 4); i < n; ++i) c.employees.push_back("Emp_" + std::to_string(i + 1));
      break;
    case Verb::task_cancel:
      c.task_id = id();
      c.reason = random_word(gen);
      break;
    case Verb::market_browse:
      if (gen() % 2) c.domain = kAllDomains[gen() % 4];
      if (gen() % 2) c.reward_min_cents = static_cast<std::int64_t>(gen() % 1'000'000);
      if (gen() % 2) c.limit = 1 + static_cast<int>(gen() % 100);
      break;
    case Verb::task_list:
      if (gen() % 2) c.status = TaskStatus::dispatched;
      break;
    case Verb::scratchpad_write:
    case Verb::scratchpad_append:
      c.content = random_word(gen);
      break;
    default:
      break;
  }
  return c;
}

std::string code_of(std::string_view line) {
  try {
    parse_command(line);
  } catch (const ParseError& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST_CASE("the grammar has fifteen verbs and every one round-trips") {
  CHECK(all_verbs().size() == 15);
  int observe = 0;
  for (Verb v : all_verbs()) observe += is_observe(v);
  CHECK(observe == 8);

  std::mt19937_64 gen(11);
  for (int i = 0; i < 3000; ++i) {
    const Command c = random_command(gen);
    const std::string text = format_command(c);
    CAPTURE(text);
    CHECK(parse_command(text) == c);
    CHECK(parse_command("yc-bench " + text) == c);
  }
}

TEST_CASE("tokenizer handles quotes and escapes") {
  CHECK(tokenize(R"(a "b c" 'd e' f\ g)") == std::vector<std::string>{"a", "b c", "d e", "f g"});
  CHECK(tokenize(R"("say \"hi\"")") == std::vector<std::string>{"say \"hi\""});
  CHECK(tokenize("''") == std::vector<std::string>{""});
  CHECK_THROWS_AS(tokenize("\"open"), ParseError);
}

TEST_CASE("parse errors carry codes and suggestions") {
  CHECK(code_of("task acept --task-id Task-1") == "unknown_command");
  try {
    parse_command("task acept --task-id Task-1");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("task accept") != std::string::npos);
  }
  try {
    parse_command("sim");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("sim resume") != std::string::npos);
  }
  CHECK(code_of("") == "unknown_command");
  CHECK(code_of("task accept") == "missing_flag");
  CHECK(code_of("task accept --task-id") == "missing_value");
  CHECK(code_of("task accept --task-id A --task-id B") == "bad_argument");
  CHECK(code_of("sim resume --limit 3") == "unknown_flag");
  CHECK(code_of("market browse --limit 0") == "bad_argument");
  CHECK(code_of("market browse --domain cooking") == "bad_argument");
  CHECK(code_of("market browse --domain data-engineering --limit=5") == "ok");
  CHECK(code_of("task cancel --task-id Task-1") == "missing_flag");
  CHECK(code_of("task list stray") == "bad_argument");
}

TEST_CASE("scratchpad edits") {
  std::string pad;
  scratchpad_append(pad, "A", 100);
  scratchpad_append(pad, "B", 100);
  CHECK(pad == "A\nB");
  scratchpad_write(pad, "", 100);
  CHECK(pad.empty());
  scratchpad_write(pad, std::string(100, 'x'), 100);
  CHECK_THROWS_AS(scratchpad_append(pad, "", 100), SimError);
  CHECK_THROWS_AS(scratchpad_write(pad, std::string(101, 'x'), 100), SimError);
  CHECK(pad.size() == 100);

  WorldState s = generate_world(1, BenchConfig{});
  std::string agent_pad;
  CHECK(execute_line(s, agent_pad, "scratchpad append --content 'A'").ok);
  CHECK(execute_line(s, agent_pad, "scratchpad append --content B").ok);
  CHECK(agent_pad == "A\nB");
  CHECK(execute_line(s, agent_pad, "scratchpad write --content ''").ok);
  CHECK(agent_pad.empty());
  const auto big = execute_line(s, agent_pad, "scratchpad write --content " + std::string(16 * 1024 + 1, 'y'));
  CHECK_FALSE(big.ok);
  CHECK(big.error_code == "scratchpad_too_large");
}

TEST_CASE("observe commands never change the world") {
  WorldState s = generate_world(5, BenchConfig{});
  std::string pad = "notes";
  // get some tasks into the book first
  const auto browse = execute_line(s, pad, "market browse --limit 5");
  REQUIRE(browse.ok);
  std::string id;
  for (const auto& t : browse.payload.at("tasks"))
    if (id.empty() && t.at("accessible").get<bool>()) id = t.at("id");
  REQUIRE(execute_line(s, pad, "task accept --task-id " + id).ok);
  REQUIRE(execute_line(s, pad, "task assign --task-id " + id + " --employees Emp_1,Emp_2").ok);
  REQUIRE(execute_line(s, pad, "task dispatch --task-id " + id).ok);
  REQUIRE(execute_line(s, pad, "sim resume").ok);

  const std::string before = snapshot_hash(s);
  const std::vector<std::string> observe{"company status",  "employee list",    "market browse",
                                         "market browse --domain research --reward-min-cents 500000",
                                         "task list",       "task list --status dispatched",
                                         "task inspect --task-id " + id, "client list",
                                         "client history",  "finance ledger",   "task inspect --task-id Nope-1"};
  for (const auto& line : observe) {
    CAPTURE(line);
    execute_line(s, pad, line);
    CHECK(snapshot_hash(s) == before);
  }
  CHECK(pad == "notes");
}

TEST_CASE("hidden client fields never reach an observation") {
  WorldState s = generate_world(2, BenchConfig{});
  std::string pad;
  const auto browse = execute_line(s, pad, "market browse --limit 50");
  REQUIRE(browse.ok);
  for (const auto& t : browse.payload.at("tasks")) {
    if (!t.at("accessible").get<bool>()) continue;
    const std::string id = t.at("id");
    execute_line(s, pad, "task accept --task-id " + id);
    execute_line(s, pad, "task assign --task-id " + id + " --employees Emp_1");
    execute_line(s, pad, "task dispatch --task-id " + id);
  }
  std::string all;
  for (int i = 0; i < 30 && !s.terminated(); ++i) {
    for (Verb v : all_verbs()) {
      if (!is_observe(v) || v == Verb::task_inspect) continue;
      all += execute_line(s, pad, verb_text(v)).to_text();
    }
    for (const auto& t : s.book) all += execute_line(s, pad, "task inspect --task-id " + t.id).to_text();
    all += execute_line(s, pad, "sim resume").to_text();
  }
  CHECK(all.size() > 10'000);
  for (const char* word : {"adversarial", "scope_creep", "creep", "effective_work", "trap"}) {
    CAPTURE(word);
    CHECK(all.find(word) == std::string::npos);
  }
}

TEST_CASE("error results are structured") {
  WorldState s = generate_world(1, BenchConfig{});
  std::string pad;
  const auto r = execute_line(s, pad, "task accept --task-id Task-99999");
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "unknown_task");
  const json j = json::parse(r.to_text());
  CHECK(j.at("ok") == false);
  CHECK(j.at("error").at("code") == "unknown_task");
  const auto p = execute_line(s, pad, "fly away");
  CHECK(p.error_code == "unknown_command");
}

TEST_CASE("browse only offers tasks within reach of the company's prestige") {
  WorldState s = generate_world(4, BenchConfig{});
  std::string pad;
  const auto r = execute_line(s, pad, "market browse --limit 200");
  REQUIRE(r.ok);
  for (const auto& t : r.payload.at("tasks")) CHECK(t.at("required_prestige").get<int>() <= 1);
  const auto limited = execute_line(s, pad, "market browse --limit 3");
  CHECK(limited.payload.at("tasks").size() == 3);
}
