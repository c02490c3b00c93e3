#include "ycbench/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ycbench/episode.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"
#include "ycbench/worldgen.hpp"

namespace ycbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

CommandResult result_from_json(const json& j) {
  if (j.at("ok").get<bool>()) return CommandResult::success(j.value("result", json(nullptr)));
  const json& e = j.at("error");
  return CommandResult::failure(e.at("code").get<std::string>(), e.at("message").get<std::string>());
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
    text.replace(pos, from.size(), to);
}

}  // namespace

json TurnRecord::to_json() const {
  json exchanges = json::array();
  for (std::size_t i = 0; i < commands.size(); ++i)
    exchanges.push_back(json{{"command", commands[i]}, {"result", i < results.size() ? results[i].to_json() : json()}});
  return json{{"turn", turn}, {"exchanges", exchanges}};
}

TurnRecord TurnRecord::from_json(const json& j) {
  TurnRecord r;
  r.turn = j.at("turn").get<int>();
  for (const auto& ex : j.at("exchanges")) {
    r.commands.push_back(ex.at("command").get<std::string>());
    r.results.push_back(result_from_json(ex.at("result")));
  }
  return r;
}

json TurnEnvelope::to_json() const {
  json hist = json::array();
  for (const auto& h : history) hist.push_back(h.to_json());
  return json{{"turn", turn}, {"system_prompt", system_prompt}, {"history", hist}, {"status", status}};
}

TurnEnvelope TurnEnvelope::from_json(const json& j) {
  TurnEnvelope e;
  e.turn = j.at("turn").get<int>();
  e.system_prompt = j.at("system_prompt").get<std::string>();
  for (const auto& h : j.at("history")) e.history.push_back(TurnRecord::from_json(h));
  e.status = j.at("status");
  return e;
}

json Telemetry::to_json() const {
  return json{{"input_tokens", opt_json(input_tokens)},
              {"output_tokens", opt_json(output_tokens)},
              {"cost_usd", opt_json(cost_usd)},
              {"error", opt_json(error)}};
}

Telemetry Telemetry::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("telemetry must be an object");
  Telemetry t;
  t.input_tokens = opt_from<std::int64_t>(j, "input_tokens");
  t.output_tokens = opt_from<std::int64_t>(j, "output_tokens");
  t.cost_usd = opt_from<double>(j, "cost_usd");
  t.error = opt_from<std::string>(j, "error");
  return t;
}

// ---- agents ---------------------------------------------------------------

std::optional<std::string> greedy_pick(const json& browse_payload) {
  if (!browse_payload.is_object() || !browse_payload.contains("tasks")) return std::nullopt;
  const json* best = nullptr;
  for (const auto& t : browse_payload.at("tasks")) {
    if (!t.value("accessible", false)) continue;
    if (best == nullptr) {
      best = &t;
      continue;
    }
    const auto r = t.at("reward_cents").get<std::int64_t>();
    const auto br = best->at("reward_cents").get<std::int64_t>();
    if (r > br || (r == br && t.at("id").get<std::string>() < best->at("id").get<std::string>())) best = &t;
  }
  if (best == nullptr) return std::nullopt;
  return best->at("id").get<std::string>();
}

std::vector<std::string> greedy_commands(const json& browse_payload, int roster_size) {
  const auto pick = greedy_pick(browse_payload);
  if (!pick) return {"sim resume"};
  std::string staff;
  for (int i = 1; i <= roster_size; ++i) staff += (i > 1 ? "," : "") + std::string("Emp_") + std::to_string(i);
  return {"task accept --task-id " + *pick, "task assign --task-id " + *pick + " --employees " + staff,
          "task dispatch --task-id " + *pick, "sim resume"};
}

AgentReply GreedyBaselineAgent::act(const TurnEnvelope&, TurnContext& ctx) {
  const CommandResult browse = ctx.run("market browse");
  return AgentReply{greedy_commands(browse.ok ? browse.payload : json::object(), roster_size_), {}};
}

AgentReply ScriptedAgent::act(const TurnEnvelope&, TurnContext&) {
  if (next_ >= batches_.size()) return {};
  return AgentReply{batches_[next_++], {}};
}

json wire_turn_message(const TurnEnvelope& envelope) {
  return json{{"schema", kWireSchema}, {"type", "turn"}, {"envelope", envelope.to_json()}};
}

json wire_end_message(const json& summary) {
  return json{{"schema", kWireSchema}, {"type", "end"}, {"summary", summary}};
}

AgentReply parse_wire_reply(const json& j, int expected_turn) {
  if (!j.is_object()) throw std::invalid_argument("reply must be an object");
  if (j.contains("schema") && j.at("schema") != kWireSchema)
    throw std::invalid_argument("unsupported schema " + j.at("schema").dump());
  if (!j.contains("turn") || !j.at("turn").is_number_integer()) throw std::invalid_argument("reply lacks an integer turn");
  if (j.at("turn").get<int>() != expected_turn)
    throw std::invalid_argument("reply is for turn " + j.at("turn").dump() + ", expected " + std::to_string(expected_turn));
  AgentReply r;
  if (j.contains("commands")) {
    if (!j.at("commands").is_array()) throw std::invalid_argument("commands must be an array");
    for (const auto& c : j.at("commands")) {
      if (!c.is_string()) throw std::invalid_argument("every command must be a string");
      r.commands.push_back(c.get<std::string>());
    }
  }
  if (j.contains("telemetry") && !j.at("telemetry").is_null()) r.telemetry = Telemetry::from_json(j.at("telemetry"));
  return r;
}

WireAgent::WireAgent(std::unique_ptr<LineChannel> channel, std::string name, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), name_(std::move(name)), timeout_(timeout) {}

AgentReply WireAgent::act(const TurnEnvelope& envelope, TurnContext&) {
  channel_->send(wire_turn_message(envelope).dump());
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    AgentReply timeout_reply;
    timeout_reply.telemetry.error = "timeout";
    if (left.count() <= 0) return timeout_reply;
    const auto line = channel_->receive(left);
    if (!line) return timeout_reply;
    const json j = json::parse(*line, nullptr, false);
    // a late answer to an earlier envelope
    if (j.is_object() && j.contains("turn") && j.at("turn").is_number_integer() &&
        j.at("turn").get<int>() < envelope.turn)
      continue;
    try {
      if (j.is_discarded()) throw std::invalid_argument("reply is not JSON");
      return parse_wire_reply(j, envelope.turn);
    } catch (const std::exception& e) {
      AgentReply bad;
      bad.telemetry.error = std::string("malformed reply: ") + e.what();
      return bad;
    }
  }
}

void WireAgent::episode_end(const json& summary) {
  try {
    channel_->send(wire_end_message(summary).dump());
  } catch (const TransportError&) {
  }
}

// ---- context ---------------------------------------------------------------

std::vector<TurnRecord> truncate_history(const std::vector<TurnRecord>& history, int k) {
  if (k < 1) throw std::invalid_argument("context window must be at least 1");
  const std::size_t keep = std::min(history.size(), static_cast<std::size_t>(k));
  return {history.end() - static_cast<std::ptrdiff_t>(keep), history.end()};
}

std::string load_system_prompt_template() {
  fs::path dir = YCBENCH_PROMPT_DIR;
  if (const char* env = std::getenv("YC_PROMPT_DIR"); env && *env) dir = env;
  std::ifstream in(dir / "system_prompt.txt", std::ios::binary);
  if (!in) throw std::runtime_error("system prompt not found in " + dir.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_system_prompt(const std::string& tmpl, const std::string& scratchpad, const BenchConfig& cfg,
                                 int context_window) {
  std::string out = tmpl;
  replace_all(out, "{{AUTO_ADVANCE}}", std::to_string(cfg.auto_advance_turns));
  replace_all(out, "{{CONTEXT_WINDOW}}", std::to_string(context_window));
  const std::size_t at = out.find("{{SCRATCHPAD}}");
  const std::string body = scratchpad.empty() ? "(empty)" : scratchpad;
  if (at == std::string::npos) {
    out += "\n" + body + "\n";
  } else {
    out.replace(at, 14, body);
  }
  return out;
}

// ---- episodes --------------------------------------------------------------

json TurnTelemetry::to_json() const {
  return json{{"turn", turn},
              {"commands_issued", commands_issued},
              {"commands_executed", commands_executed},
              {"commands_dropped", commands_dropped},
              {"forced_resume", forced_resume},
              {"agent", agent.to_json()}};
}

json EpisodeReport::to_json() const {
  json tel = json::array();
  std::optional<double> cost;
  std::optional<std::int64_t> in_tokens;
  std::optional<std::int64_t> out_tokens;
  for (const auto& t : telemetry) {
    tel.push_back(t.to_json());
    if (t.agent.cost_usd) cost = cost.value_or(0) + *t.agent.cost_usd;
    if (t.agent.input_tokens) in_tokens = in_tokens.value_or(0) + *t.agent.input_tokens;
    if (t.agent.output_tokens) out_tokens = out_tokens.value_or(0) + *t.agent.output_tokens;
  }
  return json{{"schema", kReportSchema},
              {"seed", seed},
              {"agent", agent},
              {"outcome", to_string(outcome)},
              {"final_funds_cents", final_funds.cents()},
              {"final_funds", final_funds.to_string()},
              {"turns", turns},
              {"snapshot_sha256", snapshot_sha256},
              {"transport_error", opt_json(transport_error)},
              {"total_cost_usd", opt_json(cost)},
              {"total_input_tokens", opt_json(in_tokens)},
              {"total_output_tokens", opt_json(out_tokens)},
              {"telemetry", tel},
              {"transcript", transcript}};
}

namespace {

class HarnessContext : public TurnContext {
public:
  HarnessContext(Episode& ep, TurnRecord& record, json& executed, int cap)
      : ep_(ep), record_(record), executed_(executed), cap_(cap) {}

  CommandResult run(std::string_view line) override {
    ++issued;
    CommandResult r;
    if (executed_count >= cap_) {
      ++dropped;
      r = CommandResult::failure("command_cap_exceeded",
                                 "at most " + std::to_string(cap_) + " commands per turn; command dropped");
    } else {
      ++executed_count;
      r = ep_.run(line);
      executed_.push_back(std::string(line));
    }
    record_.commands.emplace_back(line);
    record_.results.push_back(r);
    return r;
  }

  int issued{0};
  int executed_count{0};
  int dropped{0};

private:
  Episode& ep_;
  TurnRecord& record_;
  json& executed_;
  int cap_;
};

}  // namespace

EpisodeReport run_episode(std::uint64_t seed, const BenchConfig& cfg, Agent& agent, const RunOptions& options) {
  const int k = options.context_window.value_or(cfg.context_window);
  if (k < 1) throw std::invalid_argument("context window must be at least 1");
  fs::path log_path = "/dev/null";
  std::ofstream timing;
  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    log_path = *options.out_dir / "runlog.jsonl";
    fs::remove(log_path);
    timing.open(*options.out_dir / "timing.jsonl", std::ios::trunc);
  }
  Episode ep = Episode::start(seed, cfg, options.label, log_path);
  const std::string tmpl = load_system_prompt_template();

  EpisodeReport report;
  report.seed = seed;
  report.agent = agent.name();
  std::vector<TurnRecord> history;

  while (!ep.state().terminated()) {
    if (options.max_turns && ep.turn() >= *options.max_turns) break;
    const auto t0 = std::chrono::steady_clock::now();
    StatusObservation status = ep.begin_turn();
    TurnEnvelope env{ep.turn(), render_system_prompt(tmpl, ep.scratchpad(), cfg, k), truncate_history(history, k),
                     status.to_json()};
    TurnRecord record;
    record.turn = ep.turn();
    json executed = json::array();
    HarnessContext ctx(ep, record, executed, cfg.max_commands_per_turn);
    TurnTelemetry tt;
    tt.turn = ep.turn();

    AgentReply reply;
    try {
      reply = agent.act(env, ctx);
    } catch (const TransportError& e) {
      report.transport_error = e.what();
      ep.log().append(json{{"type", "warning"}, {"turn", ep.turn()}, {"code", "transport_failure"}, {"message", e.what()}});
    }
    const auto t1 = std::chrono::steady_clock::now();
    for (const auto& line : reply.commands) ctx.run(line);
    if (ctx.dropped > 0)
      ep.log().append(json{{"type", "warning"},
                           {"turn", ep.turn()},
                           {"code", "command_cap_exceeded"},
                           {"dropped", ctx.dropped}});
    tt.commands_issued = ctx.issued;
    tt.commands_executed = ctx.executed_count;
    tt.commands_dropped = ctx.dropped;
    tt.agent = reply.telemetry;
    if (report.transport_error) {
      report.transcript.push_back(json{{"turn", ep.turn()}, {"commands", executed}, {"forced_resume", false}});
      report.telemetry.push_back(tt);
      break;
    }
    tt.forced_resume = ep.end_turn().has_value();
    report.transcript.push_back(json{{"turn", ep.turn()}, {"commands", executed}, {"forced_resume", tt.forced_resume}});
    report.telemetry.push_back(tt);
    history.push_back(std::move(record));
    if (history.size() > static_cast<std::size_t>(2 * k)) history.erase(history.begin(), history.end() - k);
    const auto t2 = std::chrono::steady_clock::now();
    if (timing.is_open()) {
      timing << json{{"turn", tt.turn},
                     {"agent_ms", std::chrono::duration<double, std::milli>(t1 - t0).count()},
                     {"engine_ms", std::chrono::duration<double, std::milli>(t2 - t1).count()}}
                    .dump()
             << "\n";
    }
  }
  ep.finish();

  const WorldState& s = ep.state();
  report.outcome = s.outcome;
  report.final_funds = s.funds;
  report.turns = ep.turn();
  report.snapshot_sha256 = snapshot_hash(s);
  agent.episode_end(json{{"outcome", to_string(s.outcome)}, {"final_funds_cents", s.funds.cents()}, {"turns", ep.turn()}});

  if (options.out_dir) {
    const fs::path& out = *options.out_dir;
    atomic_write(out / "report.json", report.to_json().dump(2) + "\n");
    atomic_write(out / "config.json", config_to_json(cfg).dump(2) + "\n");
    atomic_write(out / "snapshot.json", snapshot_file_text(s, session_meta(ep, out.filename().string())));
    atomic_write(out / "scratchpad.txt", ep.scratchpad());
  }
  return report;
}

WorldState replay_transcript(std::uint64_t seed, const BenchConfig& cfg, const json& transcript) {
  WorldState state = generate_world(seed, cfg);
  std::string pad;
  for (const auto& turn : transcript) {
    render_status(state);
    for (const auto& line : turn.at("commands")) execute_line(state, pad, line.get<std::string>());
    if (turn.value("forced_resume", false)) execute_line(state, pad, "sim resume");
  }
  return state;
}

// ---- conformance -------------------------------------------------------------

std::vector<ConformanceCheck> run_conformance(LineChannel& channel, std::chrono::milliseconds timeout, int turns) {
  std::vector<ConformanceCheck> checks{
      {"replies_within_timeout", true, ""}, {"replies_are_json_objects", true, ""}, {"schema_tag", true, ""},
      {"turn_echo", true, ""},              {"commands_are_strings", true, ""},     {"commands_parse", true, ""},
      {"telemetry_types", true, ""},
  };
  auto fail = [&](std::size_t i, const std::string& detail) {
    if (checks[i].passed) checks[i].detail = detail;
    checks[i].passed = false;
  };

  const BenchConfig cfg;
  Episode ep = Episode::start(1, cfg, "conformance", "/dev/null");
  const std::string tmpl = load_system_prompt_template();
  std::vector<TurnRecord> history;
  for (int i = 0; i < turns && !ep.state().terminated(); ++i) {
    StatusObservation status = ep.begin_turn();
    TurnEnvelope env{ep.turn(), render_system_prompt(tmpl, ep.scratchpad(), cfg, cfg.context_window),
                     truncate_history(history, cfg.context_window), status.to_json()};
    const std::string where = "turn " + std::to_string(env.turn) + ": ";
    channel.send(wire_turn_message(env).dump());
    const auto line = channel.receive(timeout);
    TurnRecord record;
    record.turn = env.turn;
    if (!line) {
      fail(0, where + "no reply");
    } else {
      const json j = json::parse(*line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        fail(1, where + "not a JSON object");
      } else {
        if (j.value("schema", "") != kWireSchema) fail(2, where + "schema tag missing or wrong");
        if (!j.contains("turn") || !j.at("turn").is_number_integer() || j.at("turn").get<int>() != env.turn)
          fail(3, where + "turn not echoed");
        const json cmds = j.value("commands", json::array());
        if (!cmds.is_array()) fail(4, where + "commands is not an array");
        for (const auto& c : cmds.is_array() ? cmds : json::array()) {
          if (!c.is_string()) {
            fail(4, where + "non-string command");
            continue;
          }
          const std::string text = c.get<std::string>();
          try {
            parse_command(text);
          } catch (const ParseError& e) {
            fail(5, where + "'" + text + "': " + e.what());
          }
          if (record.commands.size() < static_cast<std::size_t>(cfg.max_commands_per_turn)) {
            record.commands.push_back(text);
            record.results.push_back(ep.run(text));
          }
        }
        if (j.contains("telemetry") && !j.at("telemetry").is_null()) {
          try {
            Telemetry::from_json(j.at("telemetry"));
          } catch (const std::exception& e) {
            fail(6, where + e.what());
          }
        }
      }
    }
    ep.end_turn();
    history.push_back(std::move(record));
  }
  channel.send(wire_end_message(json{{"outcome", to_string(ep.state().outcome)}, {"turns", ep.turn()}}).dump());
  return checks;
}

}  // namespace ycbench
