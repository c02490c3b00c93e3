#include "ycbench/runlog.hpp"

#include <sstream>
#include <stdexcept>

#include "ycbench/engine.hpp"
#include "ycbench/snapshot.hpp"
#include "ycbench/worldgen.hpp"

namespace ycbench {
namespace {

using nlohmann::json;

json rates_json(const EmployeeProfile& e, const TaskRecord& t) {
  json out = json::object();
  for (Domain d : t.domains) out[std::string(to_string(d))] = e.rates[index_of(d)];
  return out;
}

json domain_map(const TaskRecord& t, const PerDomain<std::int64_t>& v) {
  json out = json::object();
  for (Domain d : t.domains) out[std::string(to_string(d))] = v[index_of(d)];
  return out;
}

json progress_map(const TaskRecord& t) {
  json out = json::object();
  for (Domain d : t.domains) out[std::string(to_string(d))] = t.progress[index_of(d)];
  return out;
}

json opt_time(const std::optional<SimTime>& t) { return t ? json(format_time(*t)) : json(nullptr); }

}  // namespace

RunLogWriter::RunLogWriter(const std::filesystem::path& path, std::int64_t next_seq)
    : out_(path, std::ios::app), next_seq_(next_seq) {
  if (!out_) throw std::runtime_error("cannot open run log " + path.string());
}

std::int64_t RunLogWriter::append(json record) {
  const std::int64_t seq = next_seq_++;
  json line = json::object();
  line["seq"] = seq;
  for (auto& [k, v] : record.items()) line[k] = std::move(v);
  out_ << line.dump() << '\n';
  return seq;
}

void RunLogWriter::flush() { out_.flush(); }

const json& RunLog::header() const {
  if (records.empty() || records.front().value("type", "") != "header") {
    throw std::invalid_argument("run log has no header record");
  }
  return records.front();
}

RunLog parse_run_log(std::string_view text) {
  RunLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::int64_t expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      log.truncated = true;
      break;
    }
    if (rec.value("seq", std::int64_t{-1}) != expected) {
      log.truncated = true;
      break;
    }
    ++expected;
    log.records.push_back(std::move(rec));
  }
  log.complete = !log.records.empty() && log.records.back().value("type", "") == "end";
  return log;
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_log(buf.str());
}

json header_record(std::uint64_t seed, const BenchConfig& cfg, std::string_view label) {
  return json{{"type", "header"},
              {"schema", kRunLogSchema},
              {"seed", seed},
              {"label", label},
              {"config", config_to_json(cfg)}};
}

json end_record(const WorldState& state, int turns) {
  json trust = json::object();
  for (const auto& c : state.clients) trust[c.id] = c.trust;
  return json{{"type", "end"},
              {"outcome", to_string(state.outcome)},
              {"at", format_time(state.clock.now)},
              {"final_funds_cents", state.funds.cents()},
              {"turns", turns},
              {"client_trust", trust},
              {"snapshot_sha256", snapshot_hash(state)}};
}

json turn_record(int turn, const StatusObservation& status) {
  json st = status.to_json();
  st.erase("events");
  return json{{"type", "turn"}, {"turn", turn}, {"status", st}, {"digest_events", status.events.size()}};
}

json task_record(const WorldState& state, const TaskRecord& t, std::string_view action) {
  json assignees = json::array();
  for (const auto& id : t.assignees) {
    if (const EmployeeProfile* e = state.find_employee(id)) {
      assignees.push_back(json{{"id", id}, {"rates", rates_json(*e, t)}});
    }
  }
  json domains = json::array();
  for (Domain d : t.domains) domains.push_back(to_string(d));
  return json{{"type", "task"},
              {"action", action},
              {"at", format_time(state.clock.now)},
              {"task_id", t.id},
              {"client_id", t.client_id},
              {"domains", domains},
              {"reward_cents", t.reward.cents()},
              {"required_prestige", t.required_prestige},
              {"required_trust", t.required_trust},
              {"advertised_work", domain_map(t, t.work)},
              {"effective_work", domain_map(t, t.effective_work)},
              {"progress", progress_map(t)},
              {"accepted_at", opt_time(t.accepted_at)},
              {"dispatched_at", opt_time(t.dispatched_at)},
              {"deadline", opt_time(t.deadline)},
              {"assignees", assignees},
              {"max_split", t.max_split}};
}

CommandResult execute_logged(WorldState& state, std::string& scratchpad, std::string_view line, RunLogWriter& log,
                             int turn, std::string_view origin) {
  const std::size_t ledger_before = state.ledger.size();
  const std::size_t events_before = state.event_log.size();
  const std::size_t book_before = state.book.size();

  CommandResult result = execute_line(state, scratchpad, line);

  json rec{{"type", "command"}, {"turn", turn}, {"origin", origin}, {"line", std::string(line)}, {"ok", result.ok}};
  if (!result.ok) rec["error_code"] = result.error_code;
  rec["at"] = format_time(state.clock.now);
  log.append(std::move(rec));

  for (std::size_t i = book_before; i < state.book.size(); ++i) log.append(task_record(state, state.book[i], "accepted"));
  for (std::size_t i = events_before; i < state.event_log.size(); ++i) {
    const DigestEvent& ev = state.event_log[i];
    if (ev.kind == "task_completed" || ev.kind == "task_failed") {
      if (const TaskRecord* t = state.find_book_task(ev.subject)) {
        log.append(task_record(state, *t, ev.kind == "task_completed" ? "completed" : "failed"));
      }
    }
    json e = to_json(ev);
    e["type"] = "event";
    log.append(std::move(e));
  }
  if (result.ok) {
    const Command cmd = parse_command(line);
    if (cmd.verb == Verb::task_cancel) {
      if (const TaskRecord* t = state.find_book_task(*cmd.task_id)) log.append(task_record(state, *t, "cancelled"));
    }
  }
  Money running = state.funds;
  for (std::size_t i = ledger_before; i < state.ledger.size(); ++i) running -= state.ledger[i].amount;
  for (std::size_t i = ledger_before; i < state.ledger.size(); ++i) {
    running += state.ledger[i].amount;
    json e = to_json(state.ledger[i]);
    e["type"] = "ledger";
    e["funds_cents"] = running.cents();
    log.append(std::move(e));
  }
  return result;
}

ReplayResult replay(const RunLog& log) {
  const json& header = log.header();
  if (header.value("schema", "") != kRunLogSchema) throw std::invalid_argument("unsupported run log schema");
  ReplayResult out{generate_world(header.at("seed").get<std::uint64_t>(), config_from_json(header.at("config"))), {}, 0, 0, {}};
  for (const auto& rec : log.records) {
    const std::string type = rec.value("type", "");
    if (type == "turn") {
      out.turns = rec.at("turn").get<int>();
      render_status(out.state);
    } else if (type == "command") {
      const std::string line = rec.at("line").get<std::string>();
      const CommandResult r = execute_line(out.state, out.scratchpad, line);
      if (r.ok != rec.at("ok").get<bool>()) out.divergent_seqs.push_back(rec.at("seq").get<std::int64_t>());
    } else if (type == "turn_end") {
      out.idle_turns = rec.at("idle_turns").get<int>();
    }
  }
  return out;
}

}  // namespace ycbench
