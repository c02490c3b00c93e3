#include "ycbench/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "ycbench/engine.hpp"
#include "ycbench/snapshot.hpp"

namespace ycbench {
namespace {

using nlohmann::json;

enum Flag : unsigned {
  kTaskId = 1u << 0,
  kEmployees = 1u << 1,
  kDomain = 1u << 2,
  kRewardMin = 1u << 3,
  kLimit = 1u << 4,
  kStatus = 1u << 5,
  kReason = 1u << 6,
  kContent = 1u << 7,
};

struct FlagName {
  Flag flag;
  std::string_view name;
};

constexpr std::array<FlagName, 8> kFlagNames{{
    {kTaskId, "--task-id"},
    {kEmployees, "--employees"},
    {kDomain, "--domain"},
    {kRewardMin, "--reward-min-cents"},
    {kLimit, "--limit"},
    {kStatus, "--status"},
    {kReason, "--reason"},
    {kContent, "--content"},
}};

struct VerbSpec {
  Verb verb;
  std::string_view text;
  unsigned allowed;
  unsigned required;
  bool observe;
};

constexpr std::array<VerbSpec, 15> kGrammar{{
    {Verb::company_status, "company status", 0, 0, true},
    {Verb::employee_list, "employee list", 0, 0, true},
    {Verb::market_browse, "market browse", kDomain | kRewardMin | kLimit, 0, true},
    {Verb::task_list, "task list", kStatus, 0, true},
    {Verb::task_inspect, "task inspect", kTaskId, kTaskId, true},
    {Verb::client_list, "client list", 0, 0, true},
    {Verb::client_history, "client history", 0, 0, true},
    {Verb::finance_ledger, "finance ledger", 0, 0, true},
    {Verb::task_accept, "task accept", kTaskId, kTaskId, false},
    {Verb::task_assign, "task assign", kTaskId | kEmployees, kTaskId | kEmployees, false},
    {Verb::task_dispatch, "task dispatch", kTaskId, kTaskId, false},
    {Verb::task_cancel, "task cancel", kTaskId | kReason, kTaskId | kReason, false},
    {Verb::sim_resume, "sim resume", 0, 0, false},
    {Verb::scratchpad_write, "scratchpad write", kContent, kContent, false},
    {Verb::scratchpad_append, "scratchpad append", kContent, kContent, false},
}};

constexpr std::array<Verb, 15> kVerbs{
    Verb::company_status, Verb::employee_list, Verb::market_browse,  Verb::task_list,    Verb::task_inspect,
    Verb::client_list,    Verb::client_history, Verb::finance_ledger, Verb::task_accept,  Verb::task_assign,
    Verb::task_dispatch,  Verb::task_cancel,    Verb::sim_resume,     Verb::scratchpad_write, Verb::scratchpad_append};

const VerbSpec& spec_of(Verb v) { return kGrammar[static_cast<std::size_t>(v)]; }

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string_view nearest_verb(std::string_view attempt) {
  if (!attempt.empty() && attempt.find(' ') == std::string_view::npos) {
    for (const auto& s : kGrammar) {
      if (s.text.starts_with(attempt) && s.text[attempt.size()] == ' ') return s.text;
    }
  }
  std::string_view best = kGrammar.front().text;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& s : kGrammar) {
    const auto d = edit_distance(attempt, s.text);
    if (d < best_d) {
      best_d = d;
      best = s.text;
    }
  }
  return best;
}

template <typename T>
T parse_integer(const std::string& text, std::string_view flag) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("bad_argument", std::string(flag) + " expects an integer, got '" + text + "'");
  }
  return value;
}

std::vector<std::string> parse_employee_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.empty() || item.find_first_of(" \t") != std::string::npos) {
      throw ParseError("bad_argument", "malformed employee list '" + text + "' (expected Emp_1,Emp_2,...)");
    }
    out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string quote_if_needed(const std::string& s) {
  const bool plain = !s.empty() && s.find_first_of(" \t\r\n\"'\\") == std::string::npos;
  if (plain) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

json per_domain_json(const TaskRecord& t, const PerDomain<std::int64_t>& values) {
  json out = json::object();
  for (Domain d : t.domains) out[std::string(to_string(d))] = values[index_of(d)];
  return out;
}

json domain_list(const TaskRecord& t) {
  json out = json::array();
  for (Domain d : t.domains) out.push_back(to_string(d));
  return out;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

json prestige_json(const WorldState& s) {
  json out = json::object();
  for (Domain d : kAllDomains) out[std::string(to_string(d))] = round2(s.prestige[index_of(d)]);
  return out;
}

bool meets_prestige(const WorldState& s, const TaskRecord& t) {
  for (Domain d : t.domains) {
    if (s.prestige[index_of(d)] < t.required_prestige - 1e-9) return false;
  }
  return true;
}

bool accessible(const WorldState& s, const TaskRecord& t) {
  if (!meets_prestige(s, t)) return false;
  const ClientProfile* c = s.find_client(t.client_id);
  return c != nullptr && c->trust >= t.required_trust - 1e-9;
}

json company_status(const WorldState& s) {
  json out = peek_status(s).to_json();
  out.erase("events");
  out["prestige"] = prestige_json(s);
  out["funds"] = s.funds.to_string();
  return out;
}

json employee_list(const WorldState& s) {
  json list = json::array();
  for (const auto& e : s.roster) {
    json rates = json::object();
    for (Domain d : kAllDomains) rates[std::string(to_string(d))] = round2(e.rates[index_of(d)]);
    list.push_back(json{{"id", e.id},
                        {"tier", to_string(e.tier)},
                        {"monthly_salary_cents", e.monthly_salary.cents()},
                        {"rates_per_hour", rates},
                        {"active_dispatched_tasks", dispatched_load(s, e.id)}});
  }
  return json{{"employees", list}};
}

json market_browse(const WorldState& s, const Command& c) {
  std::vector<const TaskRecord*> matches;
  for (const auto& t : s.market) {
    // tasks above the company's prestige are not offered yet
    if (!meets_prestige(s, t)) continue;
    if (c.domain && std::find(t.domains.begin(), t.domains.end(), *c.domain) == t.domains.end()) continue;
    if (c.reward_min_cents && t.reward.cents() < *c.reward_min_cents) continue;
    matches.push_back(&t);
  }
  std::stable_sort(matches.begin(), matches.end(), [](const TaskRecord* a, const TaskRecord* b) {
    if (a->reward != b->reward) return a->reward > b->reward;
    return a->id < b->id;
  });
  const std::size_t cap = static_cast<std::size_t>(
      std::min(c.limit.value_or(s.config.browse_limit), s.config.browse_limit));
  json list = json::array();
  for (std::size_t i = 0; i < matches.size() && i < cap; ++i) list.push_back(market_task_view(s, *matches[i]));
  return json{{"tasks", list}, {"total_matching", matches.size()}, {"shown", list.size()}};
}

json task_summary(const WorldState& s, const TaskRecord& t) {
  (void)s;
  return json{{"id", t.id},
              {"client_id", t.client_id},
              {"status", to_string(t.status)},
              {"domains", domain_list(t)},
              {"reward_cents", t.reward.cents()},
              {"progress_pct", round2(std::clamp(t.completion_fraction(), 0.0, 1.0) * 100.0)},
              {"deadline", t.deadline ? json(format_time(*t.deadline)) : json(nullptr)},
              {"assignees", t.assignees}};
}

json task_list(const WorldState& s, const Command& c) {
  json list = json::array();
  for (const auto& t : s.book) {
    if (c.status ? t.status != *c.status : !is_active(t.status)) continue;
    list.push_back(task_summary(s, t));
  }
  return json{{"tasks", list}};
}

json task_inspect(const WorldState& s, const std::string& id) {
  if (const TaskRecord* m = s.find_market_task(id)) {
    json out = market_task_view(s, *m);
    out["status"] = "market";
    return out;
  }
  const TaskRecord* t = s.find_book_task(id);
  if (t == nullptr) throw SimError("unknown_task", "no task with id " + id);
  const auto throughput = task_throughput(s, *t);
  json reqs = json::object();
  for (Domain d : t->domains) {
    const auto i = index_of(d);
    reqs[std::string(to_string(d))] = json{{"advertised_units", t->work[i]},
                                           {"required_units", t->effective_work[i]},
                                           {"completed_units", round2(t->progress[i])},
                                           {"throughput_per_hour", round2(throughput[i])}};
  }
  json out = task_summary(s, *t);
  out["requirements"] = reqs;
  out["required_prestige"] = t->required_prestige;
  out["required_trust"] = t->required_trust;
  out["accepted_at"] = format_time(*t->accepted_at);
  out["dispatched_at"] = t->dispatched_at ? json(format_time(*t->dispatched_at)) : json(nullptr);
  out["finished_at"] = t->finished_at ? json(format_time(*t->finished_at)) : json(nullptr);
  if (const auto next = next_checkpoint_time(s, *t)) {
    out["next_checkpoint"] = json{{"percent", (t->checkpoints_reached + 1) * 25}, {"at", format_time(*next)}};
  } else {
    out["next_checkpoint"] = nullptr;
  }
  if (t->status == TaskStatus::cancelled) out["cancel_reason"] = t->cancel_reason;
  return out;
}

json client_list(const WorldState& s) {
  json list = json::array();
  for (const auto& c : s.clients) {
    list.push_back(json{{"id", c.id}, {"trust", round2(c.trust)}, {"tier", static_cast<int>(std::floor(c.trust + 1e-9))}});
  }
  return json{{"clients", list}, {"trust_max", s.config.trust_max}};
}

json client_history(const WorldState& s) {
  json list = json::array();
  for (const auto& c : s.clients) {
    json outcomes = json::array();
    for (const auto& h : c.history) {
      outcomes.push_back(json{{"task_id", h.task_id}, {"outcome", h.success ? "completed" : "failed"}, {"at", format_time(h.at)}});
    }
    list.push_back(json{{"id", c.id}, {"completions", c.completions}, {"failures", c.failures}, {"outcomes", outcomes}});
  }
  return json{{"clients", list}};
}

json finance_ledger(const WorldState& s) {
  json entries = json::array();
  for (const auto& e : s.ledger) entries.push_back(to_json(e));
  return json{{"entries", entries}, {"funds_cents", s.funds.cents()}};
}

json sim_resume(WorldState& s) {
  const SimTime from = s.clock.now;
  const bool idle = active_task_count(s) == 0;
  const auto digest = resume(s);
  json events = json::array();
  for (const auto& e : digest) events.push_back(to_json(e));
  json status = peek_status(s).to_json();
  status.erase("events");
  json out{{"from", format_time(from)}, {"to", format_time(s.clock.now)}, {"events", events}, {"status", status}};
  if (idle) out["warning"] = "no active tasks; time advanced without any work in progress";
  return out;
}

}  // namespace

std::string_view verb_text(Verb v) { return spec_of(v).text; }
bool is_observe(Verb v) { return spec_of(v).observe; }
std::span<const Verb> all_verbs() { return kVerbs; }

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote == '\'') {
      if (c == '\'') quote = 0;
      else cur += c;
      continue;
    }
    if (quote == '"') {
      if (c == '"') {
        quote = 0;
      } else if (c == '\\' && i + 1 < line.size()) {
        cur += line[++i];
      } else {
        cur += c;
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else if (c == '"' || c == '\'') {
      quote = c;
      in_token = true;
    } else if (c == '\\' && i + 1 < line.size()) {
      cur += line[++i];
      in_token = true;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quote != 0) throw ParseError("parse_error", "unterminated quote");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

Command parse_command(std::span<const std::string> tokens) {
  std::size_t pos = 0;
  if (pos < tokens.size() && tokens[pos] == "yc-bench") ++pos;
  if (tokens.size() - pos < 2) {
    const std::string attempt = pos < tokens.size() ? tokens[pos] : "";
    throw ParseError("unknown_command",
                     "incomplete command '" + attempt + "'; did you mean '" + std::string(nearest_verb(attempt)) + "'?");
  }
  const std::string attempt = tokens[pos] + " " + tokens[pos + 1];
  const VerbSpec* spec = nullptr;
  for (const auto& s : kGrammar) {
    if (s.text == attempt) spec = &s;
  }
  if (spec == nullptr) {
    throw ParseError("unknown_command",
                     "unknown command '" + attempt + "'; did you mean '" + std::string(nearest_verb(attempt)) + "'?");
  }
  pos += 2;

  Command cmd;
  cmd.verb = spec->verb;
  unsigned seen = 0;
  while (pos < tokens.size()) {
    std::string name = tokens[pos++];
    std::optional<std::string> value;
    if (const auto eq = name.find('='); name.starts_with("--") && eq != std::string::npos) {
      value = name.substr(eq + 1);
      name.resize(eq);
    }
    const auto it = std::find_if(kFlagNames.begin(), kFlagNames.end(), [&](const FlagName& f) { return f.name == name; });
    if (it == kFlagNames.end() || (spec->allowed & it->flag) == 0) {
      if (!name.starts_with("--")) {
        throw ParseError("bad_argument", "unexpected argument '" + name + "' for '" + std::string(spec->text) + "'");
      }
      throw ParseError("unknown_flag", "'" + std::string(spec->text) + "' does not accept " + name);
    }
    if (seen & it->flag) throw ParseError("bad_argument", "flag " + name + " given twice");
    seen |= it->flag;
    if (!value) {
      if (pos >= tokens.size()) throw ParseError("missing_value", "flag " + name + " requires a value");
      value = tokens[pos++];
    }
    switch (it->flag) {
      case kTaskId:
        if (value->empty()) throw ParseError("bad_argument", "--task-id must not be empty");
        cmd.task_id = *value;
        break;
      case kEmployees:
        cmd.employees = parse_employee_list(*value);
        break;
      case kDomain:
        cmd.domain = parse_domain(*value);
        if (!cmd.domain) {
          throw ParseError("bad_argument", "unknown domain '" + *value +
                                               "' (training, inference, research, data_engineering)");
        }
        break;
      case kRewardMin:
        cmd.reward_min_cents = parse_integer<std::int64_t>(*value, name);
        if (*cmd.reward_min_cents < 0) throw ParseError("bad_argument", "--reward-min-cents must be >= 0");
        break;
      case kLimit:
        cmd.limit = parse_integer<int>(*value, name);
        if (*cmd.limit < 1) throw ParseError("bad_argument", "--limit must be >= 1");
        break;
      case kStatus:
        cmd.status = parse_task_status(*value);
        if (!cmd.status) throw ParseError("bad_argument", "unknown status '" + *value + "'");
        break;
      case kReason:
        cmd.reason = *value;
        break;
      case kContent:
        cmd.content = *value;
        break;
    }
  }
  for (const auto& f : kFlagNames) {
    if ((spec->required & f.flag) && !(seen & f.flag)) {
      throw ParseError("missing_flag", "'" + std::string(spec->text) + "' requires " + std::string(f.name));
    }
  }
  return cmd;
}

Command parse_command(std::string_view line) {
  const auto tokens = tokenize(line);
  return parse_command(std::span<const std::string>(tokens));
}

std::string format_command(const Command& cmd) {
  std::string out{verb_text(cmd.verb)};
  auto add = [&](std::string_view flag, const std::string& value) {
    out += ' ';
    out += flag;
    out += ' ';
    out += quote_if_needed(value);
  };
  if (cmd.task_id) add("--task-id", *cmd.task_id);
  if (!cmd.employees.empty()) {
    std::string joined;
    for (const auto& e : cmd.employees) {
      if (!joined.empty()) joined += ',';
      joined += e;
    }
    add("--employees", joined);
  }
  if (cmd.domain) add("--domain", std::string(to_string(*cmd.domain)));
  if (cmd.reward_min_cents) add("--reward-min-cents", std::to_string(*cmd.reward_min_cents));
  if (cmd.limit) add("--limit", std::to_string(*cmd.limit));
  if (cmd.status) add("--status", std::string(to_string(*cmd.status)));
  if (cmd.reason) add("--reason", *cmd.reason);
  if (cmd.content) add("--content", *cmd.content);
  return out;
}

CommandResult CommandResult::success(json payload) { return CommandResult{true, std::move(payload), {}, {}}; }

CommandResult CommandResult::failure(std::string code, std::string message) {
  return CommandResult{false, nullptr, std::move(code), std::move(message)};
}

json CommandResult::to_json() const {
  if (ok) return json{{"ok", true}, {"result", payload}};
  return json{{"ok", false}, {"error", {{"code", error_code}, {"message", error_message}}}};
}

std::string CommandResult::to_text() const { return to_json().dump(); }

json StatusObservation::to_json() const {
  json evs = json::array();
  for (const auto& e : events) evs.push_back(ycbench::to_json(e));
  return json{{"timestamp", format_time(timestamp)},
              {"funds_cents", funds.cents()},
              {"monthly_payroll_cents", monthly_payroll.cents()},
              {"runway_months", runway_months ? json(std::round(*runway_months * 100.0) / 100.0) : json("inf")},
              {"active_tasks", active_tasks},
              {"outcome", ycbench::to_string(outcome)},
              {"events", evs}};
}

StatusObservation peek_status(const WorldState& state) {
  StatusObservation obs;
  obs.timestamp = state.clock.now;
  obs.funds = state.funds;
  obs.monthly_payroll = monthly_payroll(state);
  if (obs.monthly_payroll.cents() > 0) {
    obs.runway_months = static_cast<double>(obs.funds.cents()) / static_cast<double>(obs.monthly_payroll.cents());
  }
  obs.active_tasks = active_task_count(state);
  obs.outcome = state.outcome;
  obs.events = state.event_log;
  return obs;
}

StatusObservation render_status(WorldState& state) {
  StatusObservation obs = peek_status(state);
  state.event_log.clear();
  return obs;
}

void scratchpad_write(std::string& pad, std::string_view content, std::size_t cap) {
  if (content.size() > cap) {
    throw SimError("scratchpad_too_large", "scratchpad content of " + std::to_string(content.size()) +
                                               " bytes exceeds the " + std::to_string(cap) + "-byte cap");
  }
  pad.assign(content);
}

void scratchpad_append(std::string& pad, std::string_view content, std::size_t cap) {
  const std::size_t added = content.size() + (pad.empty() ? 0 : 1);
  if (pad.size() + added > cap) {
    throw SimError("scratchpad_too_large", "appending " + std::to_string(content.size()) + " bytes would exceed the " +
                                               std::to_string(cap) + "-byte cap (current size " +
                                               std::to_string(pad.size()) + ")");
  }
  if (!pad.empty()) pad += '\n';
  pad.append(content);
}

json market_task_view(const WorldState& state, const TaskRecord& t) {
  return json{{"id", t.id},
              {"client_id", t.client_id},
              {"domains", domain_list(t)},
              {"work_units", per_domain_json(t, t.work)},
              {"reward_cents", t.reward.cents()},
              {"required_prestige", t.required_prestige},
              {"required_trust", t.required_trust},
              {"deadline_days", deadline_days(t, state.config)},
              {"accessible", accessible(state, t)}};
}

CommandResult execute(WorldState& state, std::string& scratchpad, const Command& cmd) {
  try {
    switch (cmd.verb) {
      case Verb::company_status:
        return CommandResult::success(company_status(state));
      case Verb::employee_list:
        return CommandResult::success(employee_list(state));
      case Verb::market_browse:
        return CommandResult::success(market_browse(state, cmd));
      case Verb::task_list:
        return CommandResult::success(task_list(state, cmd));
      case Verb::task_inspect:
        return CommandResult::success(task_inspect(state, *cmd.task_id));
      case Verb::client_list:
        return CommandResult::success(client_list(state));
      case Verb::client_history:
        return CommandResult::success(client_history(state));
      case Verb::finance_ledger:
        return CommandResult::success(finance_ledger(state));
      case Verb::task_accept: {
        accept_task(state, *cmd.task_id);
        const TaskRecord* t = state.find_book_task(*cmd.task_id);
        return CommandResult::success(json{{"task_id", t->id},
                                           {"status", to_string(t->status)},
                                           {"accepted_at", format_time(*t->accepted_at)},
                                           {"deadline", format_time(*t->deadline)}});
      }
      case Verb::task_assign: {
        assign(state, *cmd.task_id, cmd.employees);
        const TaskRecord* t = state.find_book_task(*cmd.task_id);
        return CommandResult::success(json{{"task_id", t->id}, {"assignees", t->assignees}});
      }
      case Verb::task_dispatch: {
        dispatch(state, *cmd.task_id);
        const TaskRecord* t = state.find_book_task(*cmd.task_id);
        json out{{"task_id", t->id}, {"status", to_string(t->status)}};
        if (const auto next = next_checkpoint_time(state, *t)) out["first_checkpoint_at"] = format_time(*next);
        return CommandResult::success(out);
      }
      case Verb::task_cancel:
        cancel_task(state, *cmd.task_id, cmd.reason.value_or(""));
        return CommandResult::success(json{{"task_id", *cmd.task_id}, {"status", "cancelled"}, {"prestige", prestige_json(state)}});
      case Verb::sim_resume:
        return CommandResult::success(sim_resume(state));
      case Verb::scratchpad_write:
      case Verb::scratchpad_append: {
        if (state.terminated()) throw SimError("episode_over", "the episode has ended");
        if (cmd.verb == Verb::scratchpad_write) {
          scratchpad_write(scratchpad, cmd.content.value_or(""), state.config.scratchpad_cap_bytes);
        } else {
          scratchpad_append(scratchpad, cmd.content.value_or(""), state.config.scratchpad_cap_bytes);
        }
        return CommandResult::success(json{{"bytes", scratchpad.size()}});
      }
    }
  } catch (const SimError& e) {
    return CommandResult::failure(e.code(), e.what());
  }
  return CommandResult::failure("internal", "unhandled command");
}

CommandResult execute_line(WorldState& state, std::string& scratchpad, std::string_view line) {
  Command cmd;
  try {
    cmd = parse_command(line);
  } catch (const ParseError& e) {
    return CommandResult::failure(e.code(), e.what());
  }
  return execute(state, scratchpad, cmd);
}

}  // namespace ycbench
