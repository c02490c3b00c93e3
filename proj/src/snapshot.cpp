#include "ycbench/snapshot.hpp"

#include <openssl/evp.h>

#include <array>

namespace ycbench {
namespace {

using nlohmann::json;

template <typename T>
json per_domain(const PerDomain<T>& values) {
  json out = json::object();
  for (Domain d : kAllDomains) out[std::string(to_string(d))] = values[index_of(d)];
  return out;
}

template <typename T>
PerDomain<T> per_domain_from(const json& j) {
  PerDomain<T> out{};
  for (Domain d : kAllDomains) out[index_of(d)] = j.at(std::string(to_string(d))).get<T>();
  return out;
}

json opt_time(const std::optional<SimTime>& t) { return t ? json(format_time(*t)) : json(nullptr); }

std::optional<SimTime> opt_time_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_time(j.get<std::string>());
}

template <typename Enum, typename Parser>
Enum parse_enum(const json& j, Parser parser, const char* what) {
  auto v = parser(j.get<std::string>());
  if (!v) throw SnapshotError(std::string("snapshot: bad ") + what + " '" + j.get<std::string>() + "'");
  return *v;
}

json rng_to_json(const RngStream& r) { return json{{"key", r.key()}, {"counter", r.counter()}}; }
RngStream rng_from_json(const json& j) {
  return RngStream{j.at("key").get<std::uint64_t>(), j.at("counter").get<std::uint64_t>()};
}

LedgerEntry ledger_from_json(const json& j) {
  return LedgerEntry{parse_time(j.at("at").get<std::string>()),
                     parse_enum<LedgerKind>(j.at("kind"), parse_ledger_kind, "ledger kind"),
                     Money::from_cents(j.at("amount_cents").get<std::int64_t>()),
                     j.at("reference").get<std::string>()};
}

DigestEvent digest_from_json(const json& j) {
  return DigestEvent{parse_time(j.at("at").get<std::string>()), j.at("kind").get<std::string>(),
                     j.at("subject").get<std::string>(), j.at("amount_cents").get<std::int64_t>(),
                     j.at("detail").get<std::string>()};
}

SimEvent sim_event_from_json(const json& j) {
  return SimEvent{parse_time(j.at("at").get<std::string>()),
                  parse_enum<EventKind>(j.at("kind"), parse_event_kind, "event kind"),
                  j.at("task_id").get<std::string>(), j.at("quarter").get<int>()};
}

TaskRecord task_from_json(const json& j) {
  TaskRecord t;
  t.id = j.at("id").get<std::string>();
  t.client_id = j.at("client_id").get<std::string>();
  for (const auto& d : j.at("domains")) t.domains.push_back(parse_enum<Domain>(d, parse_domain, "domain"));
  t.work = per_domain_from<std::int64_t>(j.at("work"));
  t.effective_work = per_domain_from<std::int64_t>(j.at("effective_work"));
  t.progress = per_domain_from<double>(j.at("progress"));
  t.reward = Money::from_cents(j.at("reward_cents").get<std::int64_t>());
  t.required_prestige = j.at("required_prestige").get<int>();
  t.required_trust = j.at("required_trust").get<int>();
  t.status = parse_enum<TaskStatus>(j.at("status"), parse_task_status, "task status");
  t.accepted_at = opt_time_from(j.at("accepted_at"));
  t.deadline = opt_time_from(j.at("deadline"));
  t.dispatched_at = opt_time_from(j.at("dispatched_at"));
  t.finished_at = opt_time_from(j.at("finished_at"));
  t.assignees = j.at("assignees").get<std::vector<std::string>>();
  t.checkpoints_reached = j.at("checkpoints_reached").get<int>();
  t.max_split = j.at("max_split").get<int>();
  t.cancel_reason = j.at("cancel_reason").get<std::string>();
  return t;
}

EmployeeProfile employee_from_json(const json& j) {
  EmployeeProfile e;
  e.id = j.at("id").get<std::string>();
  e.tier = parse_enum<Tier>(j.at("tier"), parse_tier, "tier");
  e.monthly_salary = Money::from_cents(j.at("monthly_salary_cents").get<std::int64_t>());
  e.rates = per_domain_from<double>(j.at("rates"));
  return e;
}

ClientProfile client_from_json(const json& j) {
  ClientProfile c;
  c.id = j.at("id").get<std::string>();
  c.trust = j.at("trust").get<double>();
  c.adversarial = j.at("adversarial").get<bool>();
  c.scope_creep_factor = j.at("scope_creep_factor").get<double>();
  c.completions = j.at("completions").get<int>();
  c.failures = j.at("failures").get<int>();
  for (const auto& h : j.at("history")) {
    c.history.push_back(ClientOutcome{h.at("task_id").get<std::string>(), h.at("success").get<bool>(),
                                      parse_time(h.at("at").get<std::string>())});
  }
  return c;
}

}  // namespace

json to_json(const LedgerEntry& e) {
  return json{{"at", format_time(e.at)},
              {"kind", to_string(e.kind)},
              {"amount_cents", e.amount.cents()},
              {"reference", e.reference}};
}

json to_json(const DigestEvent& e) {
  return json{{"at", format_time(e.at)},
              {"kind", e.kind},
              {"subject", e.subject},
              {"amount_cents", e.amount_cents},
              {"detail", e.detail}};
}

json to_json(const SimEvent& e) {
  return json{{"at", format_time(e.at)}, {"kind", to_string(e.kind)}, {"task_id", e.task_id}, {"quarter", e.quarter}};
}

json to_json(const TaskRecord& t) {
  json domains = json::array();
  for (Domain d : t.domains) domains.push_back(to_string(d));
  return json{{"id", t.id},
              {"client_id", t.client_id},
              {"domains", domains},
              {"work", per_domain(t.work)},
              {"effective_work", per_domain(t.effective_work)},
              {"progress", per_domain(t.progress)},
              {"reward_cents", t.reward.cents()},
              {"required_prestige", t.required_prestige},
              {"required_trust", t.required_trust},
              {"status", to_string(t.status)},
              {"accepted_at", opt_time(t.accepted_at)},
              {"deadline", opt_time(t.deadline)},
              {"dispatched_at", opt_time(t.dispatched_at)},
              {"finished_at", opt_time(t.finished_at)},
              {"assignees", t.assignees},
              {"checkpoints_reached", t.checkpoints_reached},
              {"max_split", t.max_split},
              {"cancel_reason", t.cancel_reason}};
}

json to_json(const EmployeeProfile& e) {
  return json{{"id", e.id},
              {"tier", to_string(e.tier)},
              {"monthly_salary_cents", e.monthly_salary.cents()},
              {"rates", per_domain(e.rates)}};
}

json to_json(const ClientProfile& c) {
  json history = json::array();
  for (const auto& h : c.history) {
    history.push_back(json{{"task_id", h.task_id}, {"success", h.success}, {"at", format_time(h.at)}});
  }
  return json{{"id", c.id},
              {"trust", c.trust},
              {"adversarial", c.adversarial},
              {"scope_creep_factor", c.scope_creep_factor},
              {"completions", c.completions},
              {"failures", c.failures},
              {"history", history}};
}

json to_json(const WorldState& s) {
  json roster = json::array();
  for (const auto& e : s.roster) roster.push_back(to_json(e));
  json clients = json::array();
  for (const auto& c : s.clients) clients.push_back(to_json(c));
  json market = json::array();
  for (const auto& t : s.market) market.push_back(to_json(t));
  json book = json::array();
  for (const auto& t : s.book) book.push_back(to_json(t));
  json ledger = json::array();
  for (const auto& e : s.ledger) ledger.push_back(to_json(e));
  json events = json::array();
  for (const auto& e : s.events) events.push_back(to_json(e));
  json log = json::array();
  for (const auto& e : s.event_log) log.push_back(to_json(e));
  return json{{"seed", s.seed},
              {"config", config_to_json(s.config)},
              {"clock",
               {{"now", format_time(s.clock.now)},
                {"start", format_time(s.clock.start)},
                {"horizon_end", format_time(s.clock.horizon_end)}}},
              {"funds_cents", s.funds.cents()},
              {"roster", roster},
              {"clients", clients},
              {"market", market},
              {"book", book},
              {"prestige", per_domain(s.prestige)},
              {"ledger", ledger},
              {"events", events},
              {"rng",
               {{"roster", rng_to_json(s.rng.roster)},
                {"clients", rng_to_json(s.rng.clients)},
                {"market", rng_to_json(s.rng.market)},
                {"adversary", rng_to_json(s.rng.adversary)}}},
              {"event_log", log},
              {"next_task_serial", s.next_task_serial},
              {"last_day", s.last_day},
              {"outcome", to_string(s.outcome)}};
}

WorldState state_from_json(const json& j) {
  try {
    WorldState s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config = config_from_json(j.at("config"));
    const auto& clock = j.at("clock");
    s.clock.now = parse_time(clock.at("now").get<std::string>());
    s.clock.start = parse_time(clock.at("start").get<std::string>());
    s.clock.horizon_end = parse_time(clock.at("horizon_end").get<std::string>());
    s.funds = Money::from_cents(j.at("funds_cents").get<std::int64_t>());
    for (const auto& e : j.at("roster")) s.roster.push_back(employee_from_json(e));
    for (const auto& c : j.at("clients")) s.clients.push_back(client_from_json(c));
    for (const auto& t : j.at("market")) s.market.push_back(task_from_json(t));
    for (const auto& t : j.at("book")) s.book.push_back(task_from_json(t));
    s.prestige = per_domain_from<double>(j.at("prestige"));
    for (const auto& e : j.at("ledger")) s.ledger.push_back(ledger_from_json(e));
    for (const auto& e : j.at("events")) s.events.insert(sim_event_from_json(e));
    const auto& rng = j.at("rng");
    s.rng.roster = rng_from_json(rng.at("roster"));
    s.rng.clients = rng_from_json(rng.at("clients"));
    s.rng.market = rng_from_json(rng.at("market"));
    s.rng.adversary = rng_from_json(rng.at("adversary"));
    for (const auto& e : j.at("event_log")) s.event_log.push_back(digest_from_json(e));
    s.next_task_serial = j.at("next_task_serial").get<std::int64_t>();
    s.last_day = j.at("last_day").get<std::int64_t>();
    s.outcome = parse_enum<Outcome>(j.at("outcome"), parse_outcome, "outcome");
    return s;
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
}

std::string snapshot_text(const WorldState& s) { return to_json(s).dump(1); }

std::string snapshot_hash(const WorldState& s) { return sha256_hex(snapshot_text(s)); }

std::string snapshot_file_text(const WorldState& s, const json& session_meta) {
  const std::string body = snapshot_text(s);
  const std::string meta = session_meta.dump();
  // The state text is embedded verbatim after a one-line header so that the
  // checksum covers exactly the bytes on disk.
  json header{{"schema", kSnapshotSchema}, {"sha256", sha256_hex(meta + "\n" + body)}, {"session", session_meta}};
  return header.dump() + "\n" + body + "\n";
}

WorldState parse_snapshot_file(std::string_view text, json* session_meta) {
  const auto newline = text.find('\n');
  if (newline == std::string_view::npos) throw SnapshotError("snapshot: truncated header");
  json header;
  try {
    header = json::parse(text.substr(0, newline));
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot header: ") + e.what());
  }
  if (!header.is_object() || header.value("schema", "") != kSnapshotSchema) {
    throw SnapshotError("snapshot: unsupported schema");
  }
  std::string_view body = text.substr(newline + 1);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  const json meta = header.contains("session") ? header.at("session") : json::object();
  if (sha256_hex(meta.dump() + "\n" + std::string(body)) != header.value("sha256", "")) {
    throw SnapshotError("snapshot: checksum mismatch (file is corrupt or was edited)");
  }
  json state;
  try {
    state = json::parse(body);
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  if (session_meta != nullptr) *session_meta = meta;
  return state_from_json(state);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace ycbench
