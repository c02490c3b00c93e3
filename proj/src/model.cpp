#include "ycbench/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ycbench {
namespace {

constexpr double kEps = 1e-9;

template <typename Enum, std::size_t N>
std::optional<Enum> parse_by_names(std::string_view s, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 4> kDomainNames{"training", "inference", "research",
                                                       "data_engineering"};
constexpr std::array<std::string_view, 3> kTierNames{"junior", "mid", "senior"};
constexpr std::array<std::string_view, 6> kStatusNames{"market",    "accepted", "dispatched",
                                                       "completed", "failed",   "cancelled"};
constexpr std::array<std::string_view, 4> kLedgerNames{"initial_capital", "task_reward",
                                                       "failure_penalty", "payroll"};
constexpr std::array<std::string_view, 4> kEventNames{"payroll", "deadline", "checkpoint",
                                                      "horizon_end"};
constexpr std::array<std::string_view, 3> kOutcomeNames{"running", "horizon", "bankrupt"};

template <typename T>
auto find_by_id(T& items, std::string_view id) -> decltype(&items.front()) {
  for (auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(Domain d) { return kDomainNames[index_of(d)]; }

std::optional<Domain> parse_domain(std::string_view s) {
  if (s == "data-engineering") return Domain::data_engineering;
  return parse_by_names<Domain>(s, kDomainNames);
}

std::string_view to_string(Tier t) { return kTierNames[static_cast<std::size_t>(t)]; }
std::optional<Tier> parse_tier(std::string_view s) { return parse_by_names<Tier>(s, kTierNames); }

std::string_view to_string(TaskStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }
std::optional<TaskStatus> parse_task_status(std::string_view s) {
  return parse_by_names<TaskStatus>(s, kStatusNames);
}
bool is_active(TaskStatus s) { return s == TaskStatus::accepted || s == TaskStatus::dispatched; }

std::string_view to_string(LedgerKind k) { return kLedgerNames[static_cast<std::size_t>(k)]; }
std::optional<LedgerKind> parse_ledger_kind(std::string_view s) {
  return parse_by_names<LedgerKind>(s, kLedgerNames);
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }
std::optional<EventKind> parse_event_kind(std::string_view s) {
  return parse_by_names<EventKind>(s, kEventNames);
}

std::string_view to_string(Outcome o) { return kOutcomeNames[static_cast<std::size_t>(o)]; }
std::optional<Outcome> parse_outcome(std::string_view s) { return parse_by_names<Outcome>(s, kOutcomeNames); }

std::int64_t TaskRecord::total_work() const {
  std::int64_t total = 0;
  for (Domain d : domains) total += work[index_of(d)];
  return total;
}

double TaskRecord::completion_fraction() const {
  double frac = 1.0;
  for (Domain d : domains) {
    const auto need = effective_work[index_of(d)];
    if (need > 0) frac = std::min(frac, progress[index_of(d)] / static_cast<double>(need));
  }
  return frac;
}

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  return RngStreams{RngStream::named(seed, "roster"), RngStream::named(seed, "clients"),
                    RngStream::named(seed, "market"), RngStream::named(seed, "adversary")};
}

const EmployeeProfile* WorldState::find_employee(std::string_view id) const { return find_by_id(roster, id); }
EmployeeProfile* WorldState::find_employee(std::string_view id) { return find_by_id(roster, id); }
const ClientProfile* WorldState::find_client(std::string_view id) const { return find_by_id(clients, id); }
ClientProfile* WorldState::find_client(std::string_view id) { return find_by_id(clients, id); }
const TaskRecord* WorldState::find_market_task(std::string_view id) const { return find_by_id(market, id); }
const TaskRecord* WorldState::find_book_task(std::string_view id) const { return find_by_id(book, id); }
TaskRecord* WorldState::find_book_task(std::string_view id) { return find_by_id(book, id); }

Money funds_from_ledger(const std::vector<LedgerEntry>& ledger) {
  if (ledger.empty() || ledger.front().kind != LedgerKind::initial_capital) {
    throw std::invalid_argument("ledger must begin with an initial_capital entry");
  }
  Money total;
  for (const auto& e : ledger) total += e.amount;
  return total;
}

Money monthly_payroll(const WorldState& state) {
  Money total;
  for (const auto& e : state.roster) total += e.monthly_salary;
  return total;
}

int active_task_count(const WorldState& state) {
  return static_cast<int>(std::count_if(state.book.begin(), state.book.end(),
                                        [](const TaskRecord& t) { return is_active(t.status); }));
}

std::vector<std::string> validate(const WorldState& s) {
  std::vector<std::string> out;
  const auto& cfg = s.config;
  auto fail = [&](std::string msg) { out.push_back(std::move(msg)); };

  // accounting
  if (s.ledger.empty() || s.ledger.front().kind != LedgerKind::initial_capital) {
    fail("ledger: missing initial_capital entry");
  } else if (funds_from_ledger(s.ledger) != s.funds) {
    fail("funds " + s.funds.to_string() + " differ from ledger sum " + funds_from_ledger(s.ledger).to_string());
  }
  if (s.funds < Money{} && s.outcome != Outcome::bankrupt) fail("funds negative without bankruptcy");

  // clock
  if (s.clock.now < s.clock.start) fail("clock: timestamp before episode start");
  if (s.clock.now > s.clock.horizon_end) fail("clock: timestamp past horizon end");

  // roster
  if (static_cast<int>(s.roster.size()) != cfg.employees) {
    fail("roster: size " + std::to_string(s.roster.size()) + " != " + std::to_string(cfg.employees));
  }
  std::unordered_set<std::string> employee_ids;
  for (const auto& e : s.roster) {
    if (!employee_ids.insert(e.id).second) fail("employee " + e.id + ": duplicate id");
    if (e.monthly_salary <= Money{}) fail("employee " + e.id + ": non-positive salary");
    for (Domain d : kAllDomains) {
      const double r = e.rates[index_of(d)];
      if (!(r >= cfg.rate_floor - kEps && r <= cfg.rate_cap + kEps)) {
        fail("employee " + e.id + ": rate " + std::to_string(r) + " outside [floor, cap] in " +
             std::string(to_string(d)));
      }
    }
  }

  // clients
  std::unordered_set<std::string> client_ids;
  for (const auto& c : s.clients) {
    if (!client_ids.insert(c.id).second) fail("client " + c.id + ": duplicate id");
    if (!(c.trust >= -kEps && c.trust <= cfg.trust_max + kEps)) {
      fail("client " + c.id + ": trust " + std::to_string(c.trust) + " outside [0, max]");
    }
    if (c.adversarial ? c.scope_creep_factor < cfg.scope_creep_floor - kEps : c.scope_creep_factor != 1.0) {
      fail("client " + c.id + ": inconsistent work inflation");
    }
    if (c.completions < 0 || c.failures < 0) fail("client " + c.id + ": negative outcome count");
  }

  // prestige
  for (Domain d : kAllDomains) {
    const double p = s.prestige[index_of(d)];
    if (!(p >= cfg.prestige_min - kEps && p <= cfg.prestige_max + kEps)) {
      fail("prestige " + std::string(to_string(d)) + " outside range");
    }
  }

  // tasks
  std::unordered_set<std::string> task_ids;
  auto check_task = [&](const TaskRecord& t, bool in_market) {
    const std::string tag = "task " + t.id;
    if (!task_ids.insert(t.id).second) fail(tag + ": duplicate id");
    if (!client_ids.contains(t.client_id)) fail(tag + ": unknown client " + t.client_id);
    if (t.domains.empty()) fail(tag + ": no domains");
    if (in_market != (t.status == TaskStatus::market)) fail(tag + ": status inconsistent with container");
    const bool has_dates = t.accepted_at.has_value() && t.deadline.has_value();
    const bool no_dates = !t.accepted_at.has_value() && !t.deadline.has_value();
    if (t.status == TaskStatus::market ? !no_dates : !has_dates) {
      fail(tag + ": acceptance time / deadline inconsistent with status");
    }
    for (Domain d : kAllDomains) {
      const auto i = index_of(d);
      if (t.progress[i] < -kEps) fail(tag + ": negative progress");
      if (t.progress[i] > static_cast<double>(t.effective_work[i]) + 1e-6) {
        fail(tag + ": progress exceeds effective work in " + std::string(to_string(d)));
      }
    }
    for (const auto& a : t.assignees) {
      if (!employee_ids.contains(a)) fail(tag + ": unknown assignee " + a);
    }
    if (t.required_prestige < 1 || t.required_prestige > 10) fail(tag + ": required prestige outside 1..10");
    if (t.required_trust < 0) fail(tag + ": negative trust requirement");
  };
  for (const auto& t : s.market) check_task(t, true);
  for (const auto& t : s.book) check_task(t, false);

  // events
  for (const auto& ev : s.events) {
    if (ev.at < s.clock.now) fail("event " + std::string(to_string(ev.kind)) + " scheduled in the past");
    if (ev.kind == EventKind::deadline || ev.kind == EventKind::checkpoint) {
      const TaskRecord* t = s.find_book_task(ev.task_id);
      if (t == nullptr || !is_active(t->status)) fail("event for inactive task " + ev.task_id);
    }
  }
  return out;
}

}  // namespace ycbench
