#include "ycbench/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ycbench/worldgen.hpp"

namespace ycbench {
namespace {

constexpr double kWorkEps = 1e-6;

double round_trust(double v) { return std::round(v * 1e6) / 1e6; }

std::string fmt_double(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt_hours(std::int64_t minutes) { return fmt_double(static_cast<double>(minutes) / 60.0, 1) + "h"; }

TaskRecord& require_active(WorldState& s, std::string_view id) {
  TaskRecord* t = s.find_book_task(id);
  if (t == nullptr) {
    if (s.find_market_task(id) != nullptr) {
      throw SimError("invalid_status", "task " + std::string(id) + " has not been accepted");
    }
    throw SimError("unknown_task", "no task with id " + std::string(id));
  }
  if (!is_active(t->status)) {
    throw SimError("invalid_status", "task " + t->id + " is " + std::string(to_string(t->status)));
  }
  return *t;
}

void require_running(const WorldState& s) {
  if (s.terminated()) throw SimError("episode_over", "the episode has ended (" + std::string(to_string(s.outcome)) + ")");
}

bool work_complete(const TaskRecord& t) {
  for (Domain d : t.domains) {
    if (t.progress[index_of(d)] < static_cast<double>(t.effective_work[index_of(d)]) - kWorkEps) return false;
  }
  return true;
}

void log_event(WorldState& s, std::string kind, std::string subject, std::int64_t amount, std::string detail) {
  s.event_log.push_back(DigestEvent{s.clock.now, std::move(kind), std::move(subject), amount, std::move(detail)});
}

void post(WorldState& s, LedgerKind kind, Money amount, std::string reference) {
  s.ledger.push_back(LedgerEntry{s.clock.now, kind, amount, std::move(reference)});
  s.funds += amount;
}

void drop_task_events(WorldState& s, std::string_view task_id) {
  std::erase_if(s.events, [&](const SimEvent& e) { return e.task_id == task_id; });
}

void shift_prestige(WorldState& s, const TaskRecord& t, double delta) {
  for (Domain d : t.domains) {
    auto& p = s.prestige[index_of(d)];
    p = std::clamp(p + delta, s.config.prestige_min, s.config.prestige_max);
  }
}

void check_bankruptcy(WorldState& s) {
  if (s.funds < Money{} && !s.terminated()) {
    s.outcome = Outcome::bankrupt;
    log_event(s, "bankrupt", "company", s.funds.cents(), "funds fell below zero");
  }
}

Money bump_salary(Money salary, double rate) {
  const std::int64_t ppm = std::llround(rate * 1e6);
  const std::int64_t raise = (salary.cents() * ppm + 999'999) / 1'000'000;
  return salary + Money::from_cents(raise);
}

void start_of_day(WorldState& s, std::int64_t day) {
  if (day <= s.last_day) return;
  const std::int64_t days = day - s.last_day;
  if (s.config.prestige_decay_per_day > 0) {
    for (auto& p : s.prestige) {
      p = std::max(s.config.prestige_min, p - s.config.prestige_decay_per_day * static_cast<double>(days));
    }
  }
  replenish_market(s);
  s.last_day = day;
}

void process_checkpoint(WorldState& s, const SimEvent& ev) {
  TaskRecord* t = s.find_book_task(ev.task_id);
  if (t == nullptr || t->status != TaskStatus::dispatched) return;
  const double target = ev.quarter / 4.0;
  for (Domain d : t->domains) {
    const auto i = index_of(d);
    if (t->progress[i] < target * static_cast<double>(t->effective_work[i]) - kWorkEps) return;
  }
  t->checkpoints_reached = ev.quarter;
  if (ev.quarter < 4) {
    log_event(s, "checkpoint", t->id, 0, std::to_string(ev.quarter * 25) + "% complete");
    return;
  }
  for (Domain d : t->domains) t->progress[index_of(d)] = static_cast<double>(t->effective_work[index_of(d)]);
  complete_task(s, t->id);
}

void process_deadline(WorldState& s, const SimEvent& ev) {
  TaskRecord* t = s.find_book_task(ev.task_id);
  if (t == nullptr || !is_active(t->status)) return;
  if (work_complete(*t)) {
    for (Domain d : t->domains) t->progress[index_of(d)] = static_cast<double>(t->effective_work[index_of(d)]);
    complete_task(s, t->id);
  } else {
    fail_task(s, t->id);
  }
}

void process(WorldState& s, const SimEvent& ev) {
  switch (ev.kind) {
    case EventKind::payroll:
      apply_payroll(s);
      break;
    case EventKind::deadline:
      process_deadline(s, ev);
      break;
    case EventKind::checkpoint:
      process_checkpoint(s, ev);
      break;
    case EventKind::horizon_end:
      s.outcome = Outcome::horizon;
      log_event(s, "horizon_end", "company", s.funds.cents(), "simulation horizon reached");
      break;
  }
}

}  // namespace

double effective_rate(const EmployeeProfile& employee, Domain domain, int active_task_count) {
  if (active_task_count < 1) throw std::invalid_argument("effective_rate: employee has no active tasks");
  return employee.rates[index_of(domain)] / active_task_count;
}

int dispatched_load(const WorldState& state, std::string_view employee_id) {
  int n = 0;
  for (const auto& t : state.book) {
    if (t.status != TaskStatus::dispatched) continue;
    if (std::binary_search(t.assignees.begin(), t.assignees.end(), employee_id)) ++n;
  }
  return n;
}

PerDomain<double> task_throughput(const WorldState& state, const TaskRecord& task) {
  PerDomain<double> out{};
  if (task.status != TaskStatus::dispatched) return out;
  for (const auto& id : task.assignees) {
    const EmployeeProfile* e = state.find_employee(id);
    if (e == nullptr) continue;
    const int load = dispatched_load(state, id);
    for (Domain d : task.domains) out[index_of(d)] += effective_rate(*e, d, load);
  }
  return out;
}

void accrue_work(WorldState& state, SimTime from, SimTime to) {
  const std::int64_t minutes = business_minutes(from, to, state.config.business_hours);
  if (minutes <= 0) return;
  const double hours = static_cast<double>(minutes) / 60.0;
  // Rates for all tasks are taken before any progress is written.
  std::vector<PerDomain<double>> rates;
  rates.reserve(state.book.size());
  for (const auto& t : state.book) rates.push_back(task_throughput(state, t));
  for (std::size_t k = 0; k < state.book.size(); ++k) {
    auto& t = state.book[k];
    if (t.status != TaskStatus::dispatched) continue;
    for (Domain d : t.domains) {
      const auto i = index_of(d);
      t.progress[i] = std::min(t.progress[i] + rates[k][i] * hours, static_cast<double>(t.effective_work[i]));
    }
  }
}

PerDomain<std::int64_t> effective_work_for(const TaskRecord& task, const ClientProfile& client, const BenchConfig& cfg) {
  PerDomain<std::int64_t> out{};
  const double reduction = 1.0 - cfg.trust_work_reduction * std::clamp(client.trust / cfg.trust_max, 0.0, 1.0);
  for (Domain d : task.domains) {
    const double raw = static_cast<double>(task.work[index_of(d)]) * reduction * client.scope_creep_factor;
    out[index_of(d)] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
  }
  return out;
}

int deadline_days(const TaskRecord& task, const BenchConfig& cfg) {
  const std::int64_t total = task.total_work();
  const auto by_qty = (total + cfg.deadline_qty_per_day - 1) / cfg.deadline_qty_per_day;
  return static_cast<int>(std::max<std::int64_t>(cfg.deadline_min_days, by_qty));
}

double payout_multiplier(const WorldState& state, const TaskRecord& task) {
  const auto& cfg = state.config;
  double prestige = 0;
  for (Domain d : task.domains) prestige += state.prestige[index_of(d)];
  prestige /= static_cast<double>(task.domains.size());
  return 1.0 + cfg.reward_scale * (prestige - cfg.prestige_min) / (cfg.prestige_max - cfg.prestige_min);
}

void accept_task(WorldState& state, std::string_view task_id) {
  require_running(state);
  auto it = std::find_if(state.market.begin(), state.market.end(), [&](const TaskRecord& t) { return t.id == task_id; });
  if (it == state.market.end()) {
    if (state.find_book_task(task_id) != nullptr) {
      throw SimError("task_not_in_market", "task " + std::string(task_id) + " is no longer on the market");
    }
    throw SimError("unknown_task", "no task with id " + std::string(task_id));
  }
  for (Domain d : it->domains) {
    const double have = state.prestige[index_of(d)];
    if (have < it->required_prestige - 1e-9) {
      throw SimError("prestige_too_low", "task " + it->id + " requires prestige " + std::to_string(it->required_prestige) +
                                             " in " + std::string(to_string(d)) + " (current " + fmt_double(have) + ")");
    }
  }
  ClientProfile* client = state.find_client(it->client_id);
  if (client == nullptr) throw SimError("unknown_client", "task " + it->id + " references an unknown client");
  if (client->trust < it->required_trust - 1e-9) {
    throw SimError("trust_too_low", "task " + it->id + " requires trust " + std::to_string(it->required_trust) +
                                        " with " + client->id + " (current " + fmt_double(client->trust) + ")");
  }

  TaskRecord task = std::move(*it);
  state.market.erase(it);
  task.effective_work = effective_work_for(task, *client, state.config);
  task.status = TaskStatus::accepted;
  task.accepted_at = state.clock.now;
  task.deadline = add_days(state.clock.now, deadline_days(task, state.config));
  state.events.insert(SimEvent{*task.deadline, EventKind::deadline, task.id, 0});
  state.book.push_back(std::move(task));
}

void assign(WorldState& state, std::string_view task_id, std::vector<std::string> employee_ids) {
  require_running(state);
  TaskRecord& t = require_active(state, task_id);
  for (const auto& id : employee_ids) {
    if (state.find_employee(id) == nullptr) throw SimError("unknown_employee", "no employee with id " + id);
  }
  std::sort(employee_ids.begin(), employee_ids.end());
  employee_ids.erase(std::unique(employee_ids.begin(), employee_ids.end()), employee_ids.end());
  t.assignees = std::move(employee_ids);
  reschedule_checkpoints(state);
}

void dispatch(WorldState& state, std::string_view task_id) {
  require_running(state);
  TaskRecord& t = require_active(state, task_id);
  if (t.status == TaskStatus::dispatched) throw SimError("invalid_status", "task " + t.id + " is already dispatched");
  if (t.assignees.empty()) throw SimError("no_assignees", "task " + t.id + " has no assigned employees");
  t.status = TaskStatus::dispatched;
  t.dispatched_at = state.clock.now;
  reschedule_checkpoints(state);
}

void cancel_task(WorldState& state, std::string_view task_id, std::string reason) {
  require_running(state);
  TaskRecord& t = require_active(state, task_id);
  t.status = TaskStatus::cancelled;
  t.finished_at = state.clock.now;
  t.cancel_reason = std::move(reason);
  shift_prestige(state, t, -state.config.cancel_penalty_factor * state.config.prestige_delta);
  drop_task_events(state, t.id);
  reschedule_checkpoints(state);
}

void complete_task(WorldState& state, std::string_view task_id) {
  TaskRecord* tp = state.find_book_task(task_id);
  if (tp == nullptr || !is_active(tp->status) || !work_complete(*tp)) {
    throw SimError("internal", "complete_task called on unfinished task " + std::string(task_id));
  }
  TaskRecord& t = *tp;
  const auto& cfg = state.config;

  const Money payout = t.reward.scaled(payout_multiplier(state, t));
  post(state, LedgerKind::task_reward, payout, t.id);
  shift_prestige(state, t, cfg.prestige_delta);

  for (auto& c : state.clients) {
    if (c.id == t.client_id) {
      c.trust = round_trust(std::min(cfg.trust_max, c.trust + cfg.trust_max / cfg.trust_build_rate));
      ++c.completions;
      c.history.push_back(ClientOutcome{t.id, true, state.clock.now});
    } else {
      c.trust = round_trust(std::max(0.0, c.trust - cfg.focus_pressure));
    }
  }

  t.status = TaskStatus::completed;
  t.finished_at = state.clock.now;
  t.checkpoints_reached = 4;
  drop_task_events(state, t.id);

  const std::int64_t margin = t.deadline->minutes - state.clock.now.minutes;
  log_event(state, "task_completed", t.id, payout.cents(),
            "client " + t.client_id + ", finished " + fmt_hours(margin) + " before deadline");

  for (const auto& id : t.assignees) {
    EmployeeProfile* e = state.find_employee(id);
    e->monthly_salary = bump_salary(e->monthly_salary, cfg.salary_bump_rate);
    for (Domain d : t.domains) {
      auto& r = e->rates[index_of(d)];
      r = std::min(cfg.rate_cap, r * (1.0 + cfg.productivity_boost_rate));
    }
    log_event(state, "salary_bump", e->id, e->monthly_salary.cents(), "new monthly salary");
  }
}

void fail_task(WorldState& state, std::string_view task_id) {
  TaskRecord* tp = state.find_book_task(task_id);
  if (tp == nullptr || !is_active(tp->status)) {
    throw SimError("internal", "fail_task called on inactive task " + std::string(task_id));
  }
  TaskRecord& t = *tp;
  const auto& cfg = state.config;

  const Money penalty = t.reward.scaled(cfg.fail_penalty_rate);
  post(state, LedgerKind::failure_penalty, -penalty, t.id);
  shift_prestige(state, t, -cfg.prestige_delta);
  if (ClientProfile* c = state.find_client(t.client_id)) {
    ++c->failures;
    c->history.push_back(ClientOutcome{t.id, false, state.clock.now});
    if (cfg.failure_decays_trust) c->trust = round_trust(std::max(0.0, c->trust - cfg.focus_pressure));
  }
  t.status = TaskStatus::failed;
  t.finished_at = state.clock.now;
  drop_task_events(state, t.id);

  const double done = std::clamp(t.completion_fraction(), 0.0, 1.0);
  log_event(state, "task_failed", t.id, -penalty.cents(),
            "client " + t.client_id + ", missed deadline at " + fmt_double(done * 100.0, 1) + "% complete");
  check_bankruptcy(state);
}

void apply_payroll(WorldState& state) {
  const Money total = monthly_payroll(state);
  const std::string month = format_month(state.clock.now);
  post(state, LedgerKind::payroll, -total, month);
  log_event(state, "payroll", month, -total.cents(), "monthly payroll deducted");
  state.events.insert(
      SimEvent{next_payroll_after(state.clock.now, state.config.business_hours), EventKind::payroll, "", 0});
  check_bankruptcy(state);
}

std::optional<SimTime> next_checkpoint_time(const WorldState& state, const TaskRecord& task) {
  if (task.status != TaskStatus::dispatched || task.checkpoints_reached >= 4) return std::nullopt;
  const auto rates = task_throughput(state, task);
  const double target = (task.checkpoints_reached + 1) / 4.0;
  std::int64_t minutes = 0;
  for (Domain d : task.domains) {
    const auto i = index_of(d);
    const double remaining = target * static_cast<double>(task.effective_work[i]) - task.progress[i];
    if (remaining <= kWorkEps) continue;
    if (rates[i] <= 0) return std::nullopt;
    const double exact = remaining / rates[i] * 60.0;
    minutes = std::max(minutes, static_cast<std::int64_t>(std::ceil(exact - 1e-7)));
  }
  return add_business_minutes(state.clock.now, minutes, state.config.business_hours);
}

void reschedule_checkpoints(WorldState& state) {
  std::erase_if(state.events, [](const SimEvent& e) { return e.kind == EventKind::checkpoint; });
  for (auto& t : state.book) {
    if (t.status != TaskStatus::dispatched) continue;
    for (const auto& id : t.assignees) t.max_split = std::max(t.max_split, dispatched_load(state, id));
    if (auto at = next_checkpoint_time(state, t)) {
      state.events.insert(SimEvent{*at, EventKind::checkpoint, t.id, t.checkpoints_reached + 1});
    }
  }
}

std::vector<DigestEvent> resume(WorldState& state) {
  require_running(state);
  if (state.events.empty()) throw SimError("internal", "no pending events");
  const std::size_t digest_start = state.event_log.size();

  const SimEvent first = *state.events.begin();
  state.events.erase(state.events.begin());
  accrue_work(state, state.clock.now, first.at);
  state.clock.now = first.at;
  start_of_day(state, day_index(state.clock.now));
  process(state, first);
  reschedule_checkpoints(state);

  while (!state.terminated() && !state.events.empty() && state.events.begin()->at == state.clock.now) {
    const SimEvent ev = *state.events.begin();
    state.events.erase(state.events.begin());
    process(state, ev);
    reschedule_checkpoints(state);
  }
  return {state.event_log.begin() + static_cast<std::ptrdiff_t>(digest_start), state.event_log.end()};
}

}  // namespace ycbench
