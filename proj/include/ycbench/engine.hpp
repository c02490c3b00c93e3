#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ycbench/model.hpp"

namespace ycbench {

/// A rejected command or an invalid transition. `code` is machine readable
/// (e.g. "prestige_too_low"); the message never mentions hidden client fields.
class SimError : public std::runtime_error {
public:
  SimError(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

/// rate / active_task_count. Throws std::invalid_argument when the count is < 1.
double effective_rate(const EmployeeProfile& employee, Domain domain, int active_task_count);

/// Number of dispatched tasks each employee is currently assigned to.
int dispatched_load(const WorldState& state, std::string_view employee_id);

/// Combined units-per-hour a task receives in each domain right now
/// (zero unless dispatched).
PerDomain<double> task_throughput(const WorldState& state, const TaskRecord& task);

/// Adds the work done by every dispatched task over the business minutes in [from, to).
void accrue_work(WorldState& state, SimTime from, SimTime to);

/// Effective work after trust reduction and work inflation, rounded up per domain.
PerDomain<std::int64_t> effective_work_for(const TaskRecord& task, const ClientProfile& client, const BenchConfig& cfg);
/// max(min_days, ceil(advertised work / qty_per_day)) calendar days.
int deadline_days(const TaskRecord& task, const BenchConfig& cfg);
/// Multiplier applied to the advertised reward at payout.
double payout_multiplier(const WorldState& state, const TaskRecord& task);

void accept_task(WorldState& state, std::string_view task_id);
void assign(WorldState& state, std::string_view task_id, std::vector<std::string> employee_ids);
void dispatch(WorldState& state, std::string_view task_id);
void cancel_task(WorldState& state, std::string_view task_id, std::string reason);

// Event handlers; invoked from resume, public for focused tests.
void complete_task(WorldState& state, std::string_view task_id);
void fail_task(WorldState& state, std::string_view task_id);
void apply_payroll(WorldState& state);

/// Instant the task crosses its next 25% checkpoint at current rates, if it ever will.
std::optional<SimTime> next_checkpoint_time(const WorldState& state, const TaskRecord& task);
/// Drops every pending checkpoint and recomputes them from the current assignments.
void reschedule_checkpoints(WorldState& state);

/// Advances to the next scheduled event (and any others at the same instant),
/// processing each. Returns the digest entries produced by this call.
std::vector<DigestEvent> resume(WorldState& state);

}  // namespace ycbench
