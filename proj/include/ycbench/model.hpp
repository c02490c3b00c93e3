#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ycbench/clock.hpp"
#include "ycbench/config.hpp"
#include "ycbench/money.hpp"
#include "ycbench/rng.hpp"

namespace ycbench {

enum class Domain : std::uint8_t { training, inference, research, data_engineering };

inline constexpr std::size_t kDomainCount = 4;
inline constexpr std::array<Domain, kDomainCount> kAllDomains{
    Domain::training, Domain::inference, Domain::research, Domain::data_engineering};

template <typename T>
using PerDomain = std::array<T, kDomainCount>;

constexpr std::size_t index_of(Domain d) { return static_cast<std::size_t>(d); }
std::string_view to_string(Domain d);
/// Accepts "data_engineering" and "data-engineering".
std::optional<Domain> parse_domain(std::string_view s);

enum class Tier : std::uint8_t { junior, mid, senior };
std::string_view to_string(Tier t);
std::optional<Tier> parse_tier(std::string_view s);

struct EmployeeProfile {
  std::string id;
  Tier tier{Tier::junior};
  Money monthly_salary;
  PerDomain<double> rates{};

  friend bool operator==(const EmployeeProfile&, const EmployeeProfile&) = default;
};

struct ClientOutcome {
  std::string task_id;
  bool success{false};
  SimTime at;

  friend bool operator==(const ClientOutcome&, const ClientOutcome&) = default;
};

struct ClientProfile {
  std::string id;
  double trust{0};
  // Hidden: never rendered into any observation.
  bool adversarial{false};
  double scope_creep_factor{1.0};
  int completions{0};
  int failures{0};
  std::vector<ClientOutcome> history;

  friend bool operator==(const ClientProfile&, const ClientProfile&) = default;
};

enum class TaskStatus : std::uint8_t { market, accepted, dispatched, completed, failed, cancelled };
std::string_view to_string(TaskStatus s);
std::optional<TaskStatus> parse_task_status(std::string_view s);
/// accepted or dispatched
bool is_active(TaskStatus s);

struct TaskRecord {
  std::string id;
  std::string client_id;
  std::vector<Domain> domains;          // sorted, non-empty
  PerDomain<std::int64_t> work{};       // advertised units
  PerDomain<std::int64_t> effective_work{};
  PerDomain<double> progress{};
  Money reward;                         // advertised
  int required_prestige{1};
  int required_trust{0};
  TaskStatus status{TaskStatus::market};
  std::optional<SimTime> accepted_at;
  std::optional<SimTime> deadline;
  std::optional<SimTime> dispatched_at;
  std::optional<SimTime> finished_at;
  std::vector<std::string> assignees;   // sorted, unique
  int checkpoints_reached{0};           // quarters of effective work crossed (0..4)
  int max_split{0};                     // largest rate divisor seen on any assignee while dispatched
  std::string cancel_reason;

  std::int64_t total_work() const;
  /// min over the task's domains of progress / effective_work
  double completion_fraction() const;

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

enum class LedgerKind : std::uint8_t { initial_capital, task_reward, failure_penalty, payroll };
std::string_view to_string(LedgerKind k);
std::optional<LedgerKind> parse_ledger_kind(std::string_view s);

struct LedgerEntry {
  SimTime at;
  LedgerKind kind{LedgerKind::initial_capital};
  Money amount;
  std::string reference;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Kind order doubles as the tie-break priority for simultaneous events.
enum class EventKind : std::uint8_t { payroll, deadline, checkpoint, horizon_end };
std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct SimEvent {
  SimTime at;
  EventKind kind{EventKind::payroll};
  std::string task_id;  // deadline / checkpoint
  int quarter{0};       // checkpoint: 1..4 (25%..100%)

  friend auto operator<=>(const SimEvent&, const SimEvent&) = default;
};

/// One human-readable record of something that happened since the last observation.
struct DigestEvent {
  SimTime at;
  std::string kind;      // task_completed, task_failed, checkpoint, salary_bump, payroll, ...
  std::string subject;   // task or employee id, or month
  std::int64_t amount_cents{0};
  std::string detail;

  friend bool operator==(const DigestEvent&, const DigestEvent&) = default;
};

enum class Outcome : std::uint8_t { running, horizon, bankrupt };
std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct SimClock {
  SimTime now;
  SimTime start;
  SimTime horizon_end;

  friend bool operator==(const SimClock&, const SimClock&) = default;
};

/// Named random streams, one per concern.
struct RngStreams {
  RngStream roster;
  RngStream clients;
  RngStream market;
  RngStream adversary;

  static RngStreams from_seed(std::uint64_t seed);
  friend bool operator==(const RngStreams&, const RngStreams&) = default;
};

/// The complete hidden state of one episode.
struct WorldState {
  std::uint64_t seed{0};
  BenchConfig config;
  SimClock clock;
  Money funds;
  std::vector<EmployeeProfile> roster;
  std::vector<ClientProfile> clients;
  std::vector<TaskRecord> market;
  std::vector<TaskRecord> book;  // accepted or later, in acceptance order
  PerDomain<double> prestige{};
  std::vector<LedgerEntry> ledger;
  std::set<SimEvent> events;
  RngStreams rng;
  std::vector<DigestEvent> event_log;
  std::int64_t next_task_serial{1};
  std::int64_t last_day{0};
  Outcome outcome{Outcome::running};

  bool terminated() const { return outcome != Outcome::running; }

  const EmployeeProfile* find_employee(std::string_view id) const;
  EmployeeProfile* find_employee(std::string_view id);
  const ClientProfile* find_client(std::string_view id) const;
  ClientProfile* find_client(std::string_view id);
  const TaskRecord* find_market_task(std::string_view id) const;
  const TaskRecord* find_book_task(std::string_view id) const;
  TaskRecord* find_book_task(std::string_view id);

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Checks every structural invariant; returns one description per violation.
std::vector<std::string> validate(const WorldState& state);

/// Exact sum of the ledger. Throws std::invalid_argument unless the first entry
/// is the initial capital injection.
Money funds_from_ledger(const std::vector<LedgerEntry>& ledger);

Money monthly_payroll(const WorldState& state);
int active_task_count(const WorldState& state);

}  // namespace ycbench
