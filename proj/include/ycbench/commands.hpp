#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ycbench/model.hpp"

namespace ycbench {

enum class Verb : std::uint8_t {
  company_status,
  employee_list,
  market_browse,
  task_list,
  task_inspect,
  client_list,
  client_history,
  finance_ledger,
  task_accept,
  task_assign,
  task_dispatch,
  task_cancel,
  sim_resume,
  scratchpad_write,
  scratchpad_append,
};

/// "task accept", "sim resume", ...
std::string_view verb_text(Verb v);
/// Observe commands never mutate the world.
bool is_observe(Verb v);
std::span<const Verb> all_verbs();

struct Command {
  Verb verb{Verb::company_status};
  std::optional<std::string> task_id;
  std::vector<std::string> employees;
  std::optional<Domain> domain;
  std::optional<std::int64_t> reward_min_cents;
  std::optional<int> limit;
  std::optional<TaskStatus> status;
  std::optional<std::string> reason;
  std::optional<std::string> content;

  friend bool operator==(const Command&, const Command&) = default;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

/// Shell-style word splitting: whitespace separated, single and double quotes,
/// backslash escapes inside double quotes and bare words.
std::vector<std::string> tokenize(std::string_view line);

/// Parses one agent command. A leading "yc-bench" token is optional.
Command parse_command(std::span<const std::string> tokens);
Command parse_command(std::string_view line);

/// Canonical text form (without the program name); reparses to the same command.
std::string format_command(const Command& cmd);

struct CommandResult {
  bool ok{true};
  nlohmann::json payload;
  std::string error_code;
  std::string error_message;

  static CommandResult success(nlohmann::json payload);
  static CommandResult failure(std::string code, std::string message);

  nlohmann::json to_json() const;
  /// Single-line structured document with stable key order.
  std::string to_text() const;
};

struct StatusObservation {
  SimTime timestamp;
  Money funds;
  Money monthly_payroll;
  std::optional<double> runway_months;  // empty when payroll is zero
  int active_tasks{0};
  Outcome outcome{Outcome::running};
  std::vector<DigestEvent> events;

  nlohmann::json to_json() const;
};

/// Observable status fields plus the pending event digest; does not clear it.
StatusObservation peek_status(const WorldState& state);
/// Same as peek_status, then clears the digest buffer.
StatusObservation render_status(WorldState& state);

/// Scratchpad edits. Throw SimError("scratchpad_too_large") past the cap.
void scratchpad_write(std::string& pad, std::string_view content, std::size_t cap);
void scratchpad_append(std::string& pad, std::string_view content, std::size_t cap);

/// Runs one parsed command. Engine rejections come back as error results.
CommandResult execute(WorldState& state, std::string& scratchpad, const Command& cmd);
/// Parse + execute; parse errors also come back as error results.
CommandResult execute_line(WorldState& state, std::string& scratchpad, std::string_view line);

/// Observable view of a market task (used by browse and the baseline agent).
nlohmann::json market_task_view(const WorldState& state, const TaskRecord& task);

}  // namespace ycbench
