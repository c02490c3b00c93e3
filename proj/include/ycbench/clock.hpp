#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ycbench {

/// Absolute simulated time, in whole minutes since 1970-01-01 00:00.
struct SimTime {
  std::int64_t minutes{0};

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
};

inline constexpr std::int64_t kMinutesPerDay = 24 * 60;

struct BusinessHours {
  int start_hour{9};
  int end_hour{18};

  constexpr std::int64_t minutes_per_day() const { return (end_hour - start_hour) * 60; }
  friend constexpr bool operator==(BusinessHours, BusinessHours) = default;
};

SimTime make_time(int year, unsigned month, unsigned day, int hour = 0, int minute = 0);
SimTime add_days(SimTime t, std::int64_t days);
SimTime add_years(SimTime t, int years);

/// Day number since the epoch (floor).
std::int64_t day_index(SimTime t);
bool is_weekday(std::int64_t day);
/// 1-based weekday, Monday = 1 ... Sunday = 7.
int iso_weekday(SimTime t);

/// "2025-01-06 09:00"
std::string format_time(SimTime t);
/// Inverse of format_time; throws std::invalid_argument on malformed input.
SimTime parse_time(std::string_view text);
/// "2025-02"
std::string format_month(SimTime t);

/// First Monday of `year` at the start of business.
SimTime first_monday(int year, const BusinessHours& hours);

/// Business minutes (weekday minutes inside [start_hour, end_hour)) in [from, to).
std::int64_t business_minutes(SimTime from, SimTime to, const BusinessHours& hours);

/// Earliest instant t >= from such that business_minutes(from, t) == minutes.
SimTime add_business_minutes(SimTime from, std::int64_t minutes, const BusinessHours& hours);

/// Payroll instant (first weekday, start of business) of the month containing t.
SimTime payroll_time_for_month(SimTime t, const BusinessHours& hours);
/// First payroll instant strictly after t.
SimTime next_payroll_after(SimTime t, const BusinessHours& hours);

}  // namespace ycbench
