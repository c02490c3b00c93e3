#include "ycbench/clock.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace ycbench {
namespace {

namespace chr = std::chrono;

// 1970-01-05 was a Monday; weekday arithmetic is done relative to it.
constexpr std::int64_t kMondayEpochDay = 4;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

chr::year_month_day to_ymd(std::int64_t day) {
  return chr::year_month_day{chr::sys_days{chr::days{day}}};
}

std::int64_t from_ymd(const chr::year_month_day& ymd) {
  return chr::sys_days{ymd}.time_since_epoch().count();
}

// Weekdays strictly before `day`, counted from the reference Monday.
std::int64_t weekdays_before(std::int64_t day) {
  const std::int64_t rel = day - kMondayEpochDay;
  return 5 * floor_div(rel, 7) + std::min<std::int64_t>(floor_mod(rel, 7), 5);
}

std::int64_t nth_weekday(std::int64_t n) {
  return kMondayEpochDay + 7 * floor_div(n, 5) + floor_mod(n, 5);
}

// Cumulative business minutes from the reference Monday up to t.
std::int64_t cumulative(SimTime t, const BusinessHours& hours) {
  const std::int64_t day = floor_div(t.minutes, kMinutesPerDay);
  const std::int64_t in_day = t.minutes - day * kMinutesPerDay;
  std::int64_t partial = 0;
  if (is_weekday(day)) {
    const std::int64_t start = hours.start_hour * 60;
    const std::int64_t end = hours.end_hour * 60;
    partial = std::clamp(in_day, start, end) - start;
  }
  return weekdays_before(day) * hours.minutes_per_day() + partial;
}

}  // namespace

SimTime make_time(int year, unsigned month, unsigned day, int hour, int minute) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return SimTime{from_ymd(ymd) * kMinutesPerDay + hour * 60 + minute};
}

SimTime add_days(SimTime t, std::int64_t days) { return SimTime{t.minutes + days * kMinutesPerDay}; }

SimTime add_years(SimTime t, int years) {
  const std::int64_t day = day_index(t);
  const std::int64_t rest = t.minutes - day * kMinutesPerDay;
  auto ymd = to_ymd(day) + chr::years{years};
  if (!ymd.ok()) ymd = ymd.year() / ymd.month() / chr::last;
  return SimTime{from_ymd(ymd) * kMinutesPerDay + rest};
}

std::int64_t day_index(SimTime t) { return floor_div(t.minutes, kMinutesPerDay); }

bool is_weekday(std::int64_t day) { return floor_mod(day - kMondayEpochDay, 7) < 5; }

int iso_weekday(SimTime t) {
  return static_cast<int>(floor_mod(day_index(t) - kMondayEpochDay, 7)) + 1;
}

std::string format_time(SimTime t) {
  const std::int64_t day = day_index(t);
  const std::int64_t rest = t.minutes - day * kMinutesPerDay;
  const auto ymd = to_ymd(day);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rest / 60),
                static_cast<int>(rest % 60));
  return buf;
}

SimTime parse_time(std::string_view text) {
  int y = 0, hh = 0, mm = 0;
  unsigned mo = 0, d = 0;
  char tail = 0;
  const std::string s{text};
  if (std::sscanf(s.c_str(), "%d-%u-%u %d:%d%c", &y, &mo, &d, &hh, &mm, &tail) != 5 || hh < 0 ||
      hh > 23 || mm < 0 || mm > 59) {
    throw std::invalid_argument("malformed timestamp: " + s);
  }
  return make_time(y, mo, d, hh, mm);
}

std::string format_month(SimTime t) { return format_time(t).substr(0, 7); }

SimTime first_monday(int year, const BusinessHours& hours) {
  std::int64_t day = from_ymd(chr::year{year} / chr::January / 1);
  while (floor_mod(day - kMondayEpochDay, 7) != 0) ++day;
  return SimTime{day * kMinutesPerDay + hours.start_hour * 60};
}

std::int64_t business_minutes(SimTime from, SimTime to, const BusinessHours& hours) {
  if (to <= from) return 0;
  return cumulative(to, hours) - cumulative(from, hours);
}

SimTime add_business_minutes(SimTime from, std::int64_t minutes, const BusinessHours& hours) {
  if (minutes <= 0) return from;
  const std::int64_t per_day = hours.minutes_per_day();
  const std::int64_t target = cumulative(from, hours) + minutes;
  const std::int64_t full = floor_div(target, per_day);
  const std::int64_t rem = target - full * per_day;
  if (rem == 0) {
    // Exactly at the close of business of weekday number full-1.
    return SimTime{nth_weekday(full - 1) * kMinutesPerDay + hours.end_hour * 60};
  }
  return SimTime{nth_weekday(full) * kMinutesPerDay + hours.start_hour * 60 + rem};
}

SimTime payroll_time_for_month(SimTime t, const BusinessHours& hours) {
  const auto ymd = to_ymd(day_index(t));
  std::int64_t day = from_ymd(ymd.year() / ymd.month() / 1);
  while (!is_weekday(day)) ++day;
  return SimTime{day * kMinutesPerDay + hours.start_hour * 60};
}

SimTime next_payroll_after(SimTime t, const BusinessHours& hours) {
  const SimTime this_month = payroll_time_for_month(t, hours);
  if (this_month > t) return this_month;
  const auto ymd = to_ymd(day_index(t));
  const auto next = chr::year_month_day{ymd.year() / ymd.month() / 1} + chr::months{1};
  return payroll_time_for_month(SimTime{from_ymd(next) * kMinutesPerDay}, hours);
}

}  // namespace ycbench
