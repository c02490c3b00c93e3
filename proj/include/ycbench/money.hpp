#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ycbench {

/// Signed amount of money in integer cents. All accounting goes through this
/// type so that no floating-point drift can accumulate over a run.
class Money {
public:
  constexpr Money() = default;

  static constexpr Money from_cents(std::int64_t cents) { return Money{cents}; }
  static constexpr Money from_dollars(std::int64_t dollars) { return Money{dollars * 100}; }

  constexpr std::int64_t cents() const { return cents_; }

  /// Multiplies by a real factor, rounding half away from zero to the nearest cent.
  Money scaled(double factor) const;
  /// Multiplies by a real factor, rounding up to the next whole cent.
  Money scaled_up(double factor) const;

  /// "$1,234.56" / "-$12.00"
  std::string to_string() const;

  constexpr Money operator-() const { return Money{-cents_}; }
  constexpr Money& operator+=(Money o) { cents_ += o.cents_; return *this; }
  constexpr Money& operator-=(Money o) { cents_ -= o.cents_; return *this; }
  friend constexpr Money operator+(Money a, Money b) { return Money{a.cents_ + b.cents_}; }
  friend constexpr Money operator-(Money a, Money b) { return Money{a.cents_ - b.cents_}; }
  friend constexpr auto operator<=>(Money, Money) = default;

private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_{0};
};

}  // namespace ycbench
