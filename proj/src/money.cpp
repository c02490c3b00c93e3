#include "ycbench/money.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ycbench {

Money Money::scaled(double factor) const {
  return Money{std::llround(static_cast<double>(cents_) * factor)};
}

Money Money::scaled_up(double factor) const {
  // The product of an integer and a decimal factor is rarely exact in binary;
  // shave a relative epsilon so that 300000 * 1.01 stays 303000.
  const double raw = static_cast<double>(cents_) * factor;
  const double tol = 1e-9 * std::max(1.0, std::fabs(raw));
  return Money{static_cast<std::int64_t>(std::ceil(raw - tol))};
}

std::string Money::to_string() const {
  const std::int64_t abs_cents = cents_ < 0 ? -cents_ : cents_;
  std::string whole = std::to_string(abs_cents / 100);
  for (int pos = static_cast<int>(whole.size()) - 3; pos > 0; pos -= 3) {
    whole.insert(static_cast<std::size_t>(pos), ",");
  }
  const std::int64_t frac = abs_cents % 100;
  std::string out = cents_ < 0 ? "-$" : "$";
  out += whole;
  out += '.';
  out += static_cast<char>('0' + frac / 10);
  out += static_cast<char>('0' + frac % 10);
  return out;
}

}  // namespace ycbench
