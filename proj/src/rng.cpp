#include "ycbench/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ycbench {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

RngStream RngStream::named(std::uint64_t seed, std::string_view name) {
  return RngStream{mix64(mix64(seed + kGolden) ^ fnv1a(name)), 0};
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  const std::uint64_t limit = max() - max() % span;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return lo + static_cast<std::int64_t>(x % span);
}

bool RngStream::bernoulli(double p) { return next_unit() < p; }

double triangular_inverse_cdf(double u, double min, double mode, double max) {
  if (!(min <= mode && mode <= max)) {
    throw std::invalid_argument("triangular parameters must satisfy min <= mode <= max");
  }
  if (max == min) return min;
  const double width = max - min;
  const double split = (mode - min) / width;
  if (u < split) return min + std::sqrt(u * width * (mode - min));
  return max - std::sqrt((1.0 - u) * width * (max - mode));
}

double sample_triangular(RngStream& rng, double min, double mode, double max) {
  if (!(min <= mode && mode <= max)) {
    throw std::invalid_argument("triangular parameters must satisfy min <= mode <= max");
  }
  return triangular_inverse_cdf(rng.next_unit(), min, mode, max);
}

}  // namespace ycbench
