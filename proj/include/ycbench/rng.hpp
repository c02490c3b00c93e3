#pragma once

#include <cstdint>
#include <string_view>

namespace ycbench {

/// Counter-based deterministic random stream. The whole state is (key, counter),
/// so a stream serializes to two integers and resumes exactly where it stopped.
/// Draw i is splitmix64(key + i * golden), a bijective mix with good avalanche.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream() = default;
  RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  /// Stream keyed by (seed, name); distinct names give independent sequences.
  static RngStream named(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit();
  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

private:
  std::uint64_t key_{0};
  std::uint64_t counter_{0};
};

/// Inverse-CDF draw from the triangular distribution with the given min, mode and
/// max. Throws std::invalid_argument unless min <= mode <= max.
double sample_triangular(RngStream& rng, double min, double mode, double max);
/// Deterministic transform used by sample_triangular, exposed for testing.
double triangular_inverse_cdf(double u, double min, double mode, double max);

}  // namespace ycbench
