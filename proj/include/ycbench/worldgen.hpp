#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ycbench/config.hpp"
#include "ycbench/model.hpp"
#include "ycbench/rng.hpp"

namespace ycbench {

/// Largest-remainder apportionment of `total` seats over `shares` (which sum to 1).
/// Ties in the fractional part go to the earlier share.
std::vector<int> apportion(std::span<const double> shares, int total);

/// round(fraction * clients), halves rounded up.
int adversarial_count(double fraction, int clients);

std::vector<EmployeeProfile> generate_roster(RngStream& rng, const BenchConfig& cfg);

/// Client names and adversarial flags come from `rng`; work-inflation factors from
/// `adversary_rng`.
std::vector<ClientProfile> generate_clients(RngStream& rng, RngStream& adversary_rng, const BenchConfig& cfg);

TaskRecord generate_task(RngStream& rng, const BenchConfig& cfg, std::span<const ClientProfile> clients,
                         std::int64_t serial);

WorldState generate_world(std::uint64_t seed, const BenchConfig& cfg);

/// Tops the market back up to cfg.market_size; returns the number of tasks added.
int replenish_market(WorldState& state);

}  // namespace ycbench
