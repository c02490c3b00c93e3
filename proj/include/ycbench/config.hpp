#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ycbench/clock.hpp"
#include "ycbench/money.hpp"

namespace ycbench {

/// Triangular distribution parameters, stored as (min, mode, max).
struct Triangular {
  double min{0};
  double mode{0};
  double max{0};

  double mean() const { return (min + mode + max) / 3.0; }
  friend bool operator==(const Triangular&, const Triangular&) = default;
};

struct TierSpec {
  std::string name;
  double share{0};
  Money salary_min;
  Money salary_max;
  double rate_min{1};
  double rate_max{10};

  friend bool operator==(const TierSpec&, const TierSpec&) = default;
};

/// Every tunable of the benchmark. Defaults reproduce the `default` preset.
struct BenchConfig {
  // simulation
  int start_year{2025};
  int horizon_years{1};
  int auto_advance_turns{5};
  BusinessHours business_hours{9, 18};

  // workforce
  int employees{8};
  Money initial_funds{Money::from_dollars(200'000)};
  double salary_bump_rate{0.01};
  double productivity_boost_rate{0.02};
  double rate_cap{10.0};
  double rate_floor{1.0};
  double spiky_probability{0.5};
  std::vector<TierSpec> tiers{
      {"junior", 0.50, Money::from_dollars(2'000), Money::from_dollars(4'000), 1.0, 4.0},
      {"mid", 0.35, Money::from_dollars(6'000), Money::from_dollars(8'000), 4.0, 7.0},
      {"senior", 0.15, Money::from_dollars(10'000), Money::from_dollars(15'000), 7.0, 10.0},
  };

  // market
  int market_size{200};
  int browse_limit{50};
  int client_count{6};

  // prestige
  double prestige_min{1.0};
  double prestige_max{10.0};
  double prestige_decay_per_day{0.0};
  double prestige_delta{0.25};
  double reward_scale{0.30};
  double prestige_reward_bonus{0.15};
  Triangular required_prestige{1, 1, 5};

  // deadlines
  int deadline_qty_per_day{150};
  int deadline_min_days{7};
  double fail_penalty_rate{0.35};
  double cancel_penalty_factor{1.5};

  // trust
  double trust_max{5.0};
  double trust_build_rate{5.0};
  double trust_work_reduction{0.50};
  double trust_gated_fraction{0.30};
  int gated_trust_min{1};
  int gated_trust_max{4};
  double gated_reward_bonus{0.15};
  double focus_pressure{0.3};
  bool failure_decays_trust{false};

  // adversarial
  double adversarial_fraction{0.35};
  double scope_creep_floor{3.0};
  double scope_creep_spread{1.0};

  // distributions
  Triangular task_reward_dollars{2'000, 5'000, 12'000};
  int domain_count{1};
  Triangular work_qty{400, 800, 1500};

  // agent-facing
  int context_window{20};
  int max_commands_per_turn{64};
  std::size_t scratchpad_cap_bytes{16 * 1024};

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

nlohmann::json config_to_json(const BenchConfig& cfg);
/// Overlays the given fields on the defaults. Unknown keys and ill-typed values
/// throw std::invalid_argument; the result is validated.
BenchConfig config_from_json(const nlohmann::json& j);
BenchConfig load_config(const std::filesystem::path& path);
/// Resolves a preset name ("default") or a path to a config file.
BenchConfig load_config_or_preset(const std::string& name_or_path);

/// Returns a description of each inconsistency (empty when valid).
std::vector<std::string> config_problems(const BenchConfig& cfg);

std::filesystem::path preset_dir();

}  // namespace ycbench
