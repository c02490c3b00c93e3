#include "ycbench/worldgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ycbench {
namespace {

constexpr std::array<const char*, 32> kClientNames{
    "Nexus AI",         "Quantum Labs",     "Helios Data",      "Vertex Systems",   "Orion Analytics",
    "Cobalt Robotics",  "Lumen Bio",        "Atlas Compute",    "Pioneer Health",   "Zenith Finance",
    "Aurora Media",     "Beacon Logistics", "Cascade Energy",   "Delta Retail",     "Ember Games",
    "Falcon Security",  "Granite Capital",  "Harbor Insurance", "Iris Vision",      "Juniper Foods",
    "Keystone Legal",   "Lattice Semis",    "Meridian Travel",  "Nimbus Cloud",     "Onyx Mobility",
    "Prism Education",  "Quasar Aerospace", "Redwood Realty",   "Summit Telecom",   "Tidal Agritech",
    "Umbra Pharma",     "Vector Marine"};

double round_to(double v, double step) { return std::round(v / step) * step; }

template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(items[i - 1], items[j]);
  }
}

Tier tier_of(const TierSpec& spec) {
  auto t = parse_tier(spec.name);
  if (!t) throw std::invalid_argument("unknown tier name '" + spec.name + "'");
  return *t;
}

}  // namespace

std::vector<int> apportion(std::span<const double> shares, int total) {
  std::vector<int> seats(shares.size(), 0);
  std::vector<double> remainder(shares.size(), 0.0);
  int assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double quota = shares[i] * total;
    seats[i] = static_cast<int>(std::floor(quota + 1e-9));
    remainder[i] = quota - seats[i];
    assigned += seats[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-9; });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) ++seats[order[k]];
  return seats;
}

int adversarial_count(double fraction, int clients) {
  return static_cast<int>(std::floor(fraction * clients + 0.5 + 1e-9));
}

std::vector<EmployeeProfile> generate_roster(RngStream& rng, const BenchConfig& cfg) {
  std::vector<double> shares;
  for (const auto& t : cfg.tiers) shares.push_back(t.share);
  const auto counts = apportion(shares, cfg.employees);

  std::vector<std::size_t> tier_slots;
  for (std::size_t i = 0; i < counts.size(); ++i) tier_slots.insert(tier_slots.end(), counts[i], i);
  shuffle(tier_slots, rng);

  std::vector<EmployeeProfile> roster;
  roster.reserve(tier_slots.size());
  for (std::size_t i = 0; i < tier_slots.size(); ++i) {
    const TierSpec& spec = cfg.tiers[tier_slots[i]];
    EmployeeProfile e;
    e.id = "Emp_" + std::to_string(i + 1);
    e.tier = tier_of(spec);
    const auto dollars = rng.uniform_int(spec.salary_min.cents() / 100, spec.salary_max.cents() / 100);
    e.monthly_salary = Money::from_dollars(dollars);
    for (Domain d : kAllDomains) {
      // Spiky profiles: a draw from the whole band half of the time.
      const bool off_band = rng.bernoulli(cfg.spiky_probability);
      const double rate = off_band ? rng.uniform(cfg.rate_floor, cfg.rate_cap) : rng.uniform(spec.rate_min, spec.rate_max);
      e.rates[index_of(d)] = std::clamp(round_to(rate, 0.01), cfg.rate_floor, cfg.rate_cap);
    }
    roster.push_back(std::move(e));
  }
  return roster;
}

std::vector<ClientProfile> generate_clients(RngStream& rng, RngStream& adversary_rng, const BenchConfig& cfg) {
  std::vector<std::string> names(kClientNames.begin(), kClientNames.end());
  shuffle(names, rng);
  for (int i = static_cast<int>(names.size()); i < cfg.client_count; ++i) {
    names.push_back("Client-" + std::to_string(i + 1));
  }

  std::vector<int> order(static_cast<std::size_t>(cfg.client_count));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  const int hostile = adversarial_count(cfg.adversarial_fraction, cfg.client_count);

  std::vector<ClientProfile> clients(static_cast<std::size_t>(cfg.client_count));
  for (int i = 0; i < cfg.client_count; ++i) clients[i].id = names[i];
  for (int k = 0; k < hostile; ++k) clients[order[k]].adversarial = true;
  for (auto& c : clients) {
    if (!c.adversarial) continue;
    const double factor = adversary_rng.uniform(cfg.scope_creep_floor, cfg.scope_creep_floor + cfg.scope_creep_spread);
    c.scope_creep_factor = std::max(cfg.scope_creep_floor, round_to(factor, 0.01));
  }
  return clients;
}

TaskRecord generate_task(RngStream& rng, const BenchConfig& cfg, std::span<const ClientProfile> clients,
                         std::int64_t serial) {
  if (clients.empty()) throw std::invalid_argument("generate_task: no clients");
  TaskRecord t;
  t.id = "Task-" + std::to_string(serial);
  t.client_id = clients[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(clients.size()) - 1))].id;

  std::vector<Domain> pool(kAllDomains.begin(), kAllDomains.end());
  for (int k = 0; k < cfg.domain_count; ++k) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(k, static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
    t.domains.push_back(pool[static_cast<std::size_t>(k)]);
  }
  std::sort(t.domains.begin(), t.domains.end());
  for (Domain d : t.domains) {
    const double qty = sample_triangular(rng, cfg.work_qty.min, cfg.work_qty.mode, cfg.work_qty.max);
    t.work[index_of(d)] = std::max<std::int64_t>(1, std::llround(qty));
  }

  const double rp = sample_triangular(rng, cfg.required_prestige.min, cfg.required_prestige.mode,
                                      cfg.required_prestige.max);
  t.required_prestige = std::clamp(static_cast<int>(std::lround(rp)), 1, 10);
  if (rng.bernoulli(cfg.trust_gated_fraction)) {
    t.required_trust = static_cast<int>(rng.uniform_int(cfg.gated_trust_min, cfg.gated_trust_max));
  }

  const auto base_dollars = std::llround(sample_triangular(rng, cfg.task_reward_dollars.min,
                                                           cfg.task_reward_dollars.mode, cfg.task_reward_dollars.max));
  const double factor = (1.0 + cfg.prestige_reward_bonus * (t.required_prestige - 1)) *
                        (1.0 + cfg.gated_reward_bonus * t.required_trust);
  t.reward = Money::from_dollars(base_dollars).scaled(factor);
  t.status = TaskStatus::market;
  return t;
}

WorldState generate_world(std::uint64_t seed, const BenchConfig& cfg) {
  if (auto problems = config_problems(cfg); !problems.empty()) {
    throw std::invalid_argument("invalid config: " + problems.front());
  }
  WorldState s;
  s.seed = seed;
  s.config = cfg;
  s.rng = RngStreams::from_seed(seed);
  s.clock.start = first_monday(cfg.start_year, cfg.business_hours);
  s.clock.now = s.clock.start;
  s.clock.horizon_end = add_years(s.clock.start, cfg.horizon_years);
  s.last_day = day_index(s.clock.now);

  s.funds = cfg.initial_funds;
  s.ledger.push_back(LedgerEntry{s.clock.now, LedgerKind::initial_capital, cfg.initial_funds, "seed"});

  s.roster = generate_roster(s.rng.roster, cfg);
  s.clients = generate_clients(s.rng.clients, s.rng.adversary, cfg);
  s.prestige.fill(cfg.prestige_min);
  replenish_market(s);

  s.events.insert(SimEvent{next_payroll_after(s.clock.now, cfg.business_hours), EventKind::payroll, "", 0});
  s.events.insert(SimEvent{s.clock.horizon_end, EventKind::horizon_end, "", 0});
  return s;
}

int replenish_market(WorldState& state) {
  int added = 0;
  while (static_cast<int>(state.market.size()) < state.config.market_size) {
    state.market.push_back(generate_task(state.rng.market, state.config, state.clients, state.next_task_serial++));
    ++added;
  }
  return added;
}

}  // namespace ycbench
