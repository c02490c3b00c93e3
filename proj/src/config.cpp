#include "ycbench/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ycbench {
namespace {

using nlohmann::json;

json tri_to_json(const Triangular& t) { return json{{"min", t.min}, {"mode", t.mode}, {"max", t.max}}; }

Triangular tri_from_json(const json& j, const std::string& key) {
  if (!j.is_object()) throw std::invalid_argument(key + ": expected {min, mode, max}");
  Triangular t;
  t.min = j.at("min").get<double>();
  t.mode = j.at("mode").get<double>();
  t.max = j.at("max").get<double>();
  return t;
}

json tier_to_json(const TierSpec& t) {
  return json{{"name", t.name},
              {"share", t.share},
              {"salary_min_cents", t.salary_min.cents()},
              {"salary_max_cents", t.salary_max.cents()},
              {"rate_min", t.rate_min},
              {"rate_max", t.rate_max}};
}

TierSpec tier_from_json(const json& j) {
  TierSpec t;
  t.name = j.at("name").get<std::string>();
  t.share = j.at("share").get<double>();
  t.salary_min = Money::from_cents(j.at("salary_min_cents").get<std::int64_t>());
  t.salary_max = Money::from_cents(j.at("salary_max_cents").get<std::int64_t>());
  t.rate_min = j.at("rate_min").get<double>();
  t.rate_max = j.at("rate_max").get<double>();
  return t;
}

// Single table of (key, reader, writer) keeps the JSON names in one place.
template <typename Fn>
void visit_fields(BenchConfig& c, Fn&& fn) {
  fn("start_year", c.start_year);
  fn("horizon_years", c.horizon_years);
  fn("auto_advance_turns", c.auto_advance_turns);
  fn("business_start_hour", c.business_hours.start_hour);
  fn("business_end_hour", c.business_hours.end_hour);
  fn("employees", c.employees);
  fn("initial_funds", c.initial_funds);
  fn("salary_bump_rate", c.salary_bump_rate);
  fn("productivity_boost_rate", c.productivity_boost_rate);
  fn("rate_cap", c.rate_cap);
  fn("rate_floor", c.rate_floor);
  fn("spiky_probability", c.spiky_probability);
  fn("tiers", c.tiers);
  fn("market_size", c.market_size);
  fn("browse_limit", c.browse_limit);
  fn("client_count", c.client_count);
  fn("prestige_min", c.prestige_min);
  fn("prestige_max", c.prestige_max);
  fn("prestige_decay_per_day", c.prestige_decay_per_day);
  fn("prestige_delta", c.prestige_delta);
  fn("reward_scale", c.reward_scale);
  fn("prestige_reward_bonus", c.prestige_reward_bonus);
  fn("required_prestige", c.required_prestige);
  fn("deadline_qty_per_day", c.deadline_qty_per_day);
  fn("deadline_min_days", c.deadline_min_days);
  fn("fail_penalty_rate", c.fail_penalty_rate);
  fn("cancel_penalty_factor", c.cancel_penalty_factor);
  fn("trust_max", c.trust_max);
  fn("trust_build_rate", c.trust_build_rate);
  fn("trust_work_reduction", c.trust_work_reduction);
  fn("trust_gated_fraction", c.trust_gated_fraction);
  fn("gated_trust_min", c.gated_trust_min);
  fn("gated_trust_max", c.gated_trust_max);
  fn("gated_reward_bonus", c.gated_reward_bonus);
  fn("focus_pressure", c.focus_pressure);
  fn("failure_decays_trust", c.failure_decays_trust);
  fn("adversarial_fraction", c.adversarial_fraction);
  fn("scope_creep_floor", c.scope_creep_floor);
  fn("scope_creep_spread", c.scope_creep_spread);
  fn("task_reward_dollars", c.task_reward_dollars);
  fn("domain_count", c.domain_count);
  fn("work_qty", c.work_qty);
  fn("context_window", c.context_window);
  fn("max_commands_per_turn", c.max_commands_per_turn);
  fn("scratchpad_cap_bytes", c.scratchpad_cap_bytes);
}

struct Writer {
  json& out;
  void operator()(const char* key, const Money& m) { out[std::string(key) + "_cents"] = m.cents(); }
  void operator()(const char* key, const Triangular& t) { out[key] = tri_to_json(t); }
  void operator()(const char* key, const std::vector<TierSpec>& tiers) {
    json arr = json::array();
    for (const auto& t : tiers) arr.push_back(tier_to_json(t));
    out[key] = arr;
  }
  template <typename T>
  void operator()(const char* key, const T& v) { out[key] = v; }
};

struct Reader {
  const json& in;
  std::set<std::string>& seen;

  const json* find(const std::string& key) {
    auto it = in.find(key);
    if (it == in.end()) return nullptr;
    seen.insert(key);
    return &*it;
  }
  void operator()(const char* key, Money& m) {
    if (const json* v = find(std::string(key) + "_cents")) m = Money::from_cents(v->get<std::int64_t>());
  }
  void operator()(const char* key, Triangular& t) {
    if (const json* v = find(key)) t = tri_from_json(*v, key);
  }
  void operator()(const char* key, std::vector<TierSpec>& tiers) {
    if (const json* v = find(key)) {
      tiers.clear();
      for (const auto& t : *v) tiers.push_back(tier_from_json(t));
    }
  }
  template <typename T>
  void operator()(const char* key, T& v) {
    if (const json* j = find(key)) v = j->get<T>();
  }
};

}  // namespace

nlohmann::json config_to_json(const BenchConfig& cfg) {
  json out = json::object();
  BenchConfig copy = cfg;
  visit_fields(copy, Writer{out});
  return out;
}

BenchConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  BenchConfig cfg;
  std::set<std::string> seen;
  seen.insert("schema");
  seen.insert("preset");
  try {
    visit_fields(cfg, Reader{j, seen});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  for (const auto& [key, _] : j.items()) {
    if (!seen.contains(key)) throw std::invalid_argument("config: unknown field '" + key + "'");
  }
  if (auto problems = config_problems(cfg); !problems.empty()) {
    throw std::invalid_argument("config: " + problems.front());
  }
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("YC_PRESET_DIR")) return env;
  return YCBENCH_PRESET_DIR;
}

BenchConfig load_config_or_preset(const std::string& name_or_path) {
  if (name_or_path.empty() || name_or_path == "default") return BenchConfig{};
  const std::filesystem::path as_path{name_or_path};
  if (std::filesystem::exists(as_path)) return load_config(as_path);
  const auto preset = preset_dir() / (name_or_path + ".json");
  if (std::filesystem::exists(preset)) return load_config(preset);
  throw std::invalid_argument("unknown preset or config file: " + name_or_path);
}

std::vector<std::string> config_problems(const BenchConfig& c) {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  auto tri_ok = [](const Triangular& t) { return t.min <= t.mode && t.mode <= t.max; };
  check(c.horizon_years >= 1, "horizon_years must be >= 1");
  check(c.auto_advance_turns >= 1, "auto_advance_turns must be >= 1");
  check(c.business_hours.start_hour >= 0 && c.business_hours.start_hour < c.business_hours.end_hour &&
            c.business_hours.end_hour <= 24,
        "business hours must satisfy 0 <= start < end <= 24");
  check(c.employees >= 1, "employees must be >= 1");
  check(!c.tiers.empty(), "at least one tier is required");
  double share = 0;
  for (const auto& t : c.tiers) {
    share += t.share;
    check(t.name == "junior" || t.name == "mid" || t.name == "senior",
          "tier name '" + t.name + "' must be junior, mid or senior");
    check(t.salary_min <= t.salary_max, "tier " + t.name + ": salary_min > salary_max");
    check(t.rate_min <= t.rate_max && t.rate_min >= c.rate_floor && t.rate_max <= c.rate_cap,
          "tier " + t.name + ": rate band outside [rate_floor, rate_cap]");
  }
  check(std::abs(share - 1.0) < 1e-9, "tier shares must sum to 1");
  check(c.rate_floor > 0 && c.rate_floor <= c.rate_cap, "rate_floor must be in (0, rate_cap]");
  check(c.market_size >= 0, "market_size must be >= 0");
  check(c.browse_limit >= 1, "browse_limit must be >= 1");
  check(c.client_count >= 1, "client_count must be >= 1");
  check(c.prestige_min < c.prestige_max, "prestige_min must be < prestige_max");
  check(tri_ok(c.required_prestige), "required_prestige must satisfy min <= mode <= max");
  check(tri_ok(c.task_reward_dollars), "task_reward_dollars must satisfy min <= mode <= max");
  check(tri_ok(c.work_qty) && c.work_qty.min >= 1, "work_qty must satisfy 1 <= min <= mode <= max");
  check(c.deadline_qty_per_day >= 1, "deadline_qty_per_day must be >= 1");
  check(c.deadline_min_days >= 1, "deadline_min_days must be >= 1");
  check(c.trust_max > 0 && c.trust_build_rate > 0, "trust_max and trust_build_rate must be > 0");
  check(c.trust_work_reduction >= 0 && c.trust_work_reduction < 1, "trust_work_reduction must be in [0, 1)");
  check(c.trust_gated_fraction >= 0 && c.trust_gated_fraction <= 1, "trust_gated_fraction must be in [0, 1]");
  check(c.gated_trust_min >= 1 && c.gated_trust_min <= c.gated_trust_max, "gated trust range is empty");
  check(c.adversarial_fraction >= 0 && c.adversarial_fraction <= 1, "adversarial_fraction must be in [0, 1]");
  check(c.scope_creep_floor >= 1 && c.scope_creep_spread >= 0, "scope creep must be >= 1x");
  check(c.domain_count >= 1 && c.domain_count <= 4, "domain_count must be in [1, 4]");
  check(c.context_window >= 1, "context_window must be >= 1");
  check(c.max_commands_per_turn >= 1, "max_commands_per_turn must be >= 1");
  return out;
}

}  // namespace ycbench
