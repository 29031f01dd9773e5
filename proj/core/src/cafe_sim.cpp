#include "pcf/cafe_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pcf/error.hpp"
#include "pcf/rng.hpp"

namespace pcf {

double TierSpec::stage_sum_mean() const noexcept {
  double m = 0.0;
  for (const auto& s : stages) m += s.mean;
  return m;
}

double TierSpec::stage_sum_std() const noexcept {
  double v = 0.0;
  for (const auto& s : stages) v += s.std * s.std;
  return std::sqrt(v);
}

const TierSpec& Scenario::tier(int star_level) const {
  for (const auto& t : tiers) {
    if (t.star_level == star_level) return t;
  }
  throw Error(ErrorCode::UnknownTier, "no tier with star level " + std::to_string(star_level));
}

std::uint64_t RunSummary::record_count() const noexcept {
  std::uint64_t n = 0;
  for (const auto& t : tiers) n += t.count;
  return n;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, path + ": " + what);
}

void validate_tier(const TierSpec& tier, const std::string& path) {
  for (const auto& role : tier.roles) {
    for (const auto& [trait, value] : role.params) {
      if (value < 1 || value > 10) {
        violation(path + ".roles[" + role.name + "].params." + trait,
                  "value " + std::to_string(value) + " outside [1, 10]");
      }
    }
  }
  for (std::size_t i = 0; i < tier.stages.size(); ++i) {
    const auto& s = tier.stages[i];
    const std::string sp = path + ".stages[" + std::to_string(i) + "]";
    if (!std::isfinite(s.mean)) violation(sp + ".mean", "must be finite");
    if (!(s.std >= 0.0) || !std::isfinite(s.std)) violation(sp + ".std", "must be finite and >= 0");
    if (s.floor < 0) violation(sp + ".floor", "must be >= 0");
  }
  if (tier.time_clamp.min >= tier.time_clamp.max) violation(path + ".time_clamp", "min must be below max");
  if (tier.factors.empty()) violation(path + ".factors", "at least one factor required");
  for (std::size_t i = 0; i < tier.factors.size(); ++i) {
    const auto& f = tier.factors[i];
    const std::string fp = path + ".factors[" + std::to_string(i) + "]";
    if (!std::isfinite(f.mean)) violation(fp + ".mean", "must be finite");
    if (!(f.std >= 0.0) || !std::isfinite(f.std)) violation(fp + ".std", "must be finite and >= 0");
    if (!std::isfinite(f.kappa)) violation(fp + ".kappa", "must be finite");
  }
  if (tier.weights.size() != tier.factors.size()) {
    violation(path + ".weights", "expected " + std::to_string(tier.factors.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tier.weights.size(); ++i) {
    if (!(tier.weights[i] >= 0.0) || !std::isfinite(tier.weights[i])) {
      violation(path + ".weights[" + std::to_string(i) + "]", "must be finite and >= 0");
    }
    total += tier.weights[i];
  }
  if (!(total > 0.0)) violation(path + ".weights", "must not all be zero");
}

}  // namespace

void validate_scenario(const Scenario& scenario) {
  if (scenario.tiers.size() != 5) {
    violation("tiers", "expected 5 tiers, got " + std::to_string(scenario.tiers.size()));
  }
  std::set<int> levels;
  for (std::size_t i = 0; i < scenario.tiers.size(); ++i) {
    const int s = scenario.tiers[i].star_level;
    const std::string path = "tiers[" + std::to_string(i) + "]";
    if (s < 1 || s > 5) violation(path + ".star_level", "must be in 1..5");
    if (!levels.insert(s).second) violation(path + ".star_level", "star level " + std::to_string(s) + " repeated");
    if (static_cast<std::size_t>(s) != i + 1) violation(path + ".star_level", "tiers must be ordered 1..5");
    validate_tier(scenario.tiers[i], path);
  }
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorCode::SchemaError, path + "." + key + " missing");
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, path + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer()) throw Error(ErrorCode::SchemaError, path + "." + key + " must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw Error(ErrorCode::SchemaError, path + "." + key + " must be a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, path + "." + key + " must be an array");
  return v;
}

struct ParamRule {
  double intercept;
  double slope;
};

TierSpec parse_tier(const json& t, const std::string& path, const std::optional<ParamRule>& rule) {
  TierSpec tier;
  tier.star_level = integer(t, "star_level", path);

  for (const auto& r : array(t, "roles", path)) {
    RoleSpec role{text(r, "name", path + ".roles"), {}};
    const auto& params = require(r, "params", path + ".roles[" + role.name + "]");
    if (!params.is_object()) throw Error(ErrorCode::SchemaError, path + ".roles[" + role.name + "].params");
    for (const auto& [k, v] : params.items()) {
      if (!v.is_number_integer()) {
        throw Error(ErrorCode::SchemaError, path + ".roles[" + role.name + "].params." + k + " must be an integer");
      }
      role.params.emplace(k, v.get<int>());
    }
    tier.roles.push_back(std::move(role));
  }

  const auto& stages = array(t, "stages", path);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    const std::string sp = path + ".stages[" + std::to_string(i) + "]";
    StageTime st;
    st.name = text(s, "name", sp);
    st.floor = integer(s, "floor", sp);
    if (s.contains("role")) {
      if (!rule) throw Error(ErrorCode::SchemaError, sp + " uses a role parameter but no param_rule is given");
      st.role = text(s, "role", sp);
      st.param = text(s, "param", sp);
      auto role = std::find_if(tier.roles.begin(), tier.roles.end(), [&](const auto& r) { return r.name == *st.role; });
      if (role == tier.roles.end()) throw Error(ErrorCode::InvariantViolation, sp + ".role: unknown role " + *st.role);
      auto p = role->params.find(*st.param);
      if (p == role->params.end()) {
        throw Error(ErrorCode::InvariantViolation, sp + ".param: role " + *st.role + " has no " + *st.param);
      }
      const double scale = rule->intercept + rule->slope * p->second;
      st.mean = number(s, "base_mean", sp) * scale;
      st.std = number(s, "base_std", sp) * scale;
    } else {
      st.mean = number(s, "mean", sp);
      st.std = number(s, "std", sp);
    }
    tier.stages.push_back(std::move(st));
  }

  const auto& clamp = array(t, "time_clamp", path);
  if (clamp.size() != 2 || !clamp[0].is_number_integer() || !clamp[1].is_number_integer()) {
    throw Error(ErrorCode::SchemaError, path + ".time_clamp must be [min, max] integers");
  }
  tier.time_clamp = {clamp[0].get<int>(), clamp[1].get<int>()};

  const auto& factors = array(t, "factors", path);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    const std::string fp = path + ".factors[" + std::to_string(i) + "]";
    tier.factors.push_back({text(f, "name", fp), number(f, "mean", fp), number(f, "std", fp),
                            f.contains("kappa") ? number(f, "kappa", fp) : 0.0});
  }
  if (t.contains("n_factors")) {
    const int n = integer(t, "n_factors", path);
    if (n <= 0 || static_cast<std::size_t>(n) != tier.factors.size()) {
      throw Error(ErrorCode::InvariantViolation,
                  path + ".n_factors: " + std::to_string(n) + " does not match " +
                      std::to_string(tier.factors.size()) + " factors");
    }
  }
  for (const auto& w : array(t, "weights", path)) {
    if (!w.is_number()) throw Error(ErrorCode::SchemaError, path + ".weights must hold numbers");
    tier.weights.push_back(w.get<double>());
  }
  return tier;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "scenario must be an object");

  Scenario sc;
  const auto& seed = require(doc, "master_seed", "scenario");
  if (!seed.is_number_unsigned()) throw Error(ErrorCode::SchemaError, "scenario.master_seed must be unsigned");
  sc.master_seed = seed.get<std::uint64_t>();
  const auto& iters = require(doc, "iterations_per_tier", "scenario");
  if (!iters.is_number_unsigned()) {
    throw Error(ErrorCode::SchemaError, "scenario.iterations_per_tier must be a non-negative integer");
  }
  sc.iterations_per_tier = iters.get<std::uint64_t>();

  std::optional<ParamRule> rule;
  if (doc.contains("param_rule")) {
    const auto& r = doc["param_rule"];
    rule = ParamRule{number(r, "intercept", "scenario.param_rule"), number(r, "slope", "scenario.param_rule")};
  }
  const auto& tiers = array(doc, "tiers", "scenario");
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    sc.tiers.push_back(parse_tier(tiers[i], "tiers[" + std::to_string(i) + "]", rule));
  }
  std::stable_sort(sc.tiers.begin(), sc.tiers.end(),
                   [](const TierSpec& a, const TierSpec& b) { return a.star_level < b.star_level; });
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

// Draw order per record: one normal per stage, then one per factor.
SimRecord simulate_tier(const TierSpec& tier, std::uint64_t master_seed, std::uint64_t index, double t_mean,
                        double t_std, double weight_sum) {
  CounterRng rng(record_seed(master_seed, static_cast<std::uint64_t>(tier.star_level), index));

  long total = 0;
  for (const auto& s : tier.stages) {
    const double x = s.mean + s.std * rng.next_normal();
    total += std::max(static_cast<long>(std::round(x)), static_cast<long>(s.floor));
  }
  total = std::clamp(total, static_cast<long>(tier.time_clamp.min), static_cast<long>(tier.time_clamp.max));

  const double z = t_std > 0.0 ? (static_cast<double>(total) - t_mean) / t_std : 0.0;
  SimRecord rec;
  rec.star_level = tier.star_level;
  rec.iteration = index;
  rec.total_time_per_meal = static_cast<int>(total);
  rec.factor_scores.resize(tier.factors.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < tier.factors.size(); ++i) {
    const auto& f = tier.factors[i];
    const double x = f.mean + f.kappa * z + f.std * rng.next_normal();
    const double score = std::clamp(std::round(x), 0.0, 10.0);
    rec.factor_scores[i] = static_cast<std::uint8_t>(score);
    weighted += tier.weights[i] * score;
  }
  rec.satisfaction_score = weighted / weight_sum;
  return rec;
}

double weight_sum(const TierSpec& tier) {
  double w = 0.0;
  for (double x : tier.weights) w += x;
  return w;
}

}  // namespace

SimRecord simulate_iteration(const Scenario& scenario, int star_level, std::uint64_t index) {
  const auto& tier = scenario.tier(star_level);
  if (index >= scenario.iterations_per_tier) {
    throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(index) + " >= iterations_per_tier " +
                                                std::to_string(scenario.iterations_per_tier));
  }
  return simulate_tier(tier, scenario.master_seed, index, tier.stage_sum_mean(), tier.stage_sum_std(),
                       weight_sum(tier));
}

RunSummary run(const Scenario& scenario, const RunOptions& options, const RecordSink& sink) {
  const unsigned workers = std::max(1U, options.workers);
  const std::size_t block = std::max<std::size_t>(1, options.block_size);
  RunSummary summary;
  std::vector<SimRecord> buffer;

  for (const auto& tier : scenario.tiers) {
    const double t_mean = tier.stage_sum_mean();
    const double t_std = tier.stage_sum_std();
    const double w_sum = weight_sum(tier);
    TierSummary ts{tier.star_level, 0, 0.0, 0.0};
    std::uint64_t time_sum = 0;
    // Neumaier-compensated running sum; the sink order is fixed so the result is too
    double sat_sum = 0.0;
    double sat_comp = 0.0;

    for (std::uint64_t start = 0; start < scenario.iterations_per_tier; start += block) {
      const std::size_t n =
          static_cast<std::size_t>(std::min<std::uint64_t>(block, scenario.iterations_per_tier - start));
      buffer.resize(n);
      auto fill = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) buffer[i] = simulate_tier(tier, scenario.master_seed, start + i, t_mean, t_std, w_sum);
      };
      if (workers == 1 || n < 2 * workers) {
        fill(0, n);
      } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
          const std::size_t lo = w * chunk;
          const std::size_t hi = std::min(n, lo + chunk);
          if (lo < hi) pool.emplace_back(fill, lo, hi);
        }
      }
      for (const auto& rec : buffer) {
        sink(rec);
        ++ts.count;
        time_sum += static_cast<std::uint64_t>(rec.total_time_per_meal);
        const double y = rec.satisfaction_score;
        const double t = sat_sum + y;
        sat_comp += std::abs(sat_sum) >= std::abs(y) ? (sat_sum - t) + y : (y - t) + sat_sum;
        sat_sum = t;
      }
    }
    if (ts.count > 0) {
      ts.mean_time = static_cast<double>(time_sum) / static_cast<double>(ts.count);
      ts.mean_satisfaction = (sat_sum + sat_comp) / static_cast<double>(ts.count);
    }
    summary.tiers.push_back(ts);
  }
  return summary;
}

std::vector<SimRecord> run_collect(const Scenario& scenario, const RunOptions& options, RunSummary* summary) {
  std::vector<SimRecord> out;
  out.reserve(static_cast<std::size_t>(scenario.iterations_per_tier * scenario.tiers.size()));
  auto s = run(scenario, options, [&](const SimRecord& r) { out.push_back(r); });
  if (summary) *summary = std::move(s);
  return out;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// pmf of max(round(Normal(mean, std)), floor) as (offset, probabilities)
std::pair<long, std::vector<double>> stage_pmf(const StageTime& s) {
  if (s.std == 0.0) return {std::max(static_cast<long>(std::round(s.mean)), static_cast<long>(s.floor)), {1.0}};
  const long lo = std::max(static_cast<long>(std::floor(s.mean - 12.0 * s.std)) - 1, static_cast<long>(s.floor));
  const long hi = std::max(static_cast<long>(std::ceil(s.mean + 12.0 * s.std)) + 1, lo);
  std::vector<double> p(static_cast<std::size_t>(hi - lo + 1));
  for (long k = lo; k <= hi; ++k) {
    const double upper = normal_cdf((static_cast<double>(k) + 0.5 - s.mean) / s.std);
    const double lower = k == lo ? 0.0 : normal_cdf((static_cast<double>(k) - 0.5 - s.mean) / s.std);
    p[static_cast<std::size_t>(k - lo)] = upper - lower;
  }
  return {lo, std::move(p)};
}

}  // namespace

TierMoments analytic_moments(const TierSpec& tier) {
  long offset = 0;
  std::vector<double> pmf{1.0};
  for (const auto& s : tier.stages) {
    auto [o, p] = stage_pmf(s);
    std::vector<double> next(pmf.size() + p.size() - 1, 0.0);
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) next[i + j] += pmf[i] * p[j];
    }
    pmf = std::move(next);
    offset += o;
  }
  const long lo = tier.time_clamp.min;
  const long hi = tier.time_clamp.max;
  std::vector<double> clamped(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const long t = std::clamp(offset + static_cast<long>(i), lo, hi);
    clamped[static_cast<std::size_t>(t - lo)] += pmf[i];
  }

  const double t_mean = tier.stage_sum_mean();
  const double t_std = tier.stage_sum_std();
  const double w_sum = weight_sum(tier);
  std::vector<double> cond_mean(clamped.size(), 0.0);
  std::vector<double> cond_var(clamped.size(), 0.0);
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    const double t = static_cast<double>(lo) + static_cast<double>(i);
    const double z = t_std > 0.0 ? (t - t_mean) / t_std : 0.0;
    for (std::size_t f = 0; f < tier.factors.size(); ++f) {
      const auto& fs = tier.factors[f];
      const double mu = fs.mean + fs.kappa * z;
      double e = 0.0;
      double e2 = 0.0;
      if (fs.std == 0.0) {
        e = std::clamp(std::round(mu), 0.0, 10.0);
        e2 = e * e;
      } else {
        for (int k = 0; k <= 10; ++k) {
          const double upper = k == 10 ? 1.0 : normal_cdf((k + 0.5 - mu) / fs.std);
          const double lower = k == 0 ? 0.0 : normal_cdf((k - 0.5 - mu) / fs.std);
          e += k * (upper - lower);
          e2 += k * k * (upper - lower);
        }
      }
      const double w = tier.weights[f] / w_sum;
      cond_mean[i] += w * e;
      cond_var[i] += w * w * (e2 - e * e);
    }
  }

  TierMoments m;
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    const double t = static_cast<double>(lo) + static_cast<double>(i);
    m.mean_time += clamped[i] * t;
    m.mean_satisfaction += clamped[i] * cond_mean[i];
  }
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    const double dt = static_cast<double>(lo) + static_cast<double>(i) - m.mean_time;
    const double ds = cond_mean[i] - m.mean_satisfaction;
    m.var_time += clamped[i] * dt * dt;
    m.var_satisfaction += clamped[i] * (cond_var[i] + ds * ds);
    m.cov_time_satisfaction += clamped[i] * dt * ds;
  }
  return m;
}

}  // namespace pcf
