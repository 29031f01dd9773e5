#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcf {

struct RoleSpec {
  std::string name;
  std::map<std::string, int> params;  // each in [1, 10]
};

/// One service stage; its duration is round(Normal(mean, std)) floored at `floor`.
struct StageTime {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  int floor = 0;
  // Set when the stage was derived from a role parameter via the scenario's param_rule.
  std::optional<std::string> role;
  std::optional<std::string> param;
};

/// One satisfaction factor; its score is round(Normal(mean + kappa * z, std))
/// clamped to [0, 10], z being the standardized meal time.
struct FactorSpec {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  double kappa = 0.0;
};

struct TimeClamp {
  int min = 0;
  int max = 0;
};

struct TierSpec {
  int star_level = 0;
  std::vector<RoleSpec> roles;
  std::vector<StageTime> stages;
  TimeClamp time_clamp;
  std::vector<FactorSpec> factors;
  std::vector<double> weights;

  /// Mean and standard deviation of the unrounded, unclamped stage sum.
  [[nodiscard]] double stage_sum_mean() const noexcept;
  [[nodiscard]] double stage_sum_std() const noexcept;
};

struct Scenario {
  std::uint64_t master_seed = 0;
  std::uint64_t iterations_per_tier = 0;
  std::vector<TierSpec> tiers;  // ordered by star level 1..5

  /// Throws UnknownTier.
  [[nodiscard]] const TierSpec& tier(int star_level) const;
};

/// Throws InvariantViolation naming the offending field path.
void validate_scenario(const Scenario& scenario);

/// Parses a scenario document. Stages are given either directly
/// (`mean`, `std`, `floor`) or through a role parameter
/// (`role`, `param`, `base_mean`, `base_std`, `floor`) scaled by the
/// scenario-level `param_rule` multiplier `intercept + slope * value`.
/// Errors: SchemaError, InvariantViolation.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

struct SimRecord {
  int star_level = 0;
  std::uint64_t iteration = 0;
  int total_time_per_meal = 0;
  double satisfaction_score = 0.0;
  std::vector<std::uint8_t> factor_scores;

  friend bool operator==(const SimRecord&, const SimRecord&) = default;
};

/// Deterministic in (master_seed, star_level, index). Errors: UnknownTier, IndexOutOfRange.
SimRecord simulate_iteration(const Scenario& scenario, int star_level, std::uint64_t index);

struct TierSummary {
  int star_level = 0;
  std::uint64_t count = 0;
  double mean_time = 0.0;
  double mean_satisfaction = 0.0;
};

struct RunSummary {
  std::vector<TierSummary> tiers;
  [[nodiscard]] std::uint64_t record_count() const noexcept;
};

struct RunOptions {
  unsigned workers = 1;
  std::size_t block_size = 1U << 15;
};

using RecordSink = std::function<void(const SimRecord&)>;

/// Simulates every tier and hands records to `sink` in (star_level, iteration)
/// order whatever the worker count. Exceptions thrown by the sink propagate.
RunSummary run(const Scenario& scenario, const RunOptions& options, const RecordSink& sink);
std::vector<SimRecord> run_collect(const Scenario& scenario, const RunOptions& options = {},
                                   RunSummary* summary = nullptr);

/// Exact first and second moments of a tier's output distribution, computed
/// by convolving the per-stage integer pmfs and integrating the factor-score
/// pmfs over the clamped total-time distribution.
struct TierMoments {
  double mean_time = 0.0;
  double var_time = 0.0;
  double mean_satisfaction = 0.0;
  double var_satisfaction = 0.0;
  double cov_time_satisfaction = 0.0;
};

TierMoments analytic_moments(const TierSpec& tier);

}  // namespace pcf
