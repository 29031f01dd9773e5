#include <benchmark/benchmark.h>

#include <random>

#include "pcf/cafe_sim.hpp"
#include "pcf/constraints.hpp"
#include "pcf/spark_space.hpp"
#include "pcf/stats.hpp"

namespace {

pcf::SparkSpace sized_space(std::size_t n) {
  std::map<pcf::Dim, std::vector<std::string>> dims;
  for (pcf::Dim d : pcf::kAllDims) {
    for (std::size_t i = 0; i < n; ++i) dims[d].push_back("t" + std::to_string(i));
  }
  return pcf::build_space(dims);
}

pcf::Scenario default_scenario() { return pcf::load_scenario_file(PCF_DATA_DIR "/default_scenario.json"); }

void BM_Enumerate(benchmark::State& state) {
  const auto space = sized_space(static_cast<std::size_t>(state.range(0)));
  std::int64_t n = 0;
  for (auto _ : state) {
    n = 0;
    for (const auto& c : pcf::enumerate(space)) {
      benchmark::DoNotOptimize(c.traits.data());
      ++n;
    }
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Enumerate)->Arg(4)->Arg(8);

void BM_CountValid(benchmark::State& state) {
  const auto space = sized_space(static_cast<std::size_t>(state.range(0)));
  pcf::ConstraintSet cs(space);
  cs.add_exclusion({pcf::Dim::Skills, "t0"}, {pcf::Dim::Knowledge, "t1"});
  cs.add_exclusion({pcf::Dim::Personalities, "t2"}, {pcf::Dim::Approaches, "t0"});
  cs.add_requirement({pcf::Dim::Resources, "t1"}, {pcf::Dim::Skills, "t3"});
  cs.restrict_context("rush", pcf::Dim::Approaches, {"t0", "t1"});
  for (auto _ : state) benchmark::DoNotOptimize(pcf::count_valid(space, cs, "rush"));
}
BENCHMARK(BM_CountValid)->Arg(8)->Arg(16);

void BM_SimulateIteration(benchmark::State& state) {
  const auto sc = default_scenario();
  const int star = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcf::simulate_iteration(sc, star, i));
    i = (i + 1) % sc.iterations_per_tier;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulateIteration)->Arg(1)->Arg(5);

void BM_RunTier(benchmark::State& state) {
  auto sc = default_scenario();
  sc.iterations_per_tier = 20000;
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    double acc = 0;
    pcf::run(sc, {workers}, [&](const pcf::SimRecord& r) { acc += r.satisfaction_score; });
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 5 * 20000);
}
BENCHMARK(BM_RunTier)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(15, 5);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

void BM_Ols(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = normal_sample(n, 1);
  auto y = normal_sample(n, 2);
  for (std::size_t i = 0; i < n; ++i) y[i] += 2.3 * x[i];
  const auto design = pcf::DesignMatrix::from_columns({std::vector<double>(n, 1.0), x});
  for (auto _ : state) benchmark::DoNotOptimize(pcf::ols(design, y));
}
BENCHMARK(BM_Ols)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_BSplineBasis(benchmark::State& state) {
  const auto x = normal_sample(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(pcf::bspline_basis(x, 3, 5));
}
BENCHMARK(BM_BSplineBasis)->Arg(10000)->Arg(200000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
