#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "error_checks.hpp"
#include "oracles.hpp"
#include "pcf/io.hpp"
#include "pcf/stats.hpp"
#include "temp_dir.hpp"

using namespace pcf;
using pcf::testing::slurp;
using pcf::testing::TempDir;

namespace {

Scenario small_default(std::uint64_t iterations) {
  auto sc = load_scenario_file(PCF_DATA_DIR "/default_scenario.json");
  sc.iterations_per_tier = iterations;
  return sc;
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  CHECK(h.finish() == sha256_hex("abc"));
  CHECK_ERROR_CODE(sha256_file("/nonexistent/file"), ErrorCode::IoError);
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(4.625) == "4.625");
  CHECK(format_double(6.0) == "6");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = i % 2 ? ud(rng) : static_cast<double>(rng() % 151) / 15.0;
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("records csv: header, empty stream and round trip") {
  TempDir dir;
  const auto empty = dir.file("empty.csv");
  CHECK(write_records_csv({}, empty) == 0);
  CHECK(slurp(empty) == std::string(kRecordHeader) + "\n");
  CHECK(read_records_csv(empty).empty());

  const auto records = run_collect(small_default(2));
  const auto ten = std::vector<SimRecord>(records.begin(), records.begin() + 10);
  const auto path = dir.file("ten.csv");
  CHECK(write_records_csv(ten, path) == 10);
  CHECK(line_count(slurp(path)) == 11);
  auto back = read_records_csv(path);
  REQUIRE(back.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(back[i].star_level == ten[i].star_level);
    CHECK(back[i].iteration == ten[i].iteration);
    CHECK(back[i].total_time_per_meal == ten[i].total_time_per_meal);
    CHECK(back[i].satisfaction_score == ten[i].satisfaction_score);
  }

  const auto wide = dir.file("wide.csv");
  write_records_csv(records, wide, 15);
  CHECK(read_records_csv(wide) == records);
}

TEST_CASE("records csv: malformed input") {
  TempDir dir;
  CHECK_ERROR_CODE(read_records_csv(dir.write("bad.csv", "a,b,c\n1,2,3\n")), ErrorCode::SchemaError);
  CHECK_ERROR_CODE(read_records_csv(dir.write("short.csv", std::string(kRecordHeader) + "\n1,0,12\n")),
                   ErrorCode::SchemaError);
  CHECK_ERROR_CODE(read_records_csv(dir.file("missing.csv")), ErrorCode::IoError);
}

TEST_CASE("writer digest equals the file digest") {
  TempDir dir;
  const auto path = dir.file("r.csv");
  RecordCsvWriter w(path);
  for (const auto& r : run_collect(small_default(100))) w.write(r);
  const auto digest = w.finish();
  CHECK(w.count() == 500);
  CHECK(digest == sha256_file(path));
}

TEST_CASE("manifest: verify, tamper detection and re-run determinism") {
  TempDir dir;
  const auto scenario_path = std::string(PCF_DATA_DIR "/default_scenario.json");
  const auto sc = small_default(200);
  const auto csv = dir.file("run.csv");
  const auto records = run_collect(sc);
  write_records_csv(records, csv);

  RunManifest m;
  m.master_seed = sc.master_seed;
  m.iterations_per_tier = sc.iterations_per_tier;
  m.scenario_hash = sha256_file(scenario_path);
  m.record_count = records.size();
  m.started = utc_timestamp();
  m.finished = utc_timestamp();
  m.output_file = csv;
  m.output_digest = sha256_file(csv);
  const auto mpath = dir.file("manifest.json");
  write_manifest(m, mpath);
  const auto back = read_manifest(mpath);
  CHECK(back.output_digest == m.output_digest);
  CHECK(back.record_count == 1000);
  CHECK(back.started.size() == 20);

  CHECK(verify_manifest(mpath, csv, scenario_path).ok);

  const auto rerun = dir.file("rerun.csv");
  write_records_csv(run_collect(sc, {4, 64}), rerun);
  CHECK(sha256_file(rerun) == m.output_digest);

  auto text = slurp(csv);
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  const auto cut = dir.write("cut.csv", text);
  const auto check = verify_manifest(mpath, cut);
  CHECK_FALSE(check.ok);
  CHECK(std::find(check.mismatches.begin(), check.mismatches.end(), "record_count") != check.mismatches.end());

  const auto other = dir.write("scenario.json", slurp(scenario_path) + " ");
  const auto sc_check = verify_manifest(mpath, csv, other);
  CHECK_FALSE(sc_check.ok);
  CHECK(sc_check.mismatches == std::vector<std::string>{"scenario_hash"});
  CHECK_ERROR_CODE(read_manifest(dir.write("junk.json", "[]")), ErrorCode::SchemaError);
}

TEST_CASE("plot data: scatter is an identity projection") {
  const auto records = run_collect(small_default(20));
  const auto t = emit_plot_data(records, PlotKind::Scatter);
  CHECK(t.rows() == 100);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(t.column("satisfaction_score")[i] == records[i].satisfaction_score);
    CHECK(t.column("total_time_per_meal")[i] == records[i].total_time_per_meal);
    CHECK(t.column("star_level")[i] == records[i].star_level);
  }
  CHECK_ERROR_CODE(t.column("nope"), ErrorCode::SchemaError);
  CHECK(emit_plot_data({}, PlotKind::Scatter).rows() == 0);
  CHECK_ERROR_CODE(emit_plot_data({}, PlotKind::Distribution), ErrorCode::EmptyInput);
  CHECK_ERROR_CODE(emit_plot_data({}, PlotKind::SplineCurve), ErrorCode::EmptyInput);
}

TEST_CASE("plot data: distribution quantiles match a sort oracle") {
  const auto records = run_collect(small_default(2000));
  const auto t = emit_plot_data(records, PlotKind::Distribution);
  std::size_t total = 0;
  for (std::size_t row = 0; row < t.rows(); ++row) {
    const int star = static_cast<int>(t.column("star_level")[row]);
    const double lo = t.column("sat_bin_lower")[row];
    const double hi = t.column("sat_bin_upper")[row];
    std::vector<double> times;
    for (const auto& r : records) {
      if (r.star_level == star && r.satisfaction_score >= lo - 1e-9 && r.satisfaction_score < hi - 1e-9) {
        times.push_back(r.total_time_per_meal);
      }
    }
    CHECK(static_cast<double>(times.size()) == t.column("count")[row]);
    std::sort(times.begin(), times.end());
    CHECK(t.column("p5")[row] == quantile_sorted(times, 0.05));
    CHECK(t.column("p50")[row] == quantile_sorted(times, 0.50));
    CHECK(t.column("p95")[row] == quantile_sorted(times, 0.95));
    total += times.size();
  }
  CHECK(total == records.size());
}

TEST_CASE("plot data: constant times give flat quantiles") {
  std::vector<SimRecord> records;
  for (int i = 0; i < 50; ++i) records.push_back({2, static_cast<std::uint64_t>(i), 9, (i % 8) / 8.0 + 5, {}});
  const auto t = emit_plot_data(records, PlotKind::Distribution);
  for (const auto* name : {"p5", "p25", "p50", "p75", "p95"}) {
    for (double v : t.column(name)) CHECK(v == 9.0);
  }
}

TEST_CASE("plot data: spline curve grid") {
  const auto records = run_collect(small_default(3000));
  const auto t = emit_plot_data(records, PlotKind::SplineCurve);
  CHECK(t.rows() == 5 * 200);
  for (double v : t.column("fitted_satisfaction_score")) CHECK(std::isfinite(v));
  TempDir dir;
  const auto path = dir.file("spline.csv");
  write_plot_csv(t, path);
  CHECK(line_count(slurp(path)) == 1001);
  CHECK(slurp(path).rfind("star_level,total_time_per_meal,fitted_satisfaction_score\n", 0) == 0);
}
