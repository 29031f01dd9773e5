#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcf/cafe_sim.hpp"

namespace pcf {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kRecordHeader = "star_level,iteration,total_time_per_meal,satisfaction_score";

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  /// Lower-case hex digest; the hasher cannot be updated afterwards.
  std::string finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);
/// Throws IoError.
std::string sha256_file(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Streams records to CSV, hashing the bytes as they are written.
class RecordCsvWriter {
 public:
  /// `factor_columns` > 0 appends factor_0.. columns (blank where a tier has fewer factors).
  RecordCsvWriter(const std::string& path, std::size_t factor_columns = 0);

  /// Throws IoError.
  void write(const SimRecord& record);
  /// Flushes and closes; returns the SHA-256 of the file contents.
  std::string finish();
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

 private:
  void emit(std::string_view bytes);

  std::string path_;
  std::ofstream out_;
  Sha256 hash_;
  std::string line_;
  std::size_t factor_columns_;
  std::uint64_t count_ = 0;
};

/// Header-first CSV, one row per record in the given order. Returns the record count.
std::uint64_t write_records_csv(std::span<const SimRecord> records, const std::string& path,
                                std::size_t factor_columns = 0);
/// Reads a records CSV; factor columns are optional. Errors: IoError, SchemaError.
std::vector<SimRecord> read_records_csv(const std::string& path);

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::uint64_t master_seed = 0;
  std::uint64_t iterations_per_tier = 0;
  std::size_t tier_count = 5;
  std::string scenario_hash;
  std::uint64_t record_count = 0;
  std::string started;
  std::string finished;
  std::string output_file;
  std::string output_digest;
};

/// ISO-8601 UTC timestamp of the current time.
std::string utc_timestamp();

void write_manifest(const RunManifest& manifest, const std::string& path);
/// Errors: IoError, SchemaError.
RunManifest read_manifest(const std::string& path);

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> mismatches;  // field names that failed
};

/// Recomputes the record count and output digest of `records_path` (and the
/// scenario digest when a scenario path is given) and compares with the manifest.
ManifestCheck verify_manifest(const std::string& manifest_path, const std::string& records_path,
                              const std::optional<std::string>& scenario_path = std::nullopt);

enum class PlotKind { Scatter, Distribution, SplineCurve };

std::string_view to_string(PlotKind kind) noexcept;
/// Accepts scatter | distribution | spline (or spline_curve).
std::optional<PlotKind> parse_plot_kind(std::string_view text) noexcept;

struct PlotTable {
  PlotKind kind;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  [[nodiscard]] std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  /// Throws SchemaError for an unknown name.
  [[nodiscard]] const std::vector<double>& column(std::string_view name) const;
};

struct PlotOptions {
  double bin_width = 0.5;          // satisfaction bin width for the distribution table
  std::size_t grid_points = 200;   // time grid per star level for the spline curve
  int spline_df = 5;
};

/// scatter: satisfaction, time and star per record.
/// distribution: time quantiles (p5..p95) per (star, satisfaction bin).
/// spline_curve: fitted spline over a time grid per star level.
/// Errors: EmptyInput for distribution / spline_curve on no records.
PlotTable emit_plot_data(std::span<const SimRecord> records, PlotKind kind, const PlotOptions& options = {});
void write_plot_csv(const PlotTable& table, const std::string& path);

}  // namespace pcf
