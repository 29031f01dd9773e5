#include "pcf/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcf/error.hpp"
#include "pcf/stats.hpp"

namespace pcf {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  bool finished = false;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "cannot initialise SHA-256");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::string_view bytes) {
  if (impl_->finished) throw Error(ErrorCode::IoError, "hash already finished");
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

std::string Sha256::finish() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md, &len);
  impl_->finished = true;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0F]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.finish();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update({buf.data(), static_cast<std::size_t>(in.gcount())});
  }
  return h.finish();
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, end};
}

RecordCsvWriter::RecordCsvWriter(const std::string& path, std::size_t factor_columns)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), factor_columns_(factor_columns) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path);
  std::string header(kRecordHeader);
  for (std::size_t i = 0; i < factor_columns_; ++i) header += ",factor_" + std::to_string(i);
  header += '\n';
  emit(header);
}

void RecordCsvWriter::emit(std::string_view bytes) {
  out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw Error(ErrorCode::IoError, "write failed on " + path_);
  hash_.update(bytes);
}

void RecordCsvWriter::write(const SimRecord& r) {
  line_.clear();
  line_ += std::to_string(r.star_level);
  line_ += ',';
  line_ += std::to_string(r.iteration);
  line_ += ',';
  line_ += std::to_string(r.total_time_per_meal);
  line_ += ',';
  line_ += format_double(r.satisfaction_score);
  for (std::size_t i = 0; i < factor_columns_; ++i) {
    line_ += ',';
    if (i < r.factor_scores.size()) line_ += std::to_string(r.factor_scores[i]);
  }
  line_ += '\n';
  emit(line_);
  ++count_;
}

std::string RecordCsvWriter::finish() {
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "flush failed on " + path_);
  out_.close();
  return hash_.finish();
}

std::uint64_t write_records_csv(std::span<const SimRecord> records, const std::string& path,
                                std::size_t factor_columns) {
  RecordCsvWriter w(path, factor_columns);
  for (const auto& r : records) w.write(r);
  w.finish();
  return w.count();
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::SchemaError,
                "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<SimRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  const auto expected = split(kRecordHeader, ',');
  if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw Error(ErrorCode::SchemaError, path + ": header must start with " + std::string(kRecordHeader));
  }
  const std::size_t factor_columns = header.size() - expected.size();
  for (std::size_t i = 0; i < factor_columns; ++i) {
    if (header[expected.size() + i] != "factor_" + std::to_string(i)) {
      throw Error(ErrorCode::SchemaError, path + ": unexpected column '" + std::string(header[expected.size() + i]) + "'");
    }
  }

  std::vector<SimRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " fields");
    }
    SimRecord r;
    r.star_level = parse_field<int>(f[0], line_no);
    r.iteration = parse_field<std::uint64_t>(f[1], line_no);
    r.total_time_per_meal = parse_field<int>(f[2], line_no);
    r.satisfaction_score = parse_field<double>(f[3], line_no);
    for (std::size_t i = 0; i < factor_columns; ++i) {
      const auto field = f[expected.size() + i];
      if (field.empty()) continue;
      r.factor_scores.push_back(static_cast<std::uint8_t>(parse_field<unsigned>(field, line_no)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["tool_version"] = m.tool_version;
  j["master_seed"] = m.master_seed;
  j["iterations_per_tier"] = m.iterations_per_tier;
  j["tier_count"] = m.tier_count;
  j["scenario_hash"] = m.scenario_hash;
  j["record_count"] = m.record_count;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["output_file"] = m.output_file;
  j["output_digest"] = m.output_digest;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.iterations_per_tier = j.at("iterations_per_tier").get<std::uint64_t>();
    m.tier_count = j.value("tier_count", std::size_t{5});
    m.scenario_hash = j.at("scenario_hash").get<std::string>();
    m.record_count = j.at("record_count").get<std::uint64_t>();
    m.started = j.value("started", std::string{});
    m.finished = j.value("finished", std::string{});
    m.output_file = j.value("output_file", std::string{});
    m.output_digest = j.at("output_digest").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

ManifestCheck verify_manifest(const std::string& manifest_path, const std::string& records_path,
                              const std::optional<std::string>& scenario_path) {
  const auto m = read_manifest(manifest_path);
  ManifestCheck check;
  auto fail = [&](std::string field) {
    check.ok = false;
    check.mismatches.push_back(std::move(field));
  };

  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + records_path);
  std::uint64_t lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  const std::uint64_t rows = lines > 0 ? lines - 1 : 0;
  if (rows != m.record_count || m.record_count != m.tier_count * m.iterations_per_tier) fail("record_count");
  if (sha256_file(records_path) != m.output_digest) fail("output_digest");
  if (scenario_path && sha256_file(*scenario_path) != m.scenario_hash) fail("scenario_hash");
  return check;
}

std::string_view to_string(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::Scatter: return "scatter";
    case PlotKind::Distribution: return "distribution";
    case PlotKind::SplineCurve: return "spline_curve";
  }
  return "unknown";
}

std::optional<PlotKind> parse_plot_kind(std::string_view text) noexcept {
  if (text == "scatter") return PlotKind::Scatter;
  if (text == "distribution") return PlotKind::Distribution;
  if (text == "spline" || text == "spline_curve") return PlotKind::SplineCurve;
  return std::nullopt;
}

const std::vector<double>& PlotTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw Error(ErrorCode::SchemaError, "no plot column '" + std::string(name) + "'");
}

namespace {

PlotTable scatter(std::span<const SimRecord> records) {
  PlotTable t{PlotKind::Scatter, {"satisfaction_score", "total_time_per_meal", "star_level"}, {{}, {}, {}}};
  for (auto& c : t.columns) c.reserve(records.size());
  for (const auto& r : records) {
    t.columns[0].push_back(r.satisfaction_score);
    t.columns[1].push_back(r.total_time_per_meal);
    t.columns[2].push_back(r.star_level);
  }
  return t;
}

PlotTable distribution(std::span<const SimRecord> records, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvariantViolation, "bin width must be positive");
  std::map<std::pair<int, long>, std::vector<double>> groups;
  for (const auto& r : records) {
    // the epsilon keeps exact bin edges such as 7/15 * 15 from falling one bin low
    const long bin = static_cast<long>(std::floor(r.satisfaction_score / bin_width + 1e-9));
    groups[{r.star_level, bin}].push_back(r.total_time_per_meal);
  }
  PlotTable t{PlotKind::Distribution,
              {"star_level", "sat_bin_lower", "sat_bin_upper", "count", "p5", "p25", "p50", "p75", "p95"},
              std::vector<std::vector<double>>(9)};
  constexpr std::array<double, 5> kQ{0.05, 0.25, 0.50, 0.75, 0.95};
  for (auto& [key, times] : groups) {
    std::sort(times.begin(), times.end());
    t.columns[0].push_back(key.first);
    t.columns[1].push_back(static_cast<double>(key.second) * bin_width);
    t.columns[2].push_back(static_cast<double>(key.second + 1) * bin_width);
    t.columns[3].push_back(static_cast<double>(times.size()));
    for (std::size_t q = 0; q < kQ.size(); ++q) t.columns[4 + q].push_back(quantile_sorted(times, kQ[q]));
  }
  return t;
}

PlotTable spline_curve(std::span<const SimRecord> records, const PlotOptions& options) {
  std::vector<double> time, star, sat;
  time.reserve(records.size());
  star.reserve(records.size());
  sat.reserve(records.size());
  std::map<int, std::pair<double, double>> range;
  for (const auto& r : records) {
    time.push_back(r.total_time_per_meal);
    star.push_back(r.star_level);
    sat.push_back(r.satisfaction_score);
    auto [it, fresh] = range.try_emplace(r.star_level, r.total_time_per_meal, r.total_time_per_meal);
    if (!fresh) {
      it->second.first = std::min<double>(it->second.first, r.total_time_per_meal);
      it->second.second = std::max<double>(it->second.second, r.total_time_per_meal);
    }
  }
  const auto fit = spline_fit(time, star, sat, options.spline_df);
  PlotTable t{PlotKind::SplineCurve, {"star_level", "total_time_per_meal", "fitted_satisfaction_score"},
              std::vector<std::vector<double>>(3)};
  const std::size_t g = std::max<std::size_t>(options.grid_points, 2);
  for (const auto& [s, mm] : range) {
    for (std::size_t k = 0; k < g; ++k) {
      const double x = k + 1 == g ? mm.second
                                  : mm.first + (mm.second - mm.first) * static_cast<double>(k) / static_cast<double>(g - 1);
      t.columns[0].push_back(s);
      t.columns[1].push_back(x);
      t.columns[2].push_back(fit.predict(s, x));
    }
  }
  return t;
}

}  // namespace

PlotTable emit_plot_data(std::span<const SimRecord> records, PlotKind kind, const PlotOptions& options) {
  switch (kind) {
    case PlotKind::Scatter:
      return scatter(records);
    case PlotKind::Distribution:
      if (records.empty()) throw Error(ErrorCode::EmptyInput, "distribution table needs records");
      return distribution(records, options.bin_width);
    case PlotKind::SplineCurve:
      if (records.empty()) throw Error(ErrorCode::EmptyInput, "spline curve needs records");
      return spline_curve(records, options);
  }
  throw Error(ErrorCode::SchemaError, "unknown plot kind");
}

void write_plot_csv(const PlotTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (std::size_t c = 0; c < table.names.size(); ++c) out << (c ? "," : "") << table.names[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.columns[c][r]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path);
}

}  // namespace pcf
