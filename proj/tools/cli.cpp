#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcf/cafe_sim.hpp"
#include "pcf/coherence.hpp"
#include "pcf/constraints.hpp"
#include "pcf/error.hpp"
#include "pcf/io.hpp"
#include "pcf/rng.hpp"
#include "pcf/spark_space.hpp"
#include "pcf/stats.hpp"

namespace pcf::cli {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path);
}

PartialAssignment parse_fixes(const SparkSpace& space, const std::vector<std::string>& fixes) {
  PartialAssignment fixed;
  for (const auto& f : fixes) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--fix", "expected dim=trait, got '" + f + "'");
    const auto dim = parse_dim(f.substr(0, eq));
    if (!dim) throw CLI::ValidationError("--fix", "unknown dimension in '" + f + "'");
    fixed.set(*dim, f.substr(eq + 1));
  }
  (void)slice_count(space, fixed);  // surfaces UnknownTrait before any output
  return fixed;
}

void print_config_header(std::ostream& out) {
  for (Dim d : kAllDims) out << (d == Dim::Skills ? "" : ",") << dim_key(d);
  out << '\n';
}

void print_config(std::ostream& out, const AgentConfig& c) {
  for (std::size_t i = 0; i < kDimCount; ++i) out << (i ? "," : "") << c.traits[i];
  out << '\n';
}

AgentConfig parse_config(const SparkSpace& space, const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  const auto& assignment = doc.contains("assignment") ? doc["assignment"] : doc;
  AgentConfig cfg;
  for (Dim d : kAllDims) {
    const auto key = std::string(dim_key(d));
    if (!assignment.contains(key) || !assignment[key].is_string()) {
      throw Error(ErrorCode::SchemaError, "config needs a string for '" + key + "'");
    }
    cfg.traits[index_of(d)] = assignment[key].get<std::string>();
  }
  if (doc.contains("intensities")) {
    for (const auto& [key, v] : doc["intensities"].items()) {
      const auto d = parse_dim(key);
      if (!d || !v.is_number_integer()) throw Error(ErrorCode::SchemaError, "intensities." + key);
      const int level = v.get<int>();
      if (level < 1 || level > 10) throw Error(ErrorCode::InvariantViolation, "intensities." + key + " outside [1, 10]");
      cfg.intensities[index_of(*d)] = level;
    }
  }
  (void)space.indices_of(cfg);
  return cfg;
}

ordered_json to_json(const DescriptiveStats& s) {
  return {{"n", s.n},           {"mean", s.mean}, {"median", s.median},         {"min", s.min},
          {"max", s.max},       {"sample_std", s.sample_std}, {"ci99", {s.ci99[0], s.ci99[1]}}};
}

ordered_json to_json(const RegressionFit& f) {
  ordered_json coefs = ordered_json::object();
  for (std::size_t j = 0; j < f.terms.size(); ++j) {
    coefs[f.terms[j]] = {{"coefficient", f.coefficients[j]}, {"std_error", f.std_errors[j]},
                         {"t_stat", f.t_stats[j]},           {"p_value", f.p_values[j]},
                         {"ci95", {f.ci95[j][0], f.ci95[j][1]}}};
  }
  return {{"n_obs", f.n_obs},
          {"df_model", f.df_model},
          {"df_resid", f.df_resid},
          {"terms", f.terms},
          {"coefficients", coefs},
          {"r_squared", f.r_squared},
          {"adj_r_squared", f.adj_r_squared},
          {"f_statistic", f.f_statistic},
          {"f_p_value", f.f_p_value},
          {"log_likelihood", f.log_likelihood},
          {"aic", f.aic},
          {"bic", f.bic}};
}

ordered_json to_json(const Diagnostics& d) {
  return {{"skew", d.skew},
          {"kurtosis", d.kurtosis},
          {"jarque_bera", d.jarque_bera},
          {"jb_p_value", d.jb_p_value},
          {"durbin_watson", d.durbin_watson}};
}

std::string column_name(const std::string& alias) {
  if (alias == "time" || alias == "total_time_per_meal") return "total_time_per_meal";
  if (alias == "satisfaction" || alias == "satisfaction_score") return "satisfaction_score";
  if (alias == "star" || alias == "star_level") return "star_level";
  throw CLI::ValidationError("--ols", "unknown column '" + alias + "'");
}

std::vector<double> column(const std::vector<SimRecord>& records, const std::string& name) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (name == "total_time_per_meal") out.push_back(r.total_time_per_meal);
    else if (name == "satisfaction_score") out.push_back(r.satisfaction_score);
    else out.push_back(r.star_level);
  }
  return out;
}

/// Seeded subsample without replacement (partial Fisher-Yates), original order kept.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  CounterRng rng(mix64(seed));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct SpaceArgs {
  std::string space_path;
  std::vector<std::string> fixes;
  std::optional<std::uint64_t> agents;
  std::optional<std::size_t> limit;
};

struct ValidateArgs {
  std::string space_path;
  std::string constraints_path;
  std::optional<std::string> context;
  std::optional<std::string> config_path;
  bool list = false;
  std::optional<std::size_t> limit;
};

struct SimulateArgs {
  std::string scenario_path;
  std::string out_path;
  std::optional<std::string> manifest_path;
  unsigned workers = 1;
  bool factors = false;
};

struct AnalyzeArgs {
  std::string in_path;
  std::string out_path;
  std::string ols_spec = "time~satisfaction";
  std::optional<std::string> spline_spec;
  std::optional<std::size_t> subsample;
  std::uint64_t subsample_seed = 0;
};

struct PlotArgs {
  std::string in_path;
  std::string out_path;
  std::string fig;
  double bin_width = 0.5;
  std::size_t grid = 200;
};

struct GlueArgs {
  std::string site_path;
  std::string sections_path;
};

struct VerifyArgs {
  std::string manifest_path;
  std::string in_path;
  std::optional<std::string> scenario_path;
};

int space_count(const SpaceArgs& a, std::ostream& out) {
  const auto space = load_space_file(a.space_path);
  const auto fixed = parse_fixes(space, a.fixes);
  BigInt count = slice_count(space, fixed);
  if (a.agents) {
    if (*a.agents == 0) throw Error(ErrorCode::ZeroAgents, "--agents must be at least 1");
    count = boost::multiprecision::pow(count, static_cast<unsigned>(*a.agents));
  }
  out << count << '\n';
  return kOk;
}

int space_enumerate(const SpaceArgs& a, std::ostream& out) {
  const auto space = load_space_file(a.space_path);
  const auto fixed = parse_fixes(space, a.fixes);
  print_config_header(out);
  std::size_t n = 0;
  for (const auto& c : enumerate(space, fixed)) {
    if (a.limit && n >= *a.limit) break;
    print_config(out, c);
    ++n;
  }
  return kOk;
}

int validate(const ValidateArgs& a, std::ostream& out) {
  const auto space = load_space_file(a.space_path);
  const auto constraints = load_constraints_file(space, a.constraints_path);
  const std::optional<std::string_view> ctx = a.context ? std::optional<std::string_view>(*a.context) : std::nullopt;

  if (a.config_path) {
    const auto cfg = parse_config(space, read_file(*a.config_path));
    const auto report = validate_config(cfg, constraints, ctx);
    ordered_json j;
    j["valid"] = report.valid();
    j["violations"] = ordered_json::array();
    for (const auto& v : report.violations) {
      ordered_json atoms = ordered_json::array();
      for (const auto& at : v.atoms) atoms.push_back({std::string(dim_key(at.dim)), at.trait});
      j["violations"].push_back({{"kind", std::string(to_string(v.kind))}, {"atoms", atoms}, {"reason", v.reason}});
    }
    out << j.dump(2) << '\n';
    return report.valid() ? kOk : kDomainFailure;
  }
  if (a.list) {
    print_config_header(out);
    std::size_t n = 0;
    for (const auto& c : filter_space(space, constraints, ctx)) {
      if (a.limit && n >= *a.limit) break;
      print_config(out, c);
      ++n;
    }
    return kOk;
  }
  out << count_valid(space, constraints, ctx) << '\n';
  return kOk;
}

int glue_cmd(const GlueArgs& a, std::ostream& out, std::ostream& err) {
  const auto site = parse_site(read_file(a.site_path));
  const auto sections = parse_sections(read_file(a.sections_path), site);
  if (site.covers.empty()) throw Error(ErrorCode::SchemaError, "site document declares no covers");

  ordered_json result = ordered_json::array();
  bool conflicted = false;
  for (const auto& nc : site.covers) {
    const Cover cover = site.resolve(nc);
    std::vector<LocalSection> local;
    for (const auto& name : nc.family) {
      auto it = sections.find(name);
      if (it == sections.end()) throw Error(ErrorCode::SchemaError, "no section over '" + name + "'");
      local.push_back(it->second);
    }
    const auto glued = glue(cover, local);
    if (!glued.ok()) {
      conflicted = true;
      for (const auto& c : glued.conflicts()) {
        err << "conflict in cover of '" << nc.target << "': " << nc.family[c.first] << " vs " << nc.family[c.second]
            << " on " << dim_key(c.dim) << " (" << to_string(local[c.first].values.at(c.dim)) << " != "
            << to_string(local[c.second].values.at(c.dim)) << ")\n";
      }
      continue;
    }
    ordered_json values = ordered_json::object();
    for (const auto& [d, v] : glued.section().values) {
      if (const auto* s = std::get_if<std::string>(&v)) values[std::string(dim_key(d))] = *s;
      else values[std::string(dim_key(d))] = std::get<double>(v);
    }
    result.push_back({{"target", nc.target}, {"values", values}});
  }
  if (conflicted) return kDomainFailure;
  out << ordered_json{{"glued", result}}.dump(2) << '\n';
  return kOk;
}

int simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  const std::string scenario_text = read_file(a.scenario_path);
  Scenario scenario = parse_scenario(scenario_text);
  if (const char* env = std::getenv("PCF_SEED"); env && *env) {
    char* end = nullptr;
    const auto seed = std::strtoull(env, &end, 10);
    if (*end != '\0') throw CLI::ValidationError("PCF_SEED", "must be an unsigned integer");
    scenario.master_seed = seed;
  }

  RunManifest manifest;
  manifest.master_seed = scenario.master_seed;
  manifest.iterations_per_tier = scenario.iterations_per_tier;
  manifest.tier_count = scenario.tiers.size();
  manifest.scenario_hash = sha256_hex(scenario_text);
  manifest.output_file = a.out_path;
  manifest.started = utc_timestamp();

  std::size_t factor_columns = 0;
  if (a.factors) {
    for (const auto& t : scenario.tiers) factor_columns = std::max(factor_columns, t.factors.size());
  }
  RecordCsvWriter writer(a.out_path, factor_columns);
  const auto summary = run(scenario, {a.workers}, [&](const SimRecord& r) { writer.write(r); });
  manifest.output_digest = writer.finish();
  manifest.record_count = writer.count();
  manifest.finished = utc_timestamp();
  if (a.manifest_path) write_manifest(manifest, *a.manifest_path);

  for (const auto& t : summary.tiers) {
    out << "star_level=" << t.star_level << " records=" << t.count << " mean_time=" << t.mean_time
        << " mean_satisfaction=" << t.mean_satisfaction << '\n';
  }
  out << "records=" << manifest.record_count << " sha256=" << manifest.output_digest << '\n';
  return kOk;
}

int analyze_cmd(const AnalyzeArgs& a, std::ostream& out) {
  const auto records = read_records_csv(a.in_path);
  if (records.empty()) throw Error(ErrorCode::EmptyInput, a.in_path + " holds no records");

  ordered_json report;
  report["tool_version"] = std::string(kToolVersion);
  report["input"] = a.in_path;
  report["n_obs"] = records.size();

  ordered_json by_star = ordered_json::array();
  std::vector<int> levels;
  for (const auto& r : records) {
    if (std::find(levels.begin(), levels.end(), r.star_level) == levels.end()) levels.push_back(r.star_level);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  for (int s : levels) {
    std::vector<double> time, sat;
    for (const auto& r : records) {
      if (r.star_level != s) continue;
      time.push_back(r.total_time_per_meal);
      sat.push_back(r.satisfaction_score);
    }
    by_star.push_back({{"star_level", s},
                       {"total_time_per_meal", to_json(descriptive(time))},
                       {"satisfaction_score", to_json(descriptive(sat))}});
  }
  report["descriptive"] = by_star;

  const auto tilde = a.ols_spec.find('~');
  if (tilde == std::string::npos) throw CLI::ValidationError("--ols", "expected response~predictor");
  const auto response = column_name(a.ols_spec.substr(0, tilde));
  const auto predictor = column_name(a.ols_spec.substr(tilde + 1));
  const auto y = column(records, response);
  const auto x = column(records, predictor);
  const auto design = DesignMatrix::from_columns({std::vector<double>(records.size(), 1.0), x});
  const auto fit = ols(design, y, {"Intercept", predictor});
  auto ols_json = to_json(fit);
  ols_json["dependent"] = response;
  ols_json["diagnostics"] = to_json(diagnostics(fit.residuals));
  report["ols"] = ols_json;

  if (a.spline_spec) {
    int df = 5;
    if (a.spline_spec->rfind("df=", 0) == 0) {
      df = std::stoi(a.spline_spec->substr(3));
    } else {
      throw CLI::ValidationError("--spline", "expected df=N");
    }
    const auto idx = subsample_indices(records.size(), a.subsample.value_or(records.size()), a.subsample_seed);
    std::vector<double> time, star, sat;
    for (auto i : idx) {
      time.push_back(records[i].total_time_per_meal);
      star.push_back(records[i].star_level);
      sat.push_back(records[i].satisfaction_score);
    }
    const auto sf = spline_fit(time, star, sat, df);
    auto sj = to_json(sf.fit);
    sj["dependent"] = "satisfaction_score";
    sj["interior_knots"] = sf.basis.interior_knots();
    sj["boundary"] = {sf.basis.lower(), sf.basis.upper()};
    if (a.subsample) sj["subsample"] = {{"n", idx.size()}, {"seed", a.subsample_seed}};
    report["spline"] = sj;
  }
  write_file(a.out_path, report.dump(2) + "\n");
  out << "wrote " << a.out_path << '\n';
  return kOk;
}

int plot_cmd(const PlotArgs& a, std::ostream& out) {
  const auto kind = parse_plot_kind(a.fig);
  if (!kind) throw CLI::ValidationError("--fig", "expected scatter, distribution or spline");
  const auto records = read_records_csv(a.in_path);
  PlotOptions opts;
  opts.bin_width = a.bin_width;
  opts.grid_points = a.grid;
  const auto table = emit_plot_data(records, *kind, opts);
  write_plot_csv(table, a.out_path);
  out << "wrote " << table.rows() << " rows to " << a.out_path << '\n';
  return kOk;
}

int verify_cmd(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto check = verify_manifest(a.manifest_path, a.in_path, a.scenario_path);
  if (check.ok) {
    out << "manifest verified\n";
    return kOk;
  }
  for (const auto& m : check.mismatches) err << "mismatch: " << m << '\n';
  return kDomainFailure;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::IoError ? kIoFailure : kDomainFailure;
}

}  // namespace

int run_pipeline(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pcf: SPARK configuration spaces, coherence checks and cafe simulation"};
  app.name("pcf");
  app.require_subcommand(1);

  SpaceArgs space_args;
  auto* space = app.add_subcommand("space", "Count or enumerate a SPARK possibility space");
  space->require_subcommand(1);
  auto* count = space->add_subcommand("count", "Print the number of configurations");
  auto* enumer = space->add_subcommand("enumerate", "List configurations as CSV");
  for (auto* sub : {count, enumer}) {
    sub->add_option("--space", space_args.space_path, "Space definition JSON")->required();
    sub->add_option("--fix", space_args.fixes, "Pin a dimension, dim=trait (repeatable)");
  }
  count->add_option("--agents", space_args.agents, "Raise the count to the number of agents");
  enumer->add_option("--limit", space_args.limit, "Stop after N configurations");

  ValidateArgs validate_args;
  auto* val = app.add_subcommand("validate", "Count, list or check configurations against constraints");
  val->add_option("--space", validate_args.space_path)->required();
  val->add_option("--constraints", validate_args.constraints_path)->required();
  val->add_option("--context", validate_args.context);
  val->add_option("--config", validate_args.config_path, "Check one configuration (JSON)");
  val->add_flag("--list", validate_args.list, "List valid configurations as CSV");
  val->add_option("--limit", validate_args.limit);

  GlueArgs glue_args;
  auto* glu = app.add_subcommand("glue", "Glue local sections over the covers of a site");
  glu->add_option("--site", glue_args.site_path)->required();
  glu->add_option("--sections", glue_args.sections_path)->required();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Run the cafe Monte Carlo simulation");
  sim->add_option("--scenario", sim_args.scenario_path)->required();
  sim->add_option("--out", sim_args.out_path, "Records CSV")->required();
  sim->add_option("--manifest", sim_args.manifest_path, "Run manifest JSON");
  sim->add_option("--workers", sim_args.workers)->check(CLI::PositiveNumber);
  sim->add_flag("--factors", sim_args.factors, "Append factor score columns");

  AnalyzeArgs an_args;
  auto* an = app.add_subcommand("analyze", "Descriptive statistics, OLS and spline regression of a records CSV");
  an->add_option("--in", an_args.in_path)->required();
  an->add_option("--out", an_args.out_path, "Report JSON")->required();
  an->add_option("--ols", an_args.ols_spec, "response~predictor")->capture_default_str();
  an->add_option("--spline", an_args.spline_spec, "df=N");
  auto* sub_n = an->add_option("--subsample", an_args.subsample, "Fit the spline on N seeded rows");
  an->add_option("--subsample-seed", an_args.subsample_seed)->needs(sub_n);

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plotdata", "Emit plot-ready tables");
  plot->add_option("--in", plot_args.in_path)->required();
  plot->add_option("--fig", plot_args.fig, "scatter | distribution | spline")->required();
  plot->add_option("--out", plot_args.out_path)->required();
  plot->add_option("--bin-width", plot_args.bin_width, "Satisfaction bin width (distribution)");
  plot->add_option("--grid", plot_args.grid, "Grid points per star level (spline)");

  VerifyArgs verify_args;
  auto* ver = app.add_subcommand("verify", "Check a records CSV against its run manifest");
  ver->add_option("--manifest", verify_args.manifest_path)->required();
  ver->add_option("--in", verify_args.in_path)->required();
  ver->add_option("--scenario", verify_args.scenario_path);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (count->parsed()) return space_count(space_args, out);
    if (enumer->parsed()) return space_enumerate(space_args, out);
    if (val->parsed()) return validate(validate_args, out);
    if (glu->parsed()) return glue_cmd(glue_args, out, err);
    if (sim->parsed()) return simulate_cmd(sim_args, out);
    if (an->parsed()) return analyze_cmd(an_args, out);
    if (plot->parsed()) return plot_cmd(plot_args, out);
    if (ver->parsed()) return verify_cmd(verify_args, out, err);
  } catch (const CLI::ValidationError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  err << app.help();
  return kUsage;
}

}  // namespace pcf::cli
