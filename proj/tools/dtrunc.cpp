// dtrunc: command-line front end. Every run writes its data files plus a
// manifest.json describing inputs, resolved options and the seed.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "dtrunc/cif.hpp"
#include "dtrunc/cox.hpp"
#include "dtrunc/csv.hpp"
#include "dtrunc/error.hpp"
#include "dtrunc/npmle.hpp"
#include "dtrunc/resampling.hpp"
#include "dtrunc/sample.hpp"
#include "dtrunc/sef.hpp"
#include "dtrunc/simgen.hpp"
#include "dtrunc/tau.hpp"

#ifndef DTRUNC_VERSION
#define DTRUNC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dtrunc;

namespace {

struct Common {
  std::string input;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  double tol = 1e-6;
  int max_iter = 10000;
  std::string x = "x", u = "u", v = "v", event;
  std::vector<std::string> z;
  bool drop_invalid = false;
};

struct Run {
  explicit Run(std::string name) : command(std::move(name)) {}
  std::string command;
  json options = json::object();
  json warnings = json::array();
  std::optional<std::uint64_t> seed;
  std::string input_path;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open input file '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t resolve_seed(const Common& c, Run& run) {
  std::uint64_t seed;
  if (c.seed) {
    seed = *c.seed;
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    run.warnings.push_back("no --seed given; generated seed " + std::to_string(seed));
  }
  run.seed = seed;
  return seed;
}

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.out_dir) / name; }

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  std::ofstream out(out_path(c, name), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path(c, name).string());
  return out;
}

void write_json(const Common& c, const std::string& name, const json& j) { open_out(c, name) << j.dump(2) << "\n"; }

void write_manifest(const Common& c, const Run& run) {
  json m;
  m["command"] = run.command;
  m["tool_version"] = DTRUNC_VERSION;
  m["options"] = run.options;
  if (!run.input_path.empty()) m["input"] = {{"path", run.input_path}, {"sha256", sha256_file(run.input_path)}};
  m["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  m["warnings"] = run.warnings;
  m["timestamp"] = utc_now();
  write_json(c, "manifest.json", m);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

TruncatedSample load(const Common& c, Run& run) {
  LoadOptions opt;
  opt.columns = {c.x, c.u, c.v, c.z, c.event};
  opt.drop_invalid = c.drop_invalid;
  auto r = load_sample(c.input, opt);
  run.input_path = c.input;
  if (!r.dropped_rows.empty()) {
    std::string rows;
    for (auto row : r.dropped_rows) rows += (rows.empty() ? "" : ",") + std::to_string(row);
    run.warnings.push_back("dropped " + std::to_string(r.dropped_rows.size()) + " invalid rows: " + rows);
  }
  return std::move(r.sample);
}

NpmleOptions npmle_options(const Common& c) { return {c.tol, c.max_iter}; }

void record_common(const Common& c, Run& run) {
  run.options["input"] = c.input;
  run.options["threads"] = c.threads;
  run.options["tol"] = c.tol;
  run.options["max_iter"] = c.max_iter;
  run.options["columns"] = {{"x", c.x}, {"u", c.u}, {"v", c.v}, {"z", c.z}, {"event", c.event}};
  run.options["drop_invalid"] = c.drop_invalid;
}

void add_common(CLI::App* app, Common& c, bool needs_input = true) {
  auto* in = app->add_option("--input,-i", c.input, "Input table (CSV or whitespace)")->envname("DTRUNC_INPUT");
  if (needs_input) in->required();
  app->add_option("--out-dir,-o", c.out_dir, "Output directory")->envname("DTRUNC_OUT_DIR")->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed (generated and recorded when absent)")->envname("DTRUNC_SEED");
  app->add_option("--threads", c.threads, "Worker threads")->envname("DTRUNC_THREADS")->capture_default_str();
  app->add_option("--tol", c.tol, "NPMLE tolerance (sup-norm change of F)")->envname("DTRUNC_TOL")->capture_default_str();
  app->add_option("--max-iter", c.max_iter, "NPMLE iteration cap")->envname("DTRUNC_MAX_ITER")->capture_default_str();
  app->add_option("--x-col", c.x, "Column holding X")->capture_default_str();
  app->add_option("--u-col", c.u, "Column holding U")->capture_default_str();
  app->add_option("--v-col", c.v, "Column holding V")->capture_default_str();
  app->add_option("--z-cols", c.z, "Covariate columns (default: z, z1, z2, ...)")->delimiter(',');
  app->add_option("--event-col", c.event, "Event-type column (default: event)");
  app->add_flag("--drop-invalid", c.drop_invalid, "Drop rows violating U <= X <= V");
}

NpmleAlgorithm parse_algo(const std::string& s) {
  return s == "joint" ? NpmleAlgorithm::joint : NpmleAlgorithm::selfconsistency;
}

// ---------------------------------------------------------------------------

void cmd_estimate(const Common& c, const std::string& algo) {
  Run run{"estimate"};
  record_common(c, run);
  run.options["algo"] = algo;
  const auto s = load(c, run);
  const auto fit = npmle(s, parse_algo(algo), npmle_options(c));
  if (!fit.existence_ok) run.warnings.push_back("existence condition fails; the NPMLE may not exist or be unique");
  if (!fit.converged) {
    write_manifest(c, run);
    throw ConvergenceError("NPMLE did not converge in " + std::to_string(fit.iterations) +
                           " iterations (last change " + format_number(fit.final_change) + ")");
  }
  {
    auto out = open_out(c, "cdf.csv");
    CsvWriter csv(out);
    csv.header({"time", "mass", "cdf", "g"});
    for (std::size_t j = 0; j < fit.f.size(); ++j)
      csv.row({fit.f.support()[j], fit.f.mass()[j], fit.f.cumulative()[j], fit.g.value[j]});
  }
  {
    const auto k = shen_k(s, fit);
    auto out = open_out(c, "truncation.csv");
    CsvWriter csv(out);
    csv.header({"u", "v", "mass"});
    for (std::size_t i = 0; i < k.pairs.size(); ++i) csv.row({k.pairs[i].first, k.pairs[i].second, k.mass[i]});
  }
  write_json(c, "fit.json",
             {{"n", s.size()},
              {"support_points", fit.f.size()},
              {"algorithm", algo},
              {"iterations", fit.iterations},
              {"final_change", fit.final_change},
              {"converged", fit.converged},
              {"existence_ok", fit.existence_ok},
              {"loglik", num(conditional_loglik(s, fit.f))}});
  write_manifest(c, run);
}

void cmd_bootstrap(const Common& c, const std::string& kind, const std::string& ci, const std::string& algo, int B,
                   double level, const std::vector<double>& points, bool replicates) {
  Run run{"bootstrap"};
  record_common(c, run);
  run.options["method"] = kind;
  run.options["ci"] = ci;
  run.options["algo"] = algo;
  run.options["B"] = B;
  run.options["level"] = level;
  run.options["points"] = points;
  const auto s = load(c, run);
  BootstrapOptions opt;
  opt.B = B;
  opt.level = level;
  opt.seed = resolve_seed(c, run);
  opt.method = ci == "normal" ? CiMethod::normal : CiMethod::percentile;
  opt.algorithm = parse_algo(algo);
  opt.npmle = npmle_options(c);
  opt.threads = c.threads;
  opt.eval_points = points;
  opt.keep_replicates = replicates;
  const auto r = kind == "obvious" ? obvious_bootstrap(s, opt) : simple_bootstrap(s, opt);
  {
    auto out = open_out(c, "bootstrap.csv");
    CsvWriter csv(out);
    csv.header({"time", "estimate", "se", "ci_low", "ci_high"});
    for (std::size_t j = 0; j < r.eval_points.size(); ++j)
      csv.row({r.eval_points[j], r.estimate[j], r.se[j], r.ci_low[j], r.ci_high[j]});
  }
  if (replicates) {
    auto out = open_out(c, "bootstrap_replicates.csv");
    CsvWriter csv(out);
    std::vector<std::string> names;
    for (double p : r.eval_points) names.push_back("F(" + format_number(p) + ")");
    csv.header(names);
    for (const auto& row : r.replicates) csv.row(row);
  }
  write_json(c, "bootstrap.json",
             {{"method", kind}, {"ci", ci}, {"B", r.B}, {"failures", r.failures}, {"level", r.level}, {"seed", r.seed}});
  write_manifest(c, run);
}

void cmd_cox(const Common& c, const std::string& scheme, int B, bool replicates) {
  Run run{"cox"};
  record_common(c, run);
  run.options["scheme"] = scheme;
  run.options["B"] = B;
  const auto s = load(c, run);
  CoxFitOptions opt;
  opt.scheme = parse_cox_scheme(scheme);
  opt.B = B;
  opt.seed = B > 0 ? resolve_seed(c, run) : c.seed.value_or(0);
  if (B == 0) run.seed = opt.seed;
  opt.threads = c.threads;
  opt.npmle = npmle_options(c);
  opt.keep_replicates = replicates;
  const auto fit = cox_fit(s, opt);
  json coefs = json::array();
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k)
    coefs.push_back({{"name", fit.names[static_cast<std::size_t>(k)]},
                     {"estimate", fit.beta(k)},
                     {"se", num(fit.se(k))},
                     {"p", num(fit.pvalue(k))}});
  write_json(c, "cox.json",
             {{"scheme", scheme},
              {"coefficients", coefs},
              {"iterations", fit.iterations},
              {"converged", fit.converged},
              {"B", fit.B},
              {"failures", fit.failures},
              {"seed", fit.seed}});
  if (replicates && !fit.replicates.empty()) {
    auto out = open_out(c, "cox_replicates.csv");
    CsvWriter csv(out);
    csv.header(fit.names);
    for (const auto& row : fit.replicates) csv.row(row);
  }
  write_manifest(c, run);
}

void cmd_cif(const Common& c, const std::string& method, int B, double level, std::size_t merge_below, int merged_label,
             bool long_format) {
  Run run{"cif"};
  record_common(c, run);
  run.options["method"] = method;
  run.options["B"] = B;
  run.options["level"] = level;
  run.options["merge_below"] = merge_below;
  run.options["merged_label"] = merged_label;
  auto s = load(c, run);
  if (!s.has_events()) throw ParseError("cif needs an event-type column");
  if (merge_below > 0) s = s.with_events(merge_rare_types(s.event(), merge_below, merged_label));
  CifOptions opt;
  opt.method = parse_cif_method(method);
  opt.B = B;
  opt.level = level;
  opt.seed = B >= 2 ? resolve_seed(c, run) : c.seed.value_or(0);
  if (B < 2) run.seed = opt.seed;
  opt.threads = c.threads;
  opt.npmle = npmle_options(c);
  const auto r = cif(s, opt);
  const bool bands = !r.se.empty();
  auto write_rows = [&](CsvWriter& csv, std::size_t j, bool with_type) {
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      std::vector<double> row{r.times[k], r.cif[j][k]};
      if (bands) row.insert(row.end(), {r.se[j][k], r.ci_low[j][k], r.ci_high[j][k]});
      if (with_type)
        csv.row(std::to_string(r.types[j]), row);
      else
        csv.row(row);
    }
  };
  std::vector<std::string> cols{"time", "cif"};
  if (bands) cols.insert(cols.end(), {"se", "ci_low", "ci_high"});
  if (long_format) {
    auto out = open_out(c, "cif_long.csv");
    CsvWriter csv(out);
    std::vector<std::string> named{"type"};
    named.insert(named.end(), cols.begin(), cols.end());
    csv.header(named);
    for (std::size_t j = 0; j < r.types.size(); ++j) write_rows(csv, j, true);
  } else {
    for (std::size_t j = 0; j < r.types.size(); ++j) {
      auto out = open_out(c, "cif_type" + std::to_string(r.types[j]) + ".csv");
      CsvWriter csv(out);
      csv.header(cols);
      write_rows(csv, j, false);
    }
  }
  json types = json::array();
  for (std::size_t j = 0; j < r.types.size(); ++j)
    types.push_back({{"type", r.types[j]}, {"n", r.group_sizes[j]}, {"cif_at_max", r.cif[j].back()}});
  write_json(c, "cif.json",
             {{"method", method}, {"types", types}, {"B", r.B}, {"failures", r.failures}, {"level", r.level},
              {"seed", r.seed}});
  write_manifest(c, run);
}

void cmd_indeptest(const Common& c, int B) {
  Run run{"indeptest"};
  record_common(c, run);
  run.options["B"] = B;
  const auto s = load(c, run);
  TauTestOptions opt;
  opt.B = B;
  opt.seed = resolve_seed(c, run);
  opt.threads = c.threads;
  const auto t = kendall_tau_test(s, opt);
  write_json(c, "indeptest.json",
             {{"tau", t.tau}, {"n_comparable", t.n_comparable}, {"se", t.se}, {"p", t.pvalue}, {"B", t.B},
              {"failures", t.failures}, {"seed", t.seed}});
  write_manifest(c, run);
}

void cmd_sef(const Common& c, int grid) {
  Run run{"sef"};
  record_common(c, run);
  run.options["grid"] = grid;
  const auto s = load(c, run);
  const auto fit = sef_fit(s);
  write_json(c, "sef.json", {{"eta", fit.eta}, {"a", fit.a}, {"b", fit.b}, {"loglik", fit.loglik}, {"aic", fit.aic}});
  auto out = open_out(c, "sef_cdf.csv");
  CsvWriter csv(out);
  csv.header({"time", "cdf"});
  for (int k = 0; k <= grid; ++k) {
    const double t = fit.a + (fit.b - fit.a) * k / grid;
    csv.row({t, sef_cdf(fit, t)});
  }
  write_manifest(c, run);
}

void cmd_diagnose(const Common& c, const std::string& group_col, int grid) {
  Run run{"diagnose"};
  Common cc = c;
  if (!group_col.empty()) cc.event = group_col;
  record_common(cc, run);
  run.options["group_col"] = group_col;
  const auto s = load(cc, run);
  const auto e = existence_check(s);
  json report{{"n", s.size()}, {"ok", e.ok}, {"violating_indices", e.violating_indices}, {"s1", e.s1}, {"s2", e.s2}};
  if (!group_col.empty()) {
    if (!s.has_events()) throw ParseError("group column '" + group_col + "' not found");
    const auto groups = g_by_group(s, s.event(), npmle_options(c));
    const double lo = *std::min_element(s.x().begin(), s.x().end());
    const double hi = *std::max_element(s.x().begin(), s.x().end());
    std::vector<double> points;
    for (int k = 0; k <= grid; ++k) points.push_back(lo + (hi - lo) * k / grid);
    auto out = open_out(c, "group_g.csv");
    CsvWriter csv(out);
    csv.header({"group", "time", "g"});
    json summary = json::array();
    for (const auto& g : groups) {
      summary.push_back({{"group", g.label}, {"n", g.size}, {"fitted", g.truncation.has_value()}, {"warning", g.warning}});
      if (!g.warning.empty()) run.warnings.push_back("group " + std::to_string(g.label) + ": " + g.warning);
      if (!g.truncation) continue;
      for (double t : points) csv.row(std::to_string(g.label), std::vector<double>{t, g.truncation->sampling_probability(t)});
    }
    report["groups"] = summary;
    report["max_group_gap"] = max_group_gap(groups, points);
  }
  write_json(c, "diagnose.json", report);
  write_manifest(c, run);
}

void cmd_simulate(const Common& c, const std::string& preset, const std::string& config_path,
                  std::optional<std::size_t> n, std::optional<int> trials, std::optional<int> B, bool full_scale) {
  Run run{"simulate"};
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ParseError("cannot open config '" + config_path + "'");
    cfg = parse_experiment_config(in);
    run.input_path = config_path;
  } else {
    cfg = preset_config(preset);
  }
  if (full_scale) cfg.trials = 250;
  if (n) cfg.n = *n;
  if (trials) cfg.trials = *trials;
  if (B) cfg.B = *B;
  cfg.seed = resolve_seed(c, run);
  cfg.threads = c.threads;
  run.options = {{"preset", cfg.preset}, {"n", cfg.n}, {"trials", cfg.trials}, {"B", cfg.B},
                 {"rho", cfg.design.rho}, {"tau", cfg.design.tau}, {"sigma", cfg.cox.sigma}, {"beta", cfg.cox.beta},
                 {"estimators", cfg.estimators}, {"points", cfg.points}, {"oracle_trials", cfg.oracle_trials},
                 {"threads", cfg.threads}};
  const auto r = run_experiment(cfg);
  if (r.insufficient_trials) run.warnings.push_back("fewer than 2 usable trials; SD undefined");
  {
    auto out = open_out(c, "report.csv");
    CsvWriter csv(out);
    csv.header({"estimator", "point", "truth", "mean", "bias", "sd", "mse"});
    for (const auto& row : r.rows)
      csv.row(row.estimator, std::vector<double>{row.point, row.truth, row.mean, row.bias, row.sd, row.mse});
  }
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"estimator", row.estimator}, {"point", row.point}, {"truth", row.truth}, {"bias", num(row.bias)},
                    {"sd", num(row.sd)}, {"mse", num(row.mse)}});
  write_json(c, "report.json",
             {{"preset", cfg.preset}, {"rows", rows}, {"trials_used", r.trials_used},
              {"trials_failed", r.trials_failed}, {"acceptance_rate", r.acceptance_rate},
              {"insufficient_trials", r.insufficient_trials}, {"seed", cfg.seed}});
  write_manifest(c, run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation and inference for doubly truncated data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DTRUNC_VERSION);

  Common common;
  std::string algo = "selfconsistency";
  const auto algo_check = CLI::IsMember({"selfconsistency", "joint"});

  auto* est = app.add_subcommand("estimate", "NPMLE of F, sampling probabilities G and the truncation law K");
  add_common(est, common);
  est->add_option("--algo", algo, "selfconsistency | joint")->check(algo_check)->envname("DTRUNC_ALGO")->capture_default_str();

  auto* boot = app.add_subcommand("bootstrap", "Bootstrap standard errors and pointwise limits for F");
  add_common(boot, common);
  int B = -1;
  double level = 0.95;
  std::string boot_method = "simple", ci = "percentile";
  std::vector<double> points;
  bool replicates = false;
  boot->add_option("--algo", algo, "selfconsistency | joint")->check(algo_check)->envname("DTRUNC_ALGO");
  boot->add_option("--B", B, "Resamples (default 500)")->envname("DTRUNC_B");
  boot->add_option("--level", level, "Confidence level")->envname("DTRUNC_LEVEL")->capture_default_str();
  boot->add_option("--method", boot_method, "simple | obvious")->check(CLI::IsMember({"simple", "obvious"}))->capture_default_str();
  boot->add_option("--ci", ci, "percentile | normal")->check(CLI::IsMember({"percentile", "normal"}))->capture_default_str();
  boot->add_option("--points", points, "Evaluation points (default: observed X)")->delimiter(',');
  boot->add_flag("--replicates", replicates, "Also write the replicate matrix");

  auto* cox = app.add_subcommand("cox", "Cox regression with inverse sampling-probability weights");
  add_common(cox, common);
  std::string scheme = "mandel";
  cox->add_option("--scheme", scheme, "mandel | rennert | naive")
      ->check(CLI::IsMember({"mandel", "rennert", "naive"}))
      ->envname("DTRUNC_SCHEME")
      ->capture_default_str();
  cox->add_option("--B", B, "Bootstrap resamples for standard errors (default 199, 0 = none)")->envname("DTRUNC_B");
  cox->add_flag("--replicates", replicates, "Also write bootstrap replicate estimates");

  auto* cif_cmd = app.add_subcommand("cif", "Cumulative incidence per event type");
  add_common(cif_cmd, common);
  std::string cif_method = "indep";
  std::size_t merge_below = 0;
  int merged_label = 0;
  bool long_format = false;
  cif_cmd->add_option("--method", cif_method, "indep | dep")->check(CLI::IsMember({"indep", "dep"}))->capture_default_str();
  cif_cmd->add_option("--B", B, "Bootstrap resamples for bands (default 300, <2 = none)")->envname("DTRUNC_B");
  cif_cmd->add_option("--level", level, "Confidence level")->envname("DTRUNC_LEVEL");
  cif_cmd->add_option("--merge-below", merge_below, "Merge event types with fewer records into --merged-label");
  cif_cmd->add_option("--merged-label", merged_label, "Label for merged rare types")->capture_default_str();
  cif_cmd->add_flag("--long", long_format, "One long-format CSV with a type column");

  auto* tau = app.add_subcommand("indeptest", "Conditional Kendall's tau test of quasi-independence");
  add_common(tau, common);
  tau->add_option("--B", B, "Bootstrap resamples for the p-value (default 200)")->envname("DTRUNC_B");

  auto* sef = app.add_subcommand("sef", "One-parameter exponential tilt model on the sample range");
  add_common(sef, common);
  int grid = 100;
  sef->add_option("--grid", grid, "Points in the exported cdf curve")->check(CLI::PositiveNumber)->capture_default_str();

  auto* diag = app.add_subcommand("diagnose", "Existence condition counts and per-group sampling probabilities");
  add_common(diag, common);
  std::string group_col;
  diag->add_option("--group-col", group_col, "Column with group labels for G overlays");
  diag->add_option("--grid", grid, "Points per group curve")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the simulation designs");
  add_common(sim, common, false);
  std::string preset = "table4", config_path;
  std::optional<std::size_t> sim_n;
  std::optional<int> trials;
  bool full_scale = false;
  sim->add_option("--preset", preset, "table3 | table4")->check(CLI::IsMember({"table3", "table4"}))->capture_default_str();
  sim->add_option("--config", config_path, "key = value experiment file");
  sim->add_option("--n", sim_n, "Sample size");
  sim->add_option("--trials", trials, "Monte Carlo trials");
  sim->add_option("--B", B, "Bootstrap resamples (table3)")->envname("DTRUNC_B");
  sim->add_flag("--full-scale", full_scale, "250 trials instead of the desk-scale 100");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::parse);
  }

  try {
    if (*est) cmd_estimate(common, algo);
    else if (*boot) cmd_bootstrap(common, boot_method, ci, algo, B < 0 ? 500 : B, level, points, replicates);
    else if (*cox) cmd_cox(common, scheme, B < 0 ? 199 : B, replicates);
    else if (*cif_cmd) cmd_cif(common, cif_method, B < 0 ? 300 : B, level, merge_below, merged_label, long_format);
    else if (*tau) cmd_indeptest(common, B < 0 ? 200 : B);
    else if (*sef) cmd_sef(common, grid);
    else if (*diag) cmd_diagnose(common, group_col, grid);
    else if (*sim) cmd_simulate(common, preset, config_path, sim_n, trials, B < 0 ? std::nullopt : std::optional<int>(B), full_scale);
  } catch (const Error& e) {
    std::cerr << "dtrunc: " << e.what() << "\n";
    if (const auto* v = dynamic_cast<const ValidationError*>(&e); v && !v->rows().empty()) {
      std::cerr << "  offending records (0-based):";
      for (auto r : v->rows()) std::cerr << " " << r;
      std::cerr << "\n";
    }
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "dtrunc: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::validation);
  } catch (const std::exception& e) {
    std::cerr << "dtrunc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
