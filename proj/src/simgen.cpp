#include "dtrunc/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <sstream>

#include "dtrunc/cox.hpp"
#include "dtrunc/error.hpp"
#include "dtrunc/npmle.hpp"
#include "dtrunc/parallel.hpp"
#include "dtrunc/resampling.hpp"

namespace dtrunc {

std::pair<double, double> draw_window(const TruncationDesign& design, CounterRng& rng) {
  const double u = (1 + design.tau) * std::pow(rng.uniform(), design.rho) - design.tau;
  return {u, u + design.tau};
}

std::pair<double, double> draw_cox(const CoxScenario& scenario, CounterRng& rng) {
  const double z = rng.exponential(1.0);
  const double x = std::exp(-scenario.beta * scenario.sigma * z) * std::pow(rng.exponential(1.0), scenario.sigma);
  return {x, z};
}

GeneratedSample gen_truncated(std::size_t n, const XLaw& law, const TruncationDesign& design, CounterRng& rng) {
  if (n == 0) throw std::invalid_argument("sample size must be positive");
  if (!(design.rho > 0) || !(design.tau > 0)) throw ConfigError("truncation design needs rho > 0 and tau > 0");
  const bool cox = law.kind == XLaw::Kind::cox;
  if (cox && !(law.cox.sigma > 0)) throw ConfigError("Cox scenario needs sigma > 0");

  GeneratedSample out;
  std::vector<double> x, u, v, z;
  while (x.size() < n) {
    double xi, zi = 0.0;
    if (cox)
      std::tie(xi, zi) = draw_cox(law.cox, rng);
    else
      xi = rng.uniform();
    const auto [ui, vi] = draw_window(design, rng);
    ++out.candidates;
    out.pre_x.push_back(xi);
    if (cox) out.pre_z.push_back(zi);
    if (ui <= xi && xi <= vi) {
      x.push_back(xi);
      u.push_back(ui);
      v.push_back(vi);
      if (cox) z.push_back(zi);
    }
    if (out.candidates % 100000 == 0 &&
        static_cast<double>(x.size()) < 1e-4 * static_cast<double>(out.candidates))
      throw ConfigError("acceptance rate below 1e-4 after " + std::to_string(out.candidates) + " candidates");
  }
  out.acceptance_rate = static_cast<double>(n) / static_cast<double>(out.candidates);
  Eigen::MatrixXd zm;
  if (cox) zm = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  out.sample = TruncatedSample(std::move(x), std::move(u), std::move(v), std::move(zm));
  return out;
}

GeneratedSample gen_truncated(std::size_t n, const XLaw& law, const TruncationDesign& design, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return gen_truncated(n, law, design, rng);
}

ExperimentConfig preset_config(const std::string& preset) {
  ExperimentConfig c;
  c.preset = preset;
  if (preset == "table4") {
    c.estimators = {"ben", "nai", "man", "ren"};
  } else if (preset == "table3") {
    c.estimators = {"simple"};
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected table3 or table4)");
  }
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

double to_double(const std::string& key, const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParseError("config key '" + key + "': '" + value + "' is not a number", line);
}

long long to_int(const std::string& key, const std::string& value, std::size_t line) {
  const double d = to_double(key, value, line);
  if (d != std::floor(d)) throw ParseError("config key '" + key + "' needs an integer", line);
  return static_cast<long long>(d);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> lines;
  std::string raw;
  std::size_t lineno = 0;
  std::string preset = "table4";
  while (std::getline(in, raw)) {
    ++lineno;
    raw = raw.substr(0, raw.find('#'));
    if (trim(raw).empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    auto key = trim(raw.substr(0, eq)), value = trim(raw.substr(eq + 1));
    if (key == "preset")
      preset = value;
    else {
      entries.emplace_back(key, value);
      lines.push_back(lineno);
    }
  }

  ExperimentConfig c = preset_config(preset);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& [key, value] = entries[k];
    const auto line = lines[k];
    if (key == "scale") {
      if (value == "full") c.trials = 250;
      else if (value == "desk") c.trials = 100;
      else throw ParseError("scale must be desk or full", line);
    } else if (key == "n") c.n = static_cast<std::size_t>(to_int(key, value, line));
    else if (key == "trials") c.trials = static_cast<int>(to_int(key, value, line));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, value, line));
    else if (key == "rho") c.design.rho = to_double(key, value, line);
    else if (key == "tau") c.design.tau = to_double(key, value, line);
    else if (key == "sigma") c.cox.sigma = to_double(key, value, line);
    else if (key == "beta") c.cox.beta = to_double(key, value, line);
    else if (key == "B") c.B = static_cast<int>(to_int(key, value, line));
    else if (key == "oracle_trials") c.oracle_trials = static_cast<int>(to_int(key, value, line));
    else if (key == "threads") c.threads = static_cast<unsigned>(to_int(key, value, line));
    else if (key == "estimators") c.estimators = split_list(value);
    else if (key == "points") {
      c.points.clear();
      for (const auto& p : split_list(value)) c.points.push_back(to_double(key, p, line));
    } else
      throw ParseError("unknown config key '" + key + "'", line);
  }
  return c;
}

namespace {

void validate(const ExperimentConfig& c) {
  if (c.n == 0 || c.trials < 1) throw ConfigError("experiment needs n >= 1 and trials >= 1");
  if (c.estimators.empty()) throw ConfigError("no estimators requested");
  const std::vector<std::string> known = c.preset == "table4" ? std::vector<std::string>{"ben", "nai", "man", "ren"}
                                                              : std::vector<std::string>{"simple", "obvious"};
  for (const auto& e : c.estimators)
    if (std::find(known.begin(), known.end(), e) == known.end())
      throw ConfigError("estimator '" + e + "' does not belong to preset " + c.preset);
}

struct TrialOutcome {
  std::optional<std::vector<double>> values;  // estimator-major, then points
  std::size_t candidates = 0;
};

std::vector<double> cox_trial(const ExperimentConfig& c, CounterRng& rng, std::size_t& candidates) {
  const auto gen = gen_truncated(c.n, {XLaw::Kind::cox, c.cox}, c.design, rng);
  candidates = gen.candidates;
  const auto& s = gen.sample;
  std::optional<SamplingProbability> g;
  std::vector<double> out;
  for (const auto& e : c.estimators) {
    if (e == "ben") {
      std::vector<double> x(gen.pre_x.begin(), gen.pre_x.begin() + static_cast<std::ptrdiff_t>(c.n));
      Eigen::MatrixXd z = Eigen::Map<const Eigen::VectorXd>(gen.pre_z.data(), static_cast<Eigen::Index>(c.n));
      const TruncatedSample full(x, x, x, z);
      out.push_back(cox_estimate(full, unit_sampling_probability(full), CoxScheme::naive).beta(0));
    } else if (e == "nai") {
      out.push_back(cox_estimate(s, unit_sampling_probability(s), CoxScheme::naive).beta(0));
    } else {
      if (!g) {
        auto fit = npmle_selfconsistency(s);
        if (!fit.converged) throw ConvergenceError("NPMLE did not converge");
        g = std::move(fit.g);
      }
      out.push_back(cox_estimate(s, *g, e == "man" ? CoxScheme::mandel : CoxScheme::rennert).beta(0));
    }
  }
  return out;
}

std::vector<double> se_trial(const ExperimentConfig& c, std::size_t t, CounterRng& rng, std::size_t& candidates) {
  const auto gen = gen_truncated(c.n, {}, c.design, rng);
  candidates = gen.candidates;
  BootstrapOptions opt;
  opt.B = c.B;
  opt.seed = derive_seed(c.seed, 1'000'000 + t);
  opt.eval_points = c.points;
  std::vector<double> out;
  for (const auto& e : c.estimators) {
    const auto r = e == "simple" ? simple_bootstrap(gen.sample, opt) : obvious_bootstrap(gen.sample, opt);
    out.insert(out.end(), r.se.begin(), r.se.end());
  }
  return out;
}

}  // namespace

std::vector<double> mc_sd_oracle(const ExperimentConfig& c) {
  const auto count = static_cast<std::size_t>(c.oracle_trials);
  std::vector<std::optional<std::vector<double>>> values(count);
  const auto seed = derive_seed(c.seed, 0x5eed);
  parallel_for(count, c.threads, [&](std::size_t k) {
    CounterRng rng(seed, k);
    const auto gen = gen_truncated(c.n, {}, c.design, rng);
    const auto fit = npmle_selfconsistency(gen.sample);
    if (!fit.converged) return;
    std::vector<double> f;
    for (double p : c.points) f.push_back(fit.f.cdf(p));
    values[k] = std::move(f);
  });
  std::vector<double> out;
  for (std::size_t j = 0; j < c.points.size(); ++j) {
    std::vector<double> column;
    for (const auto& v : values)
      if (v) column.push_back((*v)[j]);
    out.push_back(sample_sd(column));
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  const bool cox = config.preset == "table4";
  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<TrialOutcome> outcomes(count);
  parallel_for(count, config.threads, [&](std::size_t t) {
    CounterRng rng(config.seed, t);
    try {
      outcomes[t].values = cox ? cox_trial(config, rng, outcomes[t].candidates)
                               : se_trial(config, t, rng, outcomes[t].candidates);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error&) {
      outcomes[t].values.reset();
    }
  });

  ExperimentReport report;
  report.config = config;
  std::size_t accepted = 0, candidates = 0;
  for (const auto& o : outcomes) {
    if (o.values) ++report.trials_used;
    else ++report.trials_failed;
    if (o.candidates) {
      accepted += config.n;
      candidates += o.candidates;
    }
  }
  report.acceptance_rate = candidates ? static_cast<double>(accepted) / static_cast<double>(candidates) : 0.0;
  report.insufficient_trials = report.trials_used < 2;

  std::vector<double> truths;
  std::vector<double> points;
  if (cox) {
    truths.assign(config.estimators.size(), config.cox.beta);
    points.assign(config.estimators.size(), 0.0);
  } else {
    const auto target = mc_sd_oracle(config);
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      truths.insert(truths.end(), target.begin(), target.end());
      points.insert(points.end(), config.points.begin(), config.points.end());
    }
  }
  const std::size_t per_estimator = cox ? 1 : config.points.size();
  for (std::size_t k = 0; k < truths.size(); ++k) {
    std::vector<double> column;
    for (const auto& o : outcomes)
      if (o.values) column.push_back((*o.values)[k]);
    ExperimentRow row;
    row.estimator = config.estimators[k / per_estimator];
    row.point = points[k];
    row.truth = truths[k];
    if (!column.empty()) {
      double sum = 0, sq = 0;
      for (double v : column) {
        sum += v;
        sq += (v - row.truth) * (v - row.truth);
      }
      row.mean = sum / static_cast<double>(column.size());
      row.bias = row.mean - row.truth;
      row.mse = sq / static_cast<double>(column.size());
    } else {
      row.mean = row.bias = row.mse = std::nan("");
    }
    row.sd = sample_sd(column);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dtrunc
