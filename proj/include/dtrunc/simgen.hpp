#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dtrunc/rng.hpp"
#include "dtrunc/sample.hpp"

namespace dtrunc {

/// Interval sampling windows U = (1 + tau) xi^rho - tau, V = U + tau, xi ~ U(0, 1).
struct TruncationDesign {
  double rho = 0.5;
  double tau = 0.25;
};

/// X | Z = z has hazard (1/sigma) x^{1/sigma - 1} e^{beta z}, Z ~ Exp(1).
struct CoxScenario {
  double sigma = 0.1;
  double beta = 10.0;
};

struct XLaw {
  enum class Kind { uniform01, cox } kind = Kind::uniform01;
  CoxScenario cox;
};

std::pair<double, double> draw_window(const TruncationDesign& design, CounterRng& rng);
/// (x, z) from the Cox scenario.
std::pair<double, double> draw_cox(const CoxScenario& scenario, CounterRng& rng);

struct GeneratedSample {
  TruncatedSample sample;
  double acceptance_rate = 0.0;
  std::size_t candidates = 0;
  /// Every candidate drawn before truncation, in draw order (covariate z present for the Cox law).
  std::vector<double> pre_x;
  std::vector<double> pre_z;
};

/// Draws candidates until n satisfy U <= X <= V. Throws ConfigError once the
/// running acceptance rate falls below 1e-4 after 1e5 candidates.
GeneratedSample gen_truncated(std::size_t n, const XLaw& law, const TruncationDesign& design, CounterRng& rng);
GeneratedSample gen_truncated(std::size_t n, const XLaw& law, const TruncationDesign& design, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo runner

struct ExperimentConfig {
  /// "table4": Cox estimators ben/nai/man/ren; "table3": bootstrap SE of F_n at the quartiles.
  std::string preset = "table4";
  std::size_t n = 250;
  int trials = 100;
  std::uint64_t seed = 0;
  TruncationDesign design;
  CoxScenario cox;
  /// table4: any of ben, nai, man, ren. table3: any of simple, obvious.
  std::vector<std::string> estimators;
  int B = 99;
  int oracle_trials = 1000;
  std::vector<double> points{0.25, 0.5, 0.75};
  unsigned threads = 1;
};

/// Defaults per preset (estimator list filled in).
ExperimentConfig preset_config(const std::string& preset);

/// key = value lines, '#' comments. Keys: preset (first), scale (desk|full),
/// n, trials, seed, rho, tau, sigma, beta, B, oracle_trials, estimators, points, threads.
ExperimentConfig parse_experiment_config(std::istream& in);

struct ExperimentRow {
  std::string estimator;
  double point = 0.0;  ///< evaluation point (table3); 0 for table4
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double sd = 0.0;   ///< n - 1 divisor; NaN with fewer than 2 trials
  double mse = 0.0;  ///< mean squared deviation from truth
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  int trials_used = 0;
  int trials_failed = 0;
  double acceptance_rate = 0.0;
  /// SD is undefined with fewer than 2 usable trials.
  bool insufficient_trials = false;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Target of the table3 study: Monte Carlo SD of F_n at each point over oracle_trials fresh samples.
std::vector<double> mc_sd_oracle(const ExperimentConfig& config);

}  // namespace dtrunc
