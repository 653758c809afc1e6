#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dtrunc/npmle.hpp"
#include "dtrunc/rng.hpp"
#include "dtrunc/sample.hpp"

namespace dtrunc {

enum class CiMethod { percentile, normal };

struct BootstrapOptions {
  int B = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
  CiMethod method = CiMethod::percentile;
  NpmleAlgorithm algorithm = NpmleAlgorithm::selfconsistency;
  NpmleOptions npmle;
  unsigned threads = 1;
  /// Empty: the distinct observed event values.
  std::vector<double> eval_points;
  bool keep_replicates = false;
};

struct BootstrapResult {
  std::vector<double> eval_points;
  std::vector<double> estimate;  ///< F_n at eval_points from the original sample
  std::vector<double> se;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  double level = 0.95;
  int B = 0;
  int failures = 0;
  std::uint64_t seed = 0;
  CiMethod method = CiMethod::percentile;
  std::vector<std::vector<double>> replicates;  ///< B rows when requested
};

/// Resamples records with replacement and refits F_n per resample.
BootstrapResult simple_bootstrap(const TruncatedSample& s, const BootstrapOptions& options = {});

/// Draws X* from F_n and (U*, V*) from K_n, keeping triplets with U* <= X* <= V*.
BootstrapResult obvious_bootstrap(const TruncatedSample& s, const BootstrapOptions& options = {});

// ---------------------------------------------------------------------------
// Shared replicate machinery

/// One replicate statistic vector, or nullopt when the resample must be redrawn.
using ReplicateDraw = std::function<std::optional<std::vector<double>>(CounterRng&)>;

struct ReplicateSet {
  std::vector<std::vector<double>> values;  ///< B rows, replicate b drawn from stream b of the seed
  int failures = 0;
};

/**
 * Runs B replicates, each on its own counter-based stream, so the result does
 * not depend on `threads`. A draw returning nullopt or throwing a
 * DegeneracyError/ConvergenceError is redrawn on the same stream and counted;
 * reaching B failures aborts with DegeneracyError.
 */
ReplicateSet run_replicates(int B, std::uint64_t seed, unsigned threads, const ReplicateDraw& draw);

struct IntervalSummary {
  std::vector<double> se, low, high;
};

/// Per-column SD and percentile or normal limits around `estimate`.
IntervalSummary summarize_replicates(const std::vector<std::vector<double>>& replicates,
                                     std::span<const double> estimate, double level, CiMethod method);

std::vector<std::size_t> resample_indices(std::size_t n, CounterRng& rng);

/// Linear-interpolation quantile of a sorted vector (R type 7).
double quantile_sorted(std::span<const double> sorted, double p);

double sample_sd(std::span<const double> values);

double normal_quantile(double p);
double normal_cdf(double z);

}  // namespace dtrunc
