#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dtrunc/sample.hpp"

namespace dtrunc {

/// G_n evaluated at the distinct observed event values.
struct SamplingProbability {
  std::vector<double> at;
  std::vector<double> value;

  /// Value at an observed event time; throws std::out_of_range otherwise.
  double operator()(double x) const;
};

struct NpmleOptions {
  double tol = 1e-6;  ///< sup-norm change of F_n over observed points
  int max_iter = 10000;
};

/**
 * Converged (or last) iterate of the NPMLE.
 *
 * `window_prob[i]` = F(V_i) - F(U_i-) for the iterate that produced `g`, and
 * `f` is exactly proportional to count_j / g_j, so f, g and the truncation
 * weights 1/window_prob form one consistent triple.
 */
struct NpmleFit {
  StepDistribution f;
  SamplingProbability g;
  std::vector<double> window_prob;
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
  /// Result of existence_check on the input; false means the fit may be non-unique.
  bool existence_ok = true;
};

/// Efron-Petrosian self-consistency iteration 1/f_j = sum_i J_ij / F_i.
NpmleFit npmle_selfconsistency(const TruncatedSample& s, const NpmleOptions& options = {});

/// Alternates F_n from inverse-G weights and G_n from inverse window-probability weights.
NpmleFit npmle_joint(const TruncatedSample& s, const NpmleOptions& options = {});

enum class NpmleAlgorithm { selfconsistency, joint };
NpmleFit npmle(const TruncatedSample& s, NpmleAlgorithm algorithm, const NpmleOptions& options = {});

/// NPMLE of the joint truncation distribution: mass on each observed (U_i, V_i).
struct JointTruncationFit {
  std::vector<std::pair<double, double>> pairs;
  std::vector<double> mass;

  /// K(u, v) = P(U <= u, V <= v).
  double cdf(double u, double v) const;
  /// K(x, inf) - K(x, x-) = P(U <= x <= V).
  double sampling_probability(double x) const;
};

/// Requires a converged fit.
JointTruncationFit shen_k(const TruncatedSample& s, const NpmleFit& fit);

/// 1 / G_n(X_i) per record.
std::vector<double> inverse_sampling_weights(const TruncatedSample& s, const SamplingProbability& g);

/// Conditional log-likelihood sum_j c_j log f_j - sum_i log(F(V_i) - F(U_i-)).
double conditional_loglik(const TruncatedSample& s, const StepDistribution& f);

}  // namespace dtrunc
