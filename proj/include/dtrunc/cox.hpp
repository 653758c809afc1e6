#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dtrunc/npmle.hpp"
#include "dtrunc/sample.hpp"

namespace dtrunc {

/// mandel: inverse-G weights inside the risk sets.
/// rennert: additionally weights each subject's score term by 1/G(X_i).
/// naive: ignores truncation (G = 1).
enum class CoxScheme { mandel, rennert, naive };

const char* to_string(CoxScheme scheme);
CoxScheme parse_cox_scheme(const std::string& name);

struct CoxOptions {
  int max_iter = 50;
  double tol = 1e-8;  ///< on the sup-norm of the score
  int max_halvings = 20;
  /// |beta_k| * sd(Z_k) beyond this is reported as a monotone-likelihood divergence.
  double divergence_bound = 25.0;
};

/**
 * Weighted Cox score
 *   U(beta) = sum_i a_i [Z_i - sum_{j: X_j >= X_i} r_j e^{beta'Z_j} Z_j / sum_{j: X_j >= X_i} r_j e^{beta'Z_j}]
 * with r_j = 1/G(X_j) (naive: 1) and a_i = 1/G(X_i) for rennert, 1 otherwise.
 * Tied event values share one inclusive risk set.
 */
Eigen::VectorXd cox_score(const Eigen::VectorXd& beta, const TruncatedSample& s, const SamplingProbability& g,
                          CoxScheme scheme);

struct CoxEstimate {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;
};

/// Solves U(beta) = 0 by Newton with step halving from beta = 0.
/// Throws DegeneracyError when a covariate is constant or the information is singular,
/// ConvergenceError when the iteration diverges or exhausts max_iter.
CoxEstimate cox_estimate(const TruncatedSample& s, const SamplingProbability& g, CoxScheme scheme,
                         const CoxOptions& options = {});

/// G = 1 at every distinct event value.
SamplingProbability unit_sampling_probability(const TruncatedSample& s);

struct CoxFitOptions {
  CoxScheme scheme = CoxScheme::mandel;
  int B = 199;  ///< bootstrap resamples for the standard errors; 0 skips them
  std::uint64_t seed = 0;
  unsigned threads = 1;
  NpmleAlgorithm algorithm = NpmleAlgorithm::selfconsistency;
  NpmleOptions npmle;
  CoxOptions newton;
  bool keep_replicates = false;
};

struct CoxFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;      ///< NaN when B = 0
  Eigen::VectorXd pvalue;  ///< two-sided Wald, NaN when B = 0
  CoxScheme scheme = CoxScheme::mandel;
  int iterations = 0;
  bool converged = false;
  int B = 0;
  int failures = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> replicates;
};

/// Point estimate plus bootstrap of the whole pipeline (G is refitted per resample).
CoxFit cox_fit(const TruncatedSample& s, const CoxFitOptions& options = {});

// ---------------------------------------------------------------------------
// Covariate-free sampling-probability diagnostic

struct GroupSamplingProbability {
  int label = 0;
  std::size_t size = 0;
  /// Empty when the group was skipped; see `warning`.
  std::optional<NpmleFit> fit;
  std::optional<JointTruncationFit> truncation;
  std::string warning;
};

/// G_n estimated separately within each label group, ordered by label.
std::vector<GroupSamplingProbability> g_by_group(const TruncatedSample& s, std::span<const int> labels,
                                                 const NpmleOptions& options = {});

/// Largest vertical distance between any two fitted group curves over `grid`.
double max_group_gap(const std::vector<GroupSamplingProbability>& groups, std::span<const double> grid);

}  // namespace dtrunc
