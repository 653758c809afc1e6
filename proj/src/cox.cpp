#include "dtrunc/cox.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dtrunc/error.hpp"
#include "dtrunc/resampling.hpp"

namespace dtrunc {

const char* to_string(CoxScheme scheme) {
  switch (scheme) {
    case CoxScheme::mandel: return "mandel";
    case CoxScheme::rennert: return "rennert";
    case CoxScheme::naive: return "naive";
  }
  return "?";
}

CoxScheme parse_cox_scheme(const std::string& name) {
  if (name == "mandel") return CoxScheme::mandel;
  if (name == "rennert") return CoxScheme::rennert;
  if (name == "naive") return CoxScheme::naive;
  throw std::invalid_argument("unknown Cox scheme '" + name + "'");
}

namespace {

struct CoxData {
  const Eigen::MatrixXd& z;
  std::vector<std::size_t> order;  // by X descending
  std::vector<double> x;
  std::vector<double> risk_weight;
  std::vector<double> subject_weight;

  CoxData(const TruncatedSample& s, const SamplingProbability& g, CoxScheme scheme) : z(s.z()) {
    if (!s.has_covariates()) throw std::invalid_argument("Cox regression needs covariates");
    const std::size_t n = s.size();
    x.assign(s.x().begin(), s.x().end());
    risk_weight.assign(n, 1.0);
    subject_weight.assign(n, 1.0);
    if (scheme != CoxScheme::naive) {
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = g(x[i]);
        if (!(gi > 0.0))
          throw DegeneracyError("sampling probability G(X) <= 0 for record " + std::to_string(i));
        risk_weight[i] = 1.0 / gi;
        if (scheme == CoxScheme::rennert) subject_weight[i] = 1.0 / gi;
      }
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] > x[b]; });
  }
};

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

Evaluation evaluate(const CoxData& d, const Eigen::VectorXd& beta, bool with_information) {
  const Eigen::Index p = d.z.cols();
  const Eigen::VectorXd eta = d.z * beta;
  const double shift = eta.maxCoeff();

  Evaluation out;
  out.score = Eigen::VectorXd::Zero(p);
  if (with_information) out.information = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(with_information ? p : 0, with_information ? p : 0);

  const std::size_t n = d.order.size();
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && d.x[d.order[end]] == d.x[d.order[start]]) ++end;
    for (std::size_t k = start; k < end; ++k) {
      const auto j = static_cast<Eigen::Index>(d.order[k]);
      const double e = d.risk_weight[d.order[k]] * std::exp(eta(j) - shift);
      s0 += e;
      s1.noalias() += e * d.z.row(j).transpose();
      if (with_information) s2.noalias() += e * d.z.row(j).transpose() * d.z.row(j);
    }
    const Eigen::VectorXd mean = s1 / s0;
    for (std::size_t k = start; k < end; ++k) {
      const auto i = static_cast<Eigen::Index>(d.order[k]);
      const double a = d.subject_weight[d.order[k]];
      out.loglik += a * (eta(i) - shift - std::log(s0));
      out.score.noalias() += a * (d.z.row(i).transpose() - mean);
      if (with_information) out.information.noalias() += a * (s2 / s0 - mean * mean.transpose());
    }
    start = end;
  }
  return out;
}

void check_identifiable(const Eigen::MatrixXd& z) {
  for (Eigen::Index k = 0; k < z.cols(); ++k)
    if (z.col(k).maxCoeff() == z.col(k).minCoeff())
      throw DegeneracyError("covariate column " + std::to_string(k + 1) +
                            " is constant; the score is flat and beta is not identifiable");
}

}  // namespace

Eigen::VectorXd cox_score(const Eigen::VectorXd& beta, const TruncatedSample& s, const SamplingProbability& g,
                          CoxScheme scheme) {
  const CoxData d(s, g, scheme);
  if (beta.size() != d.z.cols()) throw std::invalid_argument("beta has the wrong dimension");
  return evaluate(d, beta, false).score;
}

SamplingProbability unit_sampling_probability(const TruncatedSample& s) {
  std::vector<double> at(s.x().begin(), s.x().end());
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  std::vector<double> ones(at.size(), 1.0);
  return {std::move(at), std::move(ones)};
}

CoxEstimate cox_estimate(const TruncatedSample& s, const SamplingProbability& g, CoxScheme scheme,
                         const CoxOptions& options) {
  const CoxData d(s, g, scheme);
  check_identifiable(d.z);
  const Eigen::Index p = d.z.cols();
  if (static_cast<Eigen::Index>(s.size()) <= p)
    throw DegeneracyError("Cox regression needs more records than covariates");

  CoxEstimate est;
  est.beta = Eigen::VectorXd::Zero(p);
  Evaluation cur = evaluate(d, est.beta, true);
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    est.iterations = iter;
    est.score_norm = cur.score.lpNorm<Eigen::Infinity>();
    if (est.score_norm <= options.tol) {
      est.converged = true;
      break;
    }
    if (iter == options.max_iter) break;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.information);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff()))
      throw DegeneracyError("singular information matrix; beta is not identifiable");
    const Eigen::VectorXd step = ldlt.solve(cur.score);

    double scale = 1.0;
    Evaluation next;
    Eigen::VectorXd candidate;
    int halvings = 0;
    while (true) {
      candidate = est.beta + scale * step;
      next = evaluate(d, candidate, true);
      const double slack = 1e-12 * std::max(1.0, std::abs(cur.loglik));
      if (std::isfinite(next.loglik) && next.loglik >= cur.loglik - slack) break;
      if (++halvings > options.max_halvings) break;
      scale /= 2.0;
    }
    est.beta = std::move(candidate);
    cur = std::move(next);
  }

  std::ostringstream diag;
  diag << "beta = [" << est.beta.transpose() << "], |U|inf = " << est.score_norm << " after "
       << est.iterations << " Newton steps";
  if (!est.converged) throw ConvergenceError("Cox Newton iteration did not converge: " + diag.str());
  // A vanishing score with a Newton step that does not shrink means the
  // likelihood is still rising towards an infinite coefficient.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.information);
  const Eigen::VectorXd step = ldlt.solve(cur.score);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::ArrayXd col = d.z.col(k).array();
    const double sd = std::sqrt((col - col.mean()).square().sum() / static_cast<double>(col.size()));
    if (std::abs(est.beta(k)) * sd > options.divergence_bound || !std::isfinite(step(k)) ||
        std::abs(step(k)) * sd > 1e-4)
      throw ConvergenceError("monotone likelihood: coefficient diverges (" + diag.str() + ")");
  }
  return est;
}

namespace {

SamplingProbability weights_for(const TruncatedSample& s, const CoxFitOptions& options) {
  if (options.scheme == CoxScheme::naive) return unit_sampling_probability(s);
  auto fit = npmle(s, options.algorithm, options.npmle);
  if (!fit.converged) throw ConvergenceError("NPMLE of the sampling probabilities did not converge");
  return fit.g;
}

}  // namespace

CoxFit cox_fit(const TruncatedSample& s, const CoxFitOptions& options) {
  if (options.B == 1) throw std::invalid_argument("bootstrap needs B = 0 or B >= 2");
  CoxFit out;
  out.names = s.z_names();
  out.scheme = options.scheme;
  out.B = options.B;
  out.seed = options.seed;

  const auto est = cox_estimate(s, weights_for(s, options), options.scheme, options.newton);
  out.beta = est.beta;
  out.iterations = est.iterations;
  out.converged = est.converged;
  const Eigen::Index p = est.beta.size();
  out.se = Eigen::VectorXd::Constant(p, std::nan(""));
  out.pvalue = Eigen::VectorXd::Constant(p, std::nan(""));
  if (options.B == 0) return out;

  auto reps = run_replicates(options.B, options.seed, options.threads,
                             [&](CounterRng& rng) -> std::optional<std::vector<double>> {
                               const auto resample = s.subset(resample_indices(s.size(), rng));
                               if (options.scheme != CoxScheme::naive && !existence_check(resample).ok)
                                 return std::nullopt;
                               const auto b = cox_estimate(resample, weights_for(resample, options),
                                                           options.scheme, options.newton);
                               return std::vector<double>(b.beta.data(), b.beta.data() + p);
                             });
  out.failures = reps.failures;
  std::vector<double> column(reps.values.size());
  for (Eigen::Index k = 0; k < p; ++k) {
    for (std::size_t b = 0; b < reps.values.size(); ++b) column[b] = reps.values[b][static_cast<std::size_t>(k)];
    out.se(k) = sample_sd(column);
    out.pvalue(k) = out.se(k) > 0.0 ? 2.0 * normal_cdf(-std::abs(out.beta(k) / out.se(k))) : std::nan("");
  }
  if (options.keep_replicates) out.replicates = std::move(reps.values);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<GroupSamplingProbability> g_by_group(const TruncatedSample& s, std::span<const int> labels,
                                                 const NpmleOptions& options) {
  if (labels.size() != s.size()) throw std::invalid_argument("one group label per record required");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  std::vector<GroupSamplingProbability> out;
  for (const auto& [label, idx] : members) {
    GroupSamplingProbability group;
    group.label = label;
    group.size = idx.size();
    if (idx.size() < 2) {
      group.warning = "group has fewer than 2 records; skipped";
      out.push_back(std::move(group));
      continue;
    }
    const auto sub = s.subset(idx);
    if (!existence_check(sub).ok) {
      group.warning = "existence condition fails within group; skipped";
      out.push_back(std::move(group));
      continue;
    }
    auto fit = npmle_joint(sub, options);
    if (!fit.converged) {
      group.warning = "NPMLE did not converge within group; skipped";
      out.push_back(std::move(group));
      continue;
    }
    group.truncation = shen_k(sub, fit);
    group.fit = std::move(fit);
    out.push_back(std::move(group));
  }
  return out;
}

double max_group_gap(const std::vector<GroupSamplingProbability>& groups, std::span<const double> grid) {
  double gap = 0.0;
  for (double x : grid) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& g : groups) {
      if (!g.truncation) continue;
      const double value = g.truncation->sampling_probability(x);
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
    if (hi >= lo) gap = std::max(gap, hi - lo);
  }
  return gap;
}

}  // namespace dtrunc
