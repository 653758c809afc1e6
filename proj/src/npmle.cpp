#include "dtrunc/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dtrunc/error.hpp"

namespace dtrunc {

namespace {

constexpr double kProbabilityFloor = 1e-300;

// Distinct event values, their multiplicities, and each record's window as a
// closed index range [lo, hi] into the support.
struct SupportIndex {
  std::vector<double> support;
  std::vector<double> count;
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;

  explicit SupportIndex(const TruncatedSample& s) {
    support.assign(s.x().begin(), s.x().end());
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    count.assign(support.size(), 0.0);
    for (double x : s.x()) count[position(x)] += 1.0;
    const std::size_t n = s.size();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = static_cast<std::size_t>(
          std::lower_bound(support.begin(), support.end(), s.u(i)) - support.begin());
      hi[i] = static_cast<std::size_t>(
                  std::upper_bound(support.begin(), support.end(), s.v(i)) - support.begin()) -
              1;
    }
  }

  std::size_t position(double x) const {
    return static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), x) -
                                    support.begin());
  }
  std::size_t size() const { return support.size(); }
};

double sup_cdf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ca += a[j];
    cb += b[j];
    d = std::max(d, std::abs(ca - cb));
  }
  return d;
}

void normalize(std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
}

[[noreturn]] void degenerate_window(std::size_t i, double value) {
  throw DegeneracyError("window probability F(V) - F(U-) = " + std::to_string(value) +
                        " for record " + std::to_string(i) + "; the NPMLE is degenerate");
}

}  // namespace

double SamplingProbability::operator()(double x) const {
  auto it = std::lower_bound(at.begin(), at.end(), x);
  if (it == at.end() || *it != x)
    throw std::out_of_range("sampling probability requested at a non-observed value");
  return value[static_cast<std::size_t>(it - at.begin())];
}

NpmleFit npmle_selfconsistency(const TruncatedSample& s, const NpmleOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const SupportIndex idx(s);
  const std::size_t n = s.size();
  const std::size_t m = idx.size();

  NpmleFit fit;
  fit.existence_ok = existence_check(s).ok;

  std::vector<double> f(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m), prefix(m + 1), diff(m + 1), window(n), g(m);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    prefix[0] = 0.0;
    for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + f[j];

    // S_j = sum_i J_ij / F_i, accumulated through a difference array over windows.
    std::fill(diff.begin(), diff.end(), 0.0);
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = prefix[idx.hi[i] + 1] - prefix[idx.lo[i]];
      if (!(fi >= kProbabilityFloor)) degenerate_window(i, fi);
      window[i] = fi;
      const double w = 1.0 / fi;
      total_weight += w;
      diff[idx.lo[i]] += w;
      diff[idx.hi[i] + 1] -= w;
    }
    double running = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      running += diff[j];
      next[j] = idx.count[j] / running;
      g[j] = running / total_weight;
    }
    normalize(next);

    fit.final_change = sup_cdf_distance(next, f);
    fit.iterations = iter;
    f.swap(next);
    if (fit.final_change <= options.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.f = StepDistribution(idx.support, std::move(f));
  fit.g = SamplingProbability{idx.support, std::move(g)};
  fit.window_prob = std::move(window);
  return fit;
}

NpmleFit npmle_joint(const TruncatedSample& s, const NpmleOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t n = s.size();
  std::vector<double> support(s.x().begin(), s.x().end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const std::size_t m = support.size();
  std::vector<std::size_t> at(n);
  for (std::size_t i = 0; i < n; ++i)
    at[i] = static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), s.x(i)) -
                                     support.begin());

  std::vector<std::size_t> by_u(n), by_v(n);
  std::iota(by_u.begin(), by_u.end(), std::size_t{0});
  std::iota(by_v.begin(), by_v.end(), std::size_t{0});
  std::stable_sort(by_u.begin(), by_u.end(), [&](auto a, auto b) { return s.u(a) < s.u(b); });
  std::stable_sort(by_v.begin(), by_v.end(), [&](auto a, auto b) { return s.v(a) < s.v(b); });

  NpmleFit fit;
  fit.existence_ok = existence_check(s).ok;

  std::vector<double> f(m, 1.0 / static_cast<double>(m));
  std::vector<double> w(n), window(n), g(m), next(m);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // w_i(F_n) = 1 / (F_n(V_i) - F_n(U_i-))
    const StepDistribution current(support, f);
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = current.cdf(s.v(i)) - current.cdf_left(s.u(i));
      if (!(fi >= kProbabilityFloor)) degenerate_window(i, fi);
      window[i] = fi;
      w[i] = 1.0 / fi;
      total_weight += w[i];
    }

    // G_n(x) = sum_i w_i I(U_i <= x <= V_i) / sum_i w_i, swept in x order.
    std::size_t pu = 0, pv = 0;
    double opened = 0.0, closed = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = support[j];
      while (pu < n && s.u(by_u[pu]) <= x) opened += w[by_u[pu++]];
      while (pv < n && s.v(by_v[pv]) < x) closed += w[by_v[pv++]];
      g[j] = (opened - closed) / total_weight;
    }

    // F_n jumps: sum of w_i(G_n) = 1 / G_n(X_i) over records at each support point.
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) next[at[i]] += 1.0 / g[at[i]];
    normalize(next);

    fit.final_change = sup_cdf_distance(next, f);
    fit.iterations = iter;
    f.swap(next);
    if (fit.final_change <= options.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.f = StepDistribution(support, std::move(f));
  fit.g = SamplingProbability{std::move(support), std::move(g)};
  fit.window_prob = std::move(window);
  return fit;
}

NpmleFit npmle(const TruncatedSample& s, NpmleAlgorithm algorithm, const NpmleOptions& options) {
  return algorithm == NpmleAlgorithm::joint ? npmle_joint(s, options)
                                            : npmle_selfconsistency(s, options);
}

double JointTruncationFit::cdf(double u, double v) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first <= u && pairs[i].second <= v) acc += mass[i];
  return acc;
}

double JointTruncationFit::sampling_probability(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first <= x && x <= pairs[i].second) acc += mass[i];
  return acc;
}

JointTruncationFit shen_k(const TruncatedSample& s, const NpmleFit& fit) {
  if (!fit.converged) throw ConvergenceError("truncation distribution requires a converged NPMLE");
  if (fit.window_prob.size() != s.size())
    throw std::invalid_argument("fit does not belong to this sample");
  JointTruncationFit k;
  k.pairs.reserve(s.size());
  k.mass.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    k.pairs.emplace_back(s.u(i), s.v(i));
    k.mass.push_back(1.0 / fit.window_prob[i]);
  }
  normalize(k.mass);
  return k;
}

std::vector<double> inverse_sampling_weights(const TruncatedSample& s, const SamplingProbability& g) {
  std::vector<double> w(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w[i] = 1.0 / g(s.x(i));
  return w;
}

double conditional_loglik(const TruncatedSample& s, const StepDistribution& f) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double own = f.cdf(s.x(i)) - f.cdf_left(s.x(i));
    ll += std::log(own) - std::log(f.cdf(s.v(i)) - f.cdf_left(s.u(i)));
  }
  return ll;
}

}  // namespace dtrunc
