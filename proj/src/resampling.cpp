#include "dtrunc/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "dtrunc/error.hpp"
#include "dtrunc/parallel.hpp"

namespace dtrunc {

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }
double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return std::nan("");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

std::vector<std::size_t> resample_indices(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.index(n);
  return idx;
}

ReplicateSet run_replicates(int B, std::uint64_t seed, unsigned threads, const ReplicateDraw& draw) {
  if (B < 1) throw std::invalid_argument("number of resamples must be positive");
  ReplicateSet out;
  out.values.resize(static_cast<std::size_t>(B));
  std::vector<int> failed(static_cast<std::size_t>(B), 0);

  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
    CounterRng rng(seed, b);
    while (true) {
      std::optional<std::vector<double>> value;
      try {
        value = draw(rng);
      } catch (const DegeneracyError&) {
      } catch (const ConvergenceError&) {
      }
      if (value) {
        out.values[b] = std::move(*value);
        return;
      }
      if (++failed[b] >= B)
        throw DegeneracyError("resample " + std::to_string(b) + " failed " + std::to_string(failed[b]) +
                              " times; bootstrap is degenerate");
    }
  });

  out.failures = std::accumulate(failed.begin(), failed.end(), 0);
  if (out.failures >= B)
    throw DegeneracyError(std::to_string(out.failures) + " failed resamples for B = " +
                          std::to_string(B) + "; bootstrap is degenerate");
  return out;
}

IntervalSummary summarize_replicates(const std::vector<std::vector<double>>& replicates,
                                     std::span<const double> estimate, double level, CiMethod method) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  const std::size_t m = estimate.size();
  IntervalSummary out;
  out.se.resize(m);
  out.low.resize(m);
  out.high.resize(m);
  const double z = normal_quantile(0.5 + level / 2.0);
  std::vector<double> column(replicates.size());
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t b = 0; b < replicates.size(); ++b) column[b] = replicates[b][j];
    out.se[j] = sample_sd(column);
    if (method == CiMethod::normal) {
      out.low[j] = estimate[j] - z * out.se[j];
      out.high[j] = estimate[j] + z * out.se[j];
    } else {
      std::sort(column.begin(), column.end());
      out.low[j] = quantile_sorted(column, (1.0 - level) / 2.0);
      out.high[j] = quantile_sorted(column, (1.0 + level) / 2.0);
    }
  }
  return out;
}

namespace {

std::vector<double> cdf_at(const StepDistribution& f, std::span<const double> points) {
  std::vector<double> out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) out[j] = f.cdf(points[j]);
  return out;
}

std::optional<std::vector<double>> refit(const TruncatedSample& resample, const BootstrapOptions& options,
                                         std::span<const double> points) {
  if (!existence_check(resample).ok) return std::nullopt;
  auto fit = npmle(resample, options.algorithm, options.npmle);
  if (!fit.converged) return std::nullopt;
  return cdf_at(fit.f, points);
}

NpmleFit original_fit(const TruncatedSample& s, const BootstrapOptions& options) {
  if (options.B < 2) throw std::invalid_argument("bootstrap needs B >= 2");
  auto fit = npmle(s, options.algorithm, options.npmle);
  if (!fit.converged) throw ConvergenceError("NPMLE did not converge on the original sample");
  return fit;
}

BootstrapResult assemble(const NpmleFit& fit, const BootstrapOptions& options, std::vector<double> points,
                         ReplicateSet reps) {
  BootstrapResult r;
  r.estimate = cdf_at(fit.f, points);
  auto summary = summarize_replicates(reps.values, r.estimate, options.level, options.method);
  r.eval_points = std::move(points);
  r.se = std::move(summary.se);
  r.ci_low = std::move(summary.low);
  r.ci_high = std::move(summary.high);
  r.level = options.level;
  r.B = options.B;
  r.failures = reps.failures;
  r.seed = options.seed;
  r.method = options.method;
  if (options.keep_replicates) r.replicates = std::move(reps.values);
  return r;
}

}  // namespace

BootstrapResult simple_bootstrap(const TruncatedSample& s, const BootstrapOptions& options) {
  const NpmleFit fit = original_fit(s, options);
  std::vector<double> points = options.eval_points.empty() ? fit.f.support() : options.eval_points;

  auto reps = run_replicates(options.B, options.seed, options.threads,
                             [&](CounterRng& rng) -> std::optional<std::vector<double>> {
                               const auto idx = resample_indices(s.size(), rng);
                               return refit(s.subset(idx), options, points);
                             });
  return assemble(fit, options, std::move(points), std::move(reps));
}

BootstrapResult obvious_bootstrap(const TruncatedSample& s, const BootstrapOptions& options) {
  const NpmleFit fit = original_fit(s, options);
  const JointTruncationFit k = shen_k(s, fit);
  std::vector<double> points = options.eval_points.empty() ? fit.f.support() : options.eval_points;

  // P(U* <= X* <= V*) = sum_j f_j G(t_j)
  double acceptance = 0.0;
  for (std::size_t j = 0; j < fit.f.size(); ++j) acceptance += fit.f.mass()[j] * fit.g.value[j];
  if (acceptance < 1e-4)
    throw DegeneracyError("obvious bootstrap acceptance probability " + std::to_string(acceptance) +
                          " is below 1e-4");

  std::vector<double> k_cumulative(k.mass.size());
  std::partial_sum(k.mass.begin(), k.mass.end(), k_cumulative.begin());
  const auto& f_cumulative = fit.f.cumulative();
  auto draw_from = [](const std::vector<double>& cumulative, double r) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r * cumulative.back());
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
  };

  const std::size_t n = s.size();
  auto reps = run_replicates(
      options.B, options.seed, options.threads, [&](CounterRng& rng) -> std::optional<std::vector<double>> {
        std::vector<double> x, u, v;
        x.reserve(n);
        u.reserve(n);
        v.reserve(n);
        while (x.size() < n) {
          const double xs = fit.f.support()[draw_from(f_cumulative, rng.uniform())];
          const auto& [us, vs] = k.pairs[draw_from(k_cumulative, rng.uniform())];
          if (us <= xs && xs <= vs) {
            x.push_back(xs);
            u.push_back(us);
            v.push_back(vs);
          }
        }
        return refit(TruncatedSample(std::move(x), std::move(u), std::move(v)), options, points);
      });
  return assemble(fit, options, std::move(points), std::move(reps));
}

}  // namespace dtrunc
