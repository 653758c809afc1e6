#include "dtrunc/tau.hpp"

#include <algorithm>
#include <cmath>

#include "dtrunc/error.hpp"
#include "dtrunc/resampling.hpp"

namespace dtrunc {

namespace {

int sign(double v) { return (v > 0) - (v < 0); }

struct PairScan {
  long long concordance = 0;
  std::size_t comparable = 0;
  std::size_t x_tied = 0;
};

PairScan scan(const TruncatedSample& s) {
  PairScan out;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double lo = std::max(s.u(i), s.u(j)), hi = std::min(s.v(i), s.v(j));
      if (s.x(i) < lo || s.x(i) > hi || s.x(j) < lo || s.x(j) > hi) continue;
      ++out.comparable;
      out.x_tied += s.x(i) == s.x(j);
      out.concordance += sign(s.x(i) - s.x(j)) * sign(s.u(i) - s.u(j));
    }
  return out;
}

}  // namespace

KendallTau conditional_kendall_tau(const TruncatedSample& s) {
  const auto p = scan(s);
  return {p.comparable ? static_cast<double>(p.concordance) / static_cast<double>(p.comparable) : std::nan(""),
          p.comparable};
}

TauTest kendall_tau_test(const TruncatedSample& s, const TauTestOptions& options) {
  if (options.B < 2) throw std::invalid_argument("tau test needs B >= 2");
  const auto p = scan(s);
  if (p.comparable == 0) throw DegeneracyError("no comparable pairs; conditional Kendall's tau is undefined");
  if (p.x_tied == p.comparable) throw DegeneracyError("X tied within every comparable pair; tau has zero variance");

  TauTest out;
  out.tau = static_cast<double>(p.concordance) / static_cast<double>(p.comparable);
  out.n_comparable = p.comparable;
  out.B = options.B;
  out.seed = options.seed;
  auto reps = run_replicates(options.B, options.seed, options.threads,
                             [&](CounterRng& rng) -> std::optional<std::vector<double>> {
                               const auto t = conditional_kendall_tau(s.subset(resample_indices(s.size(), rng)));
                               if (t.n_comparable == 0) return std::nullopt;
                               return std::vector<double>{t.tau};
                             });
  out.failures = reps.failures;
  std::vector<double> taus;
  for (const auto& r : reps.values) taus.push_back(r[0]);
  out.se = sample_sd(taus);
  if (!(out.se > 0.0)) throw DegeneracyError("bootstrap distribution of tau has zero variance");
  out.pvalue = 2.0 * normal_cdf(-std::abs(out.tau) / out.se);
  return out;
}

}  // namespace dtrunc
