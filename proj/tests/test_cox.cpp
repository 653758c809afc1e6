#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dtrunc/cox.hpp"
#include "dtrunc/error.hpp"
#include "dtrunc/resampling.hpp"
#include "oracle.hpp"

using namespace dtrunc;

namespace {

TruncatedSample with_z(std::vector<double> x, std::vector<double> u, std::vector<double> v,
                       const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return TruncatedSample(std::move(x), std::move(u), std::move(v), std::move(z));
}

TruncatedSample untruncated(std::vector<double> x, const std::vector<std::vector<double>>& rows) {
  const std::size_t n = x.size();
  return with_z(std::move(x), std::vector<double>(n, -100.0), std::vector<double>(n, 100.0), rows);
}

// Proportional-hazards draws under interval sampling: X = e^{-beta sigma Z} E^sigma.
TruncatedSample cox_design(std::size_t n, std::uint64_t seed, double beta = 1.0, double sigma = 0.1) {
  CounterRng rng(seed, 17);
  std::vector<double> x, u, v;
  std::vector<std::vector<double>> z;
  const double rho = 0.5, tau = 0.25;
  while (x.size() < n) {
    const double zi = rng.exponential(1.0);
    const double xi = std::exp(-beta * sigma * zi) * std::pow(rng.exponential(1.0), sigma);
    const double ui = (1 + tau) * std::pow(rng.uniform(), rho) - tau;
    if (ui <= xi && xi <= ui + tau) {
      x.push_back(xi);
      u.push_back(ui);
      v.push_back(ui + tau);
      z.push_back({zi});
    }
  }
  return with_z(x, u, v, z);
}

// Double loop over records: sum_i a_i [z_i - sum_{X_j >= X_i} r_j e^{b z_j} z_j / sum r_j e^{b z_j}].
std::vector<double> score_oracle(const TruncatedSample& s, const std::vector<double>& beta,
                                 const std::vector<double>& r, const std::vector<double>& a) {
  const std::size_t n = s.size(), p = beta.size();
  std::vector<double> out(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s0 = 0;
    std::vector<double> s1(p, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (s.x(j) < s.x(i)) continue;
      double eta = 0;
      for (std::size_t k = 0; k < p; ++k) eta += beta[k] * s.z()(j, k);
      const double e = r[j] * std::exp(eta);
      s0 += e;
      for (std::size_t k = 0; k < p; ++k) s1[k] += e * s.z()(j, k);
    }
    for (std::size_t k = 0; k < p; ++k) out[k] += a[i] * (s.z()(i, k) - s1[k] / s0);
  }
  return out;
}

double bisect(auto fn, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fn(lo) * fn(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("cox") {
  TEST_CASE("scheme names round-trip") {
    for (auto scheme : {CoxScheme::mandel, CoxScheme::rennert, CoxScheme::naive})
      CHECK(parse_cox_scheme(to_string(scheme)) == scheme);
    CHECK_THROWS_AS(parse_cox_scheme("breslow"), std::invalid_argument);
  }

  TEST_CASE("constant covariate: flat score, not identifiable") {
    auto s = untruncated({1, 2, 3, 4}, {{2}, {2}, {2}, {2}});
    const auto g = unit_sampling_probability(s);
    for (double b : {-1.0, 0.0, 0.7}) CHECK(std::abs(cox_score(Eigen::VectorXd::Constant(1, b), s, g, CoxScheme::naive)(0)) < 1e-14);
    CHECK_THROWS_AS(cox_estimate(s, g, CoxScheme::naive), DegeneracyError);
  }

  TEST_CASE("score at zero on three records") {
    auto s = untruncated({1, 2, 3}, {{1}, {0}, {1}});
    const auto u = cox_score(Eigen::VectorXd::Zero(1), s, unit_sampling_probability(s), CoxScheme::naive);
    CHECK(u(0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  }

  TEST_CASE("score matches the double loop with inverse-G weights") {
    auto s = cox_design(60, 4);
    const auto fit = npmle_selfconsistency(s);
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = 1.0 / fit.g(s.x(i));
    const std::vector<double> ones(s.size(), 1.0);
    for (double b : {0.0, 0.8, -1.5}) {
      const Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, b);
      CHECK(cox_score(beta, s, fit.g, CoxScheme::naive)(0) == doctest::Approx(score_oracle(s, {b}, ones, ones)[0]).epsilon(1e-10));
      CHECK(cox_score(beta, s, fit.g, CoxScheme::mandel)(0) == doctest::Approx(score_oracle(s, {b}, w, ones)[0]).epsilon(1e-10));
      CHECK(cox_score(beta, s, fit.g, CoxScheme::rennert)(0) == doctest::Approx(score_oracle(s, {b}, w, w)[0]).epsilon(1e-10));
    }
  }

  TEST_CASE("tied event values share one risk set") {
    auto s = untruncated({1, 1, 2, 3}, {{1}, {0}, {1}, {0}});
    const std::vector<double> ones(4, 1.0);
    const auto u = cox_score(Eigen::VectorXd::Constant(1, 0.3), s, unit_sampling_probability(s), CoxScheme::naive);
    CHECK(u(0) == doctest::Approx(score_oracle(s, {0.3}, ones, ones)[0]).epsilon(1e-12));
  }

  TEST_CASE("four-record estimate matches the closed-form score root") {
    auto s = untruncated({1, 2, 3, 4}, {{1}, {0}, {1}, {0}});
    CoxOptions tight;
    tight.tol = 1e-13;
    const auto est = cox_estimate(s, unit_sampling_probability(s), CoxScheme::naive, tight);
    const double t = bisect([](double t) { return 2 - 2 * t / (t + 1) - t / (t + 2); }, 1e-6, 100.0);
    CHECK(est.converged);
    CHECK(est.beta(0) == doctest::Approx(std::log(t)).epsilon(1e-10));
    CHECK(est.beta(0) == doctest::Approx(0.9406136).epsilon(1e-6));
  }

  TEST_CASE("without truncation all schemes coincide") {
    CounterRng rng(3, 0);
    std::vector<double> x(80);
    std::vector<std::vector<double>> z(80);
    for (std::size_t i = 0; i < x.size(); ++i) {
      z[i] = {rng.uniform(), rng.exponential(1.0)};
      x[i] = rng.exponential(std::exp(0.5 * z[i][0] - 0.4 * z[i][1]));
    }
    auto s = untruncated(x, z);
    CoxFitOptions opt;
    opt.B = 0;
    opt.scheme = CoxScheme::mandel;
    const auto m = cox_fit(s, opt);
    opt.scheme = CoxScheme::rennert;
    const auto r = cox_fit(s, opt);
    opt.scheme = CoxScheme::naive;
    const auto nv = cox_fit(s, opt);
    CHECK((m.beta - nv.beta).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((r.beta - nv.beta).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(std::isnan(m.se(0)));
  }

  TEST_CASE("estimate solves the weighted score equation") {
    auto s = cox_design(150, 9);
    const auto fit = npmle_selfconsistency(s);
    REQUIRE(fit.converged);
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = 1.0 / fit.g(s.x(i));
    const std::vector<double> ones(s.size(), 1.0);
    for (auto scheme : {CoxScheme::mandel, CoxScheme::rennert}) {
      const auto est = cox_estimate(s, fit.g, scheme);
      CHECK(cox_score(est.beta, s, fit.g, scheme).lpNorm<Eigen::Infinity>() <= 1e-8);
      const auto& a = scheme == CoxScheme::rennert ? w : ones;
      CHECK(std::abs(score_oracle(s, {est.beta(0)}, w, a)[0]) <= 1e-7);
    }
  }

  TEST_CASE("covariate shifts leave the estimate unchanged and rescaling divides it") {
    auto s = cox_design(120, 21);
    const auto g = npmle_selfconsistency(s).g;
    const auto base = cox_estimate(s, g, CoxScheme::mandel);
    const Eigen::MatrixXd shifted = s.z().array() + 3.0;
    const TruncatedSample s2(std::vector<double>(s.x().begin(), s.x().end()),
                             std::vector<double>(s.u().begin(), s.u().end()),
                             std::vector<double>(s.v().begin(), s.v().end()), shifted);
    CHECK(std::abs(cox_estimate(s2, g, CoxScheme::mandel).beta(0) - base.beta(0)) <= 1e-8);
    const TruncatedSample s3(std::vector<double>(s.x().begin(), s.x().end()),
                             std::vector<double>(s.u().begin(), s.u().end()),
                             std::vector<double>(s.v().begin(), s.v().end()), Eigen::MatrixXd(2.0 * s.z()));
    CHECK(cox_estimate(s3, g, CoxScheme::mandel).beta(0) == doctest::Approx(base.beta(0) / 2.0).epsilon(1e-8));
  }

  TEST_CASE("separated data is reported as divergence") {
    auto s = untruncated({1, 2, 3, 4}, {{1}, {1}, {0}, {0}});
    CHECK_THROWS_AS(cox_estimate(s, unit_sampling_probability(s), CoxScheme::naive), ConvergenceError);
  }

  TEST_CASE("collinear covariates are not identifiable") {
    auto s = untruncated({1, 2, 3, 4, 5}, {{1, 2}, {0, 0}, {1, 2}, {3, 6}, {2, 4}});
    CHECK_THROWS_AS(cox_estimate(s, unit_sampling_probability(s), CoxScheme::naive), DegeneracyError);
  }

  TEST_CASE("bootstrap standard errors are reproducible across worker counts") {
    auto s = cox_design(100, 13);
    CoxFitOptions opt;
    opt.B = 30;
    opt.seed = 8;
    const auto a = cox_fit(s, opt);
    opt.threads = 3;
    const auto b = cox_fit(s, opt);
    CHECK(a.se == b.se);
    CHECK(a.failures == b.failures);
    CHECK(a.se(0) > 0.0);
    CHECK(a.pvalue(0) >= 0.0);
    CHECK(a.pvalue(0) <= 1.0);
    CHECK(a.pvalue(0) == doctest::Approx(2.0 * normal_cdf(-std::abs(a.beta(0) / a.se(0)))));
    opt.B = 1;
    CHECK_THROWS_AS(cox_fit(s, opt), std::invalid_argument);
  }

  TEST_CASE("per-group sampling probabilities") {
    auto s = oracle::uniform_design(120, 31);
    const std::vector<int> one(s.size(), 4);
    const auto single = g_by_group(s, one);
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].truncation);
    const auto k = shen_k(s, npmle_joint(s));
    for (double x : {0.1, 0.4, 0.77}) CHECK(single[0].truncation->sampling_probability(x) == doctest::Approx(k.sampling_probability(x)).epsilon(1e-12));

    // Two identical halves give identical curves.
    std::vector<std::size_t> twice(2 * s.size());
    std::vector<int> labels(2 * s.size());
    for (std::size_t i = 0; i < twice.size(); ++i) {
      twice[i] = i % s.size();
      labels[i] = i < s.size() ? 0 : 1;
    }
    const std::vector<double> grid{0.05, 0.2, 0.5, 0.8, 0.95};
    CHECK(max_group_gap(g_by_group(s.subset(twice), labels), grid) <= 1e-10);

    // Gap equals the brute-force pairwise maximum.
    std::vector<int> split(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) split[i] = static_cast<int>(i % 3);
    const auto groups = g_by_group(s, split);
    double brute = 0;
    for (double x : grid)
      for (const auto& a : groups)
        for (const auto& b : groups)
          if (a.truncation && b.truncation)
            brute = std::max(brute, std::abs(a.truncation->sampling_probability(x) - b.truncation->sampling_probability(x)));
    CHECK(max_group_gap(groups, grid) == brute);

    const std::vector<int> lonely{0, 0, 1};
    const auto skipped = g_by_group(oracle::d3(), lonely);
    CHECK_FALSE(skipped[1].truncation);
    CHECK_FALSE(skipped[1].warning.empty());
  }
}
