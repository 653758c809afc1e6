#include <doctest.h>

#include <cmath>

#include "dtrunc/error.hpp"
#include "dtrunc/sef.hpp"
#include "dtrunc/tau.hpp"
#include "oracle.hpp"

using namespace dtrunc;

namespace {

TruncatedSample tilt_sample(std::size_t n, double eta, std::uint64_t seed) {
  CounterRng rng(seed, 31);
  const SefFit law{.eta = eta, .a = 0.0, .b = 1.0};
  std::vector<double> x(n);
  for (auto& xi : x) xi = sef_quantile(law, rng.uniform());
  return TruncatedSample(x, std::vector<double>(n, -1.0), std::vector<double>(n, 2.0));
}

// Direct conditional log-likelihood: log density minus log window mass.
double loglik_oracle(const TruncatedSample& s, double eta, double a, double b) {
  auto big_f = [&](double t) { return (std::exp(eta * t) - std::exp(eta * a)) / (std::exp(eta * b) - std::exp(eta * a)); };
  double ll = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dens = eta * std::exp(eta * s.x(i)) / (std::exp(eta * b) - std::exp(eta * a));
    ll += std::log(dens) - std::log(big_f(std::min(s.v(i), b)) - big_f(std::max(s.u(i), a)));
  }
  return ll;
}

}  // namespace

TEST_SUITE("tau") {
  TEST_CASE("hand-enumerated pairs") {
    const TruncatedSample two({1, 2}, {0, 0.5}, {3, 3});
    CHECK(conditional_kendall_tau(two).tau == 1.0);
    CHECK(conditional_kendall_tau(two).n_comparable == 1);
    const auto d3 = conditional_kendall_tau(oracle::d3());
    CHECK(d3.tau == 1.0);
    CHECK(d3.n_comparable == 2);
  }

  TEST_CASE("invariant under a common increasing transform") {
    const auto s = oracle::uniform_design(120, 4);
    std::vector<double> x, u, v;
    for (std::size_t i = 0; i < s.size(); ++i) {
      x.push_back(std::exp(3 * s.x(i)));
      u.push_back(std::exp(3 * s.u(i)));
      v.push_back(std::exp(3 * s.v(i)));
    }
    const auto a = conditional_kendall_tau(s), b = conditional_kendall_tau(TruncatedSample(x, u, v));
    CHECK(a.tau == b.tau);
    CHECK(a.n_comparable == b.n_comparable);
    CHECK(std::abs(a.tau) <= 1.0);
    CHECK(a.n_comparable <= s.size() * (s.size() - 1) / 2);
  }

  TEST_CASE("undefined and degenerate statistics") {
    const TruncatedSample disjoint({1, 5}, {0, 4}, {2, 6});
    CHECK_THROWS_AS(kendall_tau_test(disjoint), DegeneracyError);
    const TruncatedSample tied({1, 1, 1}, {0, 0.2, 0.4}, {2, 2, 2});
    CHECK_THROWS_AS(kendall_tau_test(tied), DegeneracyError);
  }

  TEST_CASE("bootstrap p-value") {
    const auto s = oracle::uniform_design(100, 6);
    TauTestOptions opt;
    opt.B = 60;
    opt.seed = 3;
    const auto a = kendall_tau_test(s, opt);
    opt.threads = 2;
    const auto b = kendall_tau_test(s, opt);
    CHECK(a.pvalue == b.pvalue);
    CHECK(a.pvalue >= 0.0);
    CHECK(a.pvalue <= 1.0);
    CHECK(a.se > 0.0);
    CHECK(a.B == 60);
  }
}

TEST_SUITE("sef") {
  TEST_CASE("cdf boundary values and the uniform limit") {
    for (double eta : {-50.0, -1.0, -0.00017, 0.0, 1e-9, 2.0, 800.0}) {
      const SefFit f{.eta = eta, .a = 6, .b = 5474};
      CHECK(sef_cdf(f, 6) == 0.0);
      CHECK(sef_cdf(f, 5474) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(sef_cdf(f, 0) == 0.0);
      CHECK(sef_cdf(f, 1e6) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const SefFit flat{.eta = 0.0, .a = 2, .b = 4};
    CHECK(sef_cdf(flat, 3) == 0.5);
    const SefFit tiny{.eta = 1e-12, .a = 2, .b = 4};
    for (int k = 0; k <= 100; ++k) {
      const double t = 2 + 2 * k / 100.0;
      CHECK(std::abs(sef_cdf(tiny, t) - (t - 2) / 2) <= 1e-10);
    }
  }

  TEST_CASE("cdf is monotone and continuous across the series switch") {
    for (double eta : {-40.0, -0.3, 0.0, 0.3, 40.0, 900.0}) {
      const SefFit f{.eta = eta, .a = 0, .b = 1};
      double prev = 0;
      for (int k = 0; k <= 1000; ++k) {
        const double v = sef_cdf(f, k / 1000.0);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
      }
    }
    const SefFit below{.eta = 0.999e-6, .a = 0, .b = 1}, above{.eta = 1.001e-6, .a = 0, .b = 1};
    CHECK(std::abs(sef_cdf(below, 0.3) - sef_cdf(above, 0.3)) <= 1e-9);
  }

  TEST_CASE("quantile inverts the cdf") {
    for (double eta : {-20.0, 0.0, 0.5, 20.0}) {
      const SefFit f{.eta = eta, .a = -1, .b = 3};
      for (double p : {0.0, 0.1, 0.5, 0.93, 1.0}) CHECK(sef_cdf(f, sef_quantile(f, p)) == doctest::Approx(p).epsilon(1e-10));
    }
  }

  TEST_CASE("log-likelihood matches the direct formula") {
    const auto s = oracle::uniform_design(50, 2);
    for (double eta : {-3.0, 0.7, 4.0})
      CHECK(sef_loglik(s, eta, 0.01, 0.99) == doctest::Approx(loglik_oracle(s, eta, 0.01, 0.99)).epsilon(1e-10));
  }

  TEST_CASE("fit agrees with a grid search and beats the uniform model") {
    const auto s = tilt_sample(300, 2.0, 5);
    const auto fit = sef_fit(s);
    double best = -INFINITY, arg = 0;
    for (int k = -4000; k <= 4000; ++k) {
      const double eta = k / 1000.0;
      const double v = loglik_oracle(s, eta == 0 ? 1e-9 : eta, fit.a, fit.b);
      if (v > best) best = v, arg = eta;
    }
    CHECK(std::abs(fit.eta - arg) <= 1e-3);
    CHECK(fit.loglik >= sef_loglik(s, 0.0, fit.a, fit.b));
    CHECK(fit.aic == doctest::Approx(2 - 2 * fit.loglik));
  }

  TEST_CASE("uninformative and monotone likelihoods") {
    const TruncatedSample points({1, 2, 3}, {1, 2, 3}, {1, 2, 3});
    CHECK_THROWS_AS(sef_fit(points), DegeneracyError);
    // Every X sits at the right end of its window: likelihood increases without bound.
    const TruncatedSample right_edge({1, 2, 3}, {0, 0, 0}, {1, 2, 3});
    CHECK_THROWS_AS(sef_fit(right_edge), ConvergenceError);
  }
}
