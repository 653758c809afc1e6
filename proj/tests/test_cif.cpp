#include <doctest.h>

#include <cmath>

#include "dtrunc/cif.hpp"
#include "dtrunc/error.hpp"
#include "oracle.hpp"

using namespace dtrunc;

namespace {

TruncatedSample labelled(const TruncatedSample& s, std::uint64_t seed, int types) {
  CounterRng rng(seed, 55);
  std::vector<int> e(s.size());
  for (auto& l : e) l = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(types)));
  return s.with_events(std::move(e));
}

TruncatedSample concat(const TruncatedSample& a, const TruncatedSample& b) {
  auto join = [](auto x, auto y) {
    std::vector<typename decltype(x)::value_type> out(x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return out;
  };
  return TruncatedSample(join(a.x(), b.x()), join(a.u(), b.u()), join(a.v(), b.v()), {}, {},
                         join(a.event(), b.event()));
}

}  // namespace

TEST_SUITE("cif") {
  TEST_CASE("D3 with events (1,2,1)") {
    const auto s = oracle::d3().with_events({1, 2, 1});
    CifOptions opt;
    opt.B = 0;
    opt.npmle.tol = 1e-12;
    const auto r = cif(s, opt);
    REQUIRE(r.types == std::vector<int>{1, 2});
    CHECK(r.group_sizes == std::vector<std::size_t>{2, 1});
    // Inverse-G weights (phi, 1, phi) with phi = (1 + sqrt 5) / 2.
    const double phi = (1 + std::sqrt(5.0)) / 2;
    CHECK(r.cif[0].back() == doctest::Approx(2 * phi / (2 * phi + 1)).epsilon(1e-9));
    CHECK(r.cif[1].back() == doctest::Approx(1 / (2 * phi + 1)).epsilon(1e-9));
    CHECK(r.cif[0].back() == doctest::Approx(0.763932).epsilon(1e-6));
    CHECK(r.cif[1].back() == doctest::Approx(0.236068).epsilon(1e-6));
  }

  TEST_CASE("single event type reproduces the NPMLE") {
    const auto s = oracle::uniform_design(90, 3);
    const auto r = cif(s.with_events(std::vector<int>(s.size(), 7)), {.B = 0});
    const auto f = npmle_selfconsistency(s).f;
    REQUIRE(r.times == f.support());
    for (std::size_t k = 0; k < r.times.size(); ++k) CHECK(std::abs(r.cif[0][k] - f.cumulative()[k]) <= 1e-12);
  }

  TEST_CASE("indep curves add up to the pooled NPMLE") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto s = labelled(oracle::uniform_design(80, 100 + seed), seed, 3);
      const auto r = cif(s, {.B = 0});
      const auto f = npmle_selfconsistency(s).f;
      double worst = 0;
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        double sum = 0;
        for (const auto& row : r.cif) sum += row[k];
        worst = std::max(worst, std::abs(sum - f.cdf(r.times[k])));
      }
      CHECK(worst <= 1e-10);
      for (const auto& row : r.cif) {
        CHECK(row.front() >= 0.0);
        CHECK(std::is_sorted(row.begin(), row.end()));
      }
    }
  }

  TEST_CASE("all-covering windows give type proportions") {
    const TruncatedSample s({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}, {9, 9, 9, 9, 9}, {}, {}, {1, 2, 2, 1, 2});
    for (auto method : {CifMethod::indep, CifMethod::dep}) {
      const auto r = cif(s, {.method = method, .B = 0});
      CHECK(r.cif[0].back() == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(r.cif[1].back() == doctest::Approx(0.6).epsilon(1e-12));
    }
  }

  TEST_CASE("dep method totals one and matches indep on duplicated groups") {
    const auto base = oracle::uniform_design(70, 13);
    REQUIRE(existence_check(base).ok);
    const auto a = base.with_events(std::vector<int>(base.size(), 1));
    const auto b = base.with_events(std::vector<int>(base.size(), 2));
    const auto s = concat(a, b);
    CifOptions opt;
    opt.B = 0;
    opt.npmle.tol = 1e-10;
    const auto indep = cif(s, opt);
    opt.method = CifMethod::dep;
    const auto dep = cif(s, opt);
    CHECK(dep.cif[0].back() + dep.cif[1].back() == doctest::Approx(1.0).epsilon(1e-10));
    double worst = 0;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < dep.times.size(); ++k)
        worst = std::max(worst, std::abs(dep.cif[j][k] - indep.cif[j][k]));
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("dep method names the group without a valid estimator") {
    const auto good = oracle::uniform_design(60, 2);
    const auto s = concat(good.with_events(std::vector<int>(good.size(), 1)), oracle::dv().with_events({4, 4, 4}));
    REQUIRE_FALSE(existence_check(oracle::dv()).ok);
    try {
      cif(s, {.method = CifMethod::dep, .B = 0});
      FAIL("expected a group failure");
    } catch (const GroupFailureError& e) {
      CHECK(e.label() == 4);
      CHECK(e.exit_code() == 5);
    }
  }

  TEST_CASE("bootstrap bands") {
    const auto s = labelled(oracle::uniform_design(80, 9), 4, 2);
    CifOptions opt;
    opt.B = 40;
    opt.seed = 6;
    const auto r = cif(s, opt);
    opt.threads = 2;
    const auto r2 = cif(s, opt);
    REQUIRE(r.se.size() == 2);
    CHECK(r.se == r2.se);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        CHECK(r.se[j][k] >= 0.0);
        CHECK(r.ci_low[j][k] <= r.ci_high[j][k]);
      }
  }

  TEST_CASE("label utilities") {
    const std::vector<int> labels{1, 1, 1, 2, 3, 3, 5};
    CHECK(merge_rare_types(labels, 2, 9) == std::vector<int>{1, 1, 1, 9, 3, 3, 9});
    CHECK(remap_types(labels, {{5, 3}, {2, 3}}) == std::vector<int>{1, 1, 1, 3, 3, 3, 3});
  }
}
