#pragma once

#include <cstdint>

#include "dtrunc/sample.hpp"

namespace dtrunc {

struct KendallTau {
  double tau = 0.0;
  std::size_t n_comparable = 0;
};

/// Pairs are comparable when both X values lie in the intersection of the two
/// windows; tau averages sgn((X_i - X_j)(U_i - U_j)) over comparable pairs.
/// n_comparable = 0 leaves tau at NaN.
KendallTau conditional_kendall_tau(const TruncatedSample& s);

struct TauTest {
  double tau = 0.0;
  std::size_t n_comparable = 0;
  double se = 0.0;      ///< bootstrap SD of tau
  double pvalue = 1.0;  ///< two-sided, normal approximation on se
  int B = 0;
  int failures = 0;
  std::uint64_t seed = 0;
};

struct TauTestOptions {
  int B = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Quasi-independence test. Throws DegeneracyError without comparable pairs or
/// when tau has zero bootstrap variance.
TauTest kendall_tau_test(const TruncatedSample& s, const TauTestOptions& options = {});

}  // namespace dtrunc
