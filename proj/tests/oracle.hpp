#pragma once

// Brute-force reference computations used only by tests. Each works on dense
// indicator matrices and shares no code with the library routines it checks.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dtrunc/rng.hpp"
#include "dtrunc/sample.hpp"

namespace oracle {

struct Triplets {
  std::vector<double> x, u, v;
};

inline dtrunc::TruncatedSample make(const Triplets& t) { return dtrunc::TruncatedSample(t.x, t.u, t.v); }

// D3 and Dv from the worked examples.
inline dtrunc::TruncatedSample d3() { return make({{1, 2, 3}, {0, 0.5, 1.5}, {2.5, 3, 4}}); }
inline dtrunc::TruncatedSample dv() { return make({{1, 2, 3}, {0, 1, 2.5}, {1.5, 3, 3.5}}); }

/// Interval-sampling design with X ~ U(0,1): U = (1+tau) xi^rho - tau, V = U + tau.
inline dtrunc::TruncatedSample uniform_design(std::size_t n, std::uint64_t seed, double rho = 0.5,
                                              double tau = 0.25) {
  dtrunc::CounterRng rng(seed, 991);
  std::vector<double> x, u, v;
  while (x.size() < n) {
    const double xi = rng.uniform();
    const double ui = (1 + tau) * std::pow(rng.uniform(), rho) - tau;
    if (ui <= xi && xi <= ui + tau) {
      x.push_back(xi);
      u.push_back(ui);
      v.push_back(ui + tau);
    }
  }
  return dtrunc::TruncatedSample(x, u, v);
}

/// Dense J_ij = I(U_i <= X_j <= V_i) on records (no tie pooling; X assumed distinct).
inline std::vector<std::vector<int>> indicator(const dtrunc::TruncatedSample& s) {
  const std::size_t n = s.size();
  std::vector<std::vector<int>> j(n, std::vector<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) j[i][k] = s.u(i) <= s.x(k) && s.x(k) <= s.v(i);
  return j;
}

/// Fixed point of 1/f_j = sum_i J_ij / F_i by plain iteration to machine precision.
inline std::vector<double> fixed_point_masses(const dtrunc::TruncatedSample& s, int iters = 20000) {
  const auto j = indicator(s);
  const std::size_t n = s.size();
  std::vector<double> f(n, 1.0 / n), big(n);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> inv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double fi = 0;
      for (std::size_t k = 0; k < n; ++k) fi += j[i][k] * f[k];
      for (std::size_t k = 0; k < n; ++k) inv[k] += j[i][k] / fi;
    }
    double total = 0;
    for (std::size_t k = 0; k < n; ++k) total += (big[k] = 1.0 / inv[k]);
    for (std::size_t k = 0; k < n; ++k) f[k] = big[k] / total;
  }
  return f;
}

/// G(X_k) = sum_i w_i J_ik / sum_i w_i with w_i = 1 / sum_k J_ik f_k.
inline std::vector<double> sampling_probability(const dtrunc::TruncatedSample& s,
                                                const std::vector<double>& f) {
  const auto j = indicator(s);
  const std::size_t n = s.size();
  std::vector<double> w(n), g(n, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fi = 0;
    for (std::size_t k = 0; k < n; ++k) fi += j[i][k] * f[k];
    w[i] = 1.0 / fi;
    total += w[i];
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) g[k] += w[i] * j[i][k];
    g[k] /= total;
  }
  return g;
}

}  // namespace oracle
