#pragma once

#include "dtrunc/sample.hpp"

namespace dtrunc {

/// Exponential tilt of the uniform law on [a, b]: f(x) = eta e^{eta x} / (e^{eta b} - e^{eta a}).
struct SefFit {
  double eta = 0.0;
  double a = 0.0;
  double b = 1.0;
  double loglik = 0.0;
  double aic = 0.0;
  int iterations = 0;
};

double sef_cdf(const SefFit& fit, double t);
/// Inverse of sef_cdf for p in [0, 1].
double sef_quantile(const SefFit& fit, double p);

/// Conditional log-likelihood with support [a, b]; windows are clipped to it.
double sef_loglik(const TruncatedSample& s, double eta, double a, double b);

/// Maximizes sef_loglik over eta with a = min X, b = max X by golden-section search.
/// Throws DegeneracyError when the likelihood is flat in eta and
/// ConvergenceError when the maximizer escapes every expanded bracket.
SefFit sef_fit(const TruncatedSample& s);

}  // namespace dtrunc
