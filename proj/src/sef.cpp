#include "dtrunc/sef.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtrunc/error.hpp"

namespace dtrunc {

namespace {

// log((e^{eta w} - 1) / eta), the log normalizer of the tilt on [0, w].
double log_normalizer(double eta, double w) {
  const double t = eta * w;
  if (std::abs(t) < 1e-6) return std::log(w) + t / 2.0 + t * t / 24.0;
  if (t > 0) return t + std::log(-std::expm1(-t)) - std::log(eta);
  return std::log(-std::expm1(t)) - std::log(-eta);
}

}  // namespace

double sef_cdf(const SefFit& fit, double t) {
  const double d = fit.b - fit.a;
  const double y = std::clamp(t, fit.a, fit.b) - fit.a;
  const double eta = fit.eta;
  if (std::abs(eta * d) < 1e-6) {
    const double ty = eta * y, td = eta * d;
    return (y / d) * (1 + ty / 2 + ty * ty / 6) / (1 + td / 2 + td * td / 6);
  }
  if (eta > 0) return std::exp(eta * (y - d)) * std::expm1(-eta * y) / std::expm1(-eta * d);
  return std::expm1(eta * y) / std::expm1(eta * d);
}

double sef_quantile(const SefFit& fit, double p) {
  const double d = fit.b - fit.a;
  p = std::clamp(p, 0.0, 1.0);
  const double eta = fit.eta;
  if (std::abs(eta * d) < 1e-6) return fit.a + p * d;
  if (eta > 0) return fit.b + std::log(p + (1 - p) * std::exp(-eta * d)) / eta;
  return fit.a + std::log1p(p * std::expm1(eta * d)) / eta;
}

double sef_loglik(const TruncatedSample& s, double eta, double a, double b) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double lo = std::max(s.u(i), a), hi = std::min(s.v(i), b);
    const double w = hi - lo;
    if (w <= 0.0) continue;  // window reduced to the point X_i carries no information on eta
    ll += eta * (s.x(i) - lo) - log_normalizer(eta, w);
  }
  return ll;
}

SefFit sef_fit(const TruncatedSample& s) {
  if (s.size() < 2) throw std::invalid_argument("tilt model needs at least 2 records");
  SefFit fit;
  fit.a = *std::min_element(s.x().begin(), s.x().end());
  fit.b = *std::max_element(s.x().begin(), s.x().end());
  const double d = fit.b - fit.a;
  if (!(d > 0.0)) throw DegeneracyError("all X equal; the tilt model has no support");

  bool informative = false;
  for (std::size_t i = 0; i < s.size() && !informative; ++i)
    informative = std::min(s.v(i), fit.b) > std::max(s.u(i), fit.a);
  // Any window of positive width makes the log-likelihood strictly concave.
  if (!informative) throw DegeneracyError("every window is a single point; the likelihood is flat in eta");

  const auto ll = [&](double eta) { return sef_loglik(s, eta, fit.a, fit.b); };
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  double half = 50.0 / d;
  for (int expansion = 0; expansion < 8; ++expansion, half *= 4) {
    double lo = -half, hi = half;
    double c = hi - invphi * (hi - lo), e = lo + invphi * (hi - lo);
    double fc = ll(c), fe = ll(e);
    int iter = 0;
    while ((hi - lo) * d > 1e-10 && iter < 500) {
      ++iter;
      if (fc >= fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - invphi * (hi - lo);
        fc = ll(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + invphi * (hi - lo);
        fe = ll(e);
      }
    }
    const double eta = (lo + hi) / 2;
    fit.iterations += iter;
    if (std::abs(eta) < half * (1 - 1e-6)) {
      fit.eta = eta;
      fit.loglik = ll(eta);
      fit.aic = 2.0 - 2.0 * fit.loglik;
      return fit;
    }
  }
  throw ConvergenceError("tilt parameter escapes every search bracket; the likelihood is monotone in eta");
}

}  // namespace dtrunc
