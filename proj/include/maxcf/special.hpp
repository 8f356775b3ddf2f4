#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "maxcf/error.hpp"

namespace maxcf {

/// Gamma function by the Lanczos approximation (g = 7, nine terms),
/// relative error below 1e-13 on the positive axis.
inline double gamma_lanczos(double z) {
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kPi = std::numbers::pi;
  if (z < 0.5) {
    // reflection
    return kPi / (std::sin(kPi * z) * gamma_lanczos(1.0 - z));
  }
  z -= 1.0;
  double x = kCoef[0];
  for (std::size_t i = 1; i < kCoef.size(); ++i) x += kCoef[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: need a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(log_prefactor);
  }
  // modified Lentz continued fraction for Q(a, x)
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return 1.0 - std::exp(log_prefactor) * h;
}

/// E max(1, s F) for F standard Frechet with shape alpha > 1, written in
/// terms of level = s^alpha:  e^{-level} + level^{1/alpha} * gamma(1-1/alpha, level).
inline double frechet_max_cf(double alpha, double level) {
  if (!(alpha > 1.0)) throw DomainError("frechet_max_cf: alpha must exceed 1");
  if (level <= 0.0) return 1.0;
  const double a = 1.0 - 1.0 / alpha;
  return std::exp(-level) +
         std::pow(level, 1.0 / alpha) * gamma_lanczos(a) * gamma_p(a, level);
}

}  // namespace maxcf
