#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "maxcf/error.hpp"

namespace maxcf {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-13;
  std::size_t max_intervals = 4000;
  /// Map for (a, inf): y = a + tail_scale * ((1-u)^(-tail_power) - 1).
  /// Larger powers flatten algebraically decaying tails near u = 1.
  double tail_power = 1.0;
  double tail_scale = 1.0;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kMin = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  const double fc = f(center);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  double res_abs = std::abs(res_k);
  std::array<double, 7> f1{}, f2{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    res_k += kWgk[j] * sum;
    res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j)
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = res_k * half;
  res_abs *= abs_half;
  res_asc *= abs_half;
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  if (res_abs > kMin / (50.0 * kEps)) err = std::max(kEps * 50.0 * res_abs, err);
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval.
/// Throws NumericFailure (carrying the achieved error) when the interval
/// budget runs out before the tolerance is met.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b))
    throw InvalidArgument("integrate: finite limits required; use integrate_to_infinity");

  std::priority_queue<detail::Panel> heap;
  std::vector<detail::Panel> frozen;  // too narrow to split further
  double total = 0.0;
  double total_err = 0.0;
  {
    const auto p = detail::gauss_kronrod_15(f, a, b);
    total = p.value;
    total_err = p.error;
    heap.push(p);
  }
  std::size_t count = 1;
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

  while (total_err > target() && !heap.empty()) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    if (count >= opts.max_intervals) {
      heap.push(worst);
      break;
    }
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    ++count;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed drift from the incremental updates.
  double value = 0.0, err = 0.0;
  for (const auto& p : frozen) value += p.value, err += p.error;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value) || err > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: achieved error "
        << err << " after " << count << " intervals";
    throw NumericFailure(msg.str(), err);
  }
  return {value, err, count};
}

/// Integral over (a, inf) through the map u in (0,1) -> a + s((1-u)^-m - 1).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureOptions& opts = {}) {
  const double m = opts.tail_power;
  const double s = opts.tail_scale;
  if (!(m > 0.0) || !(s > 0.0)) throw InvalidArgument("integrate_to_infinity: bad tail map");
  auto mapped = [&](double u) -> double {
    const double w = 1.0 - u;
    const double g = std::pow(w, -m);
    const double y = a + s * (g - 1.0);
    const double jac = s * m * g / w;
    if (!std::isfinite(y) || !std::isfinite(jac)) return 0.0;
    const double fy = f(y);
    return fy == 0.0 ? 0.0 : fy * jac;
  };
  return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace maxcf
