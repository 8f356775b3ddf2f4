#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxcf/characteristic.hpp"
#include "maxcf/error.hpp"
#include "maxcf/models.hpp"

namespace maxcf {

struct InversionOptions {
  /// Forward-difference steps, decreasing.
  std::vector<double> steps = {1e-2, 1e-3, 1e-4, 1e-5};
  /// Two successive extrapolants must agree to this.
  double converge_tol = 1e-7;
};

struct RecoveredCdf {
  double raw = 0.0;    ///< extrapolated right derivative before clamping
  double value = 0.0;  ///< clamped to [0, 1]
  double last_gap = 0.0;
  std::size_t steps_used = 0;
};

namespace detail {

// Richardson tableau on forward differences. Column j removes the O(h^j)
// term; returns the last two entries of the deepest column (up to order 2).
inline std::optional<std::pair<double, double>> richardson_tail(std::span<const double> h,
                                                                std::span<const double> diff) {
  const std::size_t n = diff.size();
  if (n < 2) return std::nullopt;
  // col[i] is the column entry built from diff[i - j .. i]; offset = j
  std::vector<double> col(diff.begin(), diff.end());
  const std::size_t order = std::min<std::size_t>(2, n - 1);
  for (std::size_t j = 1; j <= order; ++j) {
    std::vector<double> next;
    for (std::size_t k = 1; k < col.size(); ++k) {
      const std::size_t i = k + j - 1;  // index of the finest step used
      const double r = std::pow(h[i - 1] / h[i], static_cast<double>(j));
      next.push_back((r * col[k] - col[k - 1]) / (r - 1.0));
    }
    col = std::move(next);
  }
  if (col.size() == 1) return std::pair{diff[n - 1], col[0]};
  return std::pair{col[col.size() - 2], col[col.size() - 1]};
}

}  // namespace detail

/// Pr(Z <= x) as the right derivative at t = 1 of g(t) = t phi(1/(t x)),
/// for x > 0. Forward differences over the step schedule are Richardson
/// extrapolated; if a kink sits inside the largest steps, the largest step is
/// dropped and the tableau rebuilt.
inline RecoveredCdf recover_cdf(const MaxCf& cf, std::span<const double> x, const InversionOptions& opts = {}) {
  if (x.size() != cf.dim()) throw InvalidArgument("inversion: dimension mismatch");
  for (double v : x)
    if (!(v > 0.0)) throw DomainError("inversion: x must be > 0 in every coordinate");
  if (opts.steps.size() < 2) throw InvalidArgument("inversion: need at least two steps");
  const double h_min = *std::min_element(opts.steps.begin(), opts.steps.end());
  const double noise = cf.noise_level();
  if (noise > 0.0 && 2.0 * noise / h_min > opts.converge_tol) {
    std::ostringstream msg;
    msg << "inversion refused: evaluator noise " << noise << " dominates the step " << h_min << " ("
        << cf.provenance() << ")";
    throw NoiseDominatesStep(msg.str(), noise);
  }

  std::vector<double> y(x.size());
  auto g = [&](double t) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (t * x[i]);
    return t * cf.evaluate(y).value;
  };
  const double g1 = g(1.0);
  std::vector<double> diff;
  for (double h : opts.steps) diff.push_back((g(1.0 + h) - g1) / h);

  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t drop = 0; drop + 2 <= opts.steps.size(); ++drop) {
    std::span<const double> hs(opts.steps.data() + drop, opts.steps.size() - drop);
    std::span<const double> ds(diff.data() + drop, diff.size() - drop);
    const auto tail = detail::richardson_tail(hs, ds);
    if (!tail) break;
    const double gap = std::abs(tail->second - tail->first);
    best_gap = std::min(best_gap, gap);
    if (gap < opts.converge_tol) {
      RecoveredCdf out;
      out.raw = tail->second;
      out.value = std::clamp(out.raw, 0.0, 1.0);
      out.last_gap = gap;
      out.steps_used = hs.size();
      return out;
    }
  }
  std::ostringstream msg;
  msg << "inversion: right derivative did not converge (best extrapolant gap " << best_gap << ")";
  throw NumericFailure(msg.str(), best_gap);
}

inline double invert_maxcf(const MaxCf& cf, std::span<const double> x, const InversionOptions& opts = {}) {
  return recover_cdf(cf, x, opts).value;
}

/// Outcome of checking the two hypotheses under which a function equals the
/// max-CF of a given model.
struct InversionCriterionReport {
  struct Point {
    std::vector<double> x;
    double derivative = 0.0;  ///< d/dt t psi(1/(t x)) at t = 1
    double cdf = 0.0;         ///< Pr(Z <= x)
    double vanishing = 0.0;   ///< t_far (psi(1/(t_far x)) - 1)
    double psi = 0.0;
    double phi = 0.0;
    bool derivative_ok = false;
    bool vanishing_ok = false;
    bool match_ok = false;
  };
  std::vector<Point> points;
  bool hypothesis_a = true;  ///< derivative matches the cdf on the grid
  bool hypothesis_b = true;  ///< vanishing condition holds on the grid
  bool identified = true;    ///< psi agrees with phi_Z on the grid
  std::vector<std::string> failures;

  bool all_pass() const { return hypothesis_a && hypothesis_b && identified; }
};

struct CriterionTolerances {
  double derivative = 1e-6;
  double vanishing = 1e-3;
  double match = 1e-6;
};

inline InversionCriterionReport verify_inversion_criterion(const MaxCf& psi, const RandomVectorModel& model,
                                                           const std::vector<std::vector<double>>& grid,
                                                           double t_far, const CriterionTolerances& tol = {}) {
  const MaxCf phi = model.has_maxcf() ? MaxCf::closed_form(model) : MaxCf::tail_integral(model);
  InversionCriterionReport rep;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto& x = grid[gi];
    InversionCriterionReport::Point pt;
    pt.x = x;
    pt.cdf = model.cdf(x);
    try {
      pt.derivative = recover_cdf(psi, x).raw;
      pt.derivative_ok = std::abs(pt.derivative - pt.cdf) <= tol.derivative;
    } catch (const NumericFailure& e) {
      rep.failures.push_back("point " + std::to_string(gi) + ": " + e.what());
    }
    std::vector<double> far(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) far[i] = 1.0 / (t_far * x[i]);
    pt.vanishing = t_far * (psi.evaluate(far).value - 1.0);
    pt.vanishing_ok = std::abs(pt.vanishing) <= tol.vanishing;
    pt.psi = psi.evaluate(x).value;
    pt.phi = phi.evaluate(x).value;
    pt.match_ok = std::abs(pt.psi - pt.phi) <= tol.match;

    if (!pt.derivative_ok) {
      rep.hypothesis_a = false;
      rep.failures.push_back("hypothesis (a) fails at point " + std::to_string(gi) + ": derivative " +
                             detail::fmt_num(pt.derivative) + " vs cdf " + detail::fmt_num(pt.cdf));
    }
    if (!pt.vanishing_ok) {
      rep.hypothesis_b = false;
      rep.failures.push_back("hypothesis (b) fails at point " + std::to_string(gi) + ": t(psi-1) = " +
                             detail::fmt_num(pt.vanishing));
    }
    if (!pt.match_ok) rep.identified = false;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

struct DiagnosticOptions {
  double s_min = 1e-3;
  double s_max = 1e3;
  std::size_t points_per_decade = 4;
  double t_far = 1e6;
  /// Slack for values outside [0,1] and for monotonicity. Matches the
  /// accuracy of the recovered cdf; at large arguments the differences carry
  /// roundoff of order eps * |psi| / step.
  double range_tol = 1e-6;
  /// Slack for the limits at the ends of each ray and the vanishing condition.
  double limit_tol = 1e-3;
  /// When set, the recovered value at s_min must approach this mass at 0.
  std::optional<double> expected_mass_at_zero;
};

/// Necessary conditions for a max-CF, checked along rays s * x.
struct MaxCfDiagnostic {
  struct Flag {
    std::string code;  ///< out-of-range | non-monotone | upper-limit | lower-limit | non-vanishing | constant | derivative-failed
    std::size_t ray = 0;
    std::string detail;
  };
  struct Ray {
    std::vector<double> x;
    std::vector<double> s;
    std::vector<double> recovered;
    double vanishing = 0.0;
  };
  std::vector<Ray> rays;
  std::vector<Flag> flags;

  bool flagged() const { return !flags.empty(); }
  bool has_flag(const std::string& code) const {
    return std::any_of(flags.begin(), flags.end(), [&](const Flag& f) { return f.code == code; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["rays"] = nlohmann::json::array();
    for (const auto& r : rays) {
      nlohmann::json jr;
      jr["x"] = r.x;
      jr["vanishing"] = r.vanishing;
      jr["points"] = nlohmann::json::array();
      for (std::size_t i = 0; i < r.s.size(); ++i) jr["points"].push_back({r.s[i], r.recovered[i]});
      j["rays"].push_back(std::move(jr));
    }
    j["flags"] = nlohmann::json::array();
    for (const auto& f : flags) j["flags"].push_back({{"code", f.code}, {"ray", f.ray}, {"detail", f.detail}});
    j["verdict"] = flagged() ? "not-a-max-cf" : "consistent-with-max-cf";
    return j;
  }
};

inline MaxCfDiagnostic diagnose_max_cf(const MaxCf& candidate, const std::vector<std::vector<double>>& rays,
                                       const DiagnosticOptions& opts = {}) {
  if (rays.empty()) throw InvalidArgument("diagnose_max_cf: no rays");
  if (candidate.noise_level() != 0.0)
    throw NoiseDominatesStep("diagnose_max_cf: candidate must be evaluable without noise", candidate.noise_level());
  const double decades = std::log10(opts.s_max / opts.s_min);
  const auto count = static_cast<std::size_t>(std::lround(decades * opts.points_per_decade)) + 1;

  MaxCfDiagnostic out;
  bool constant = true;
  std::optional<double> first_value;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const auto& x = rays[r];
    MaxCfDiagnostic::Ray ray;
    ray.x = x;
    auto flag = [&](std::string code, std::string detail) {
      out.flags.push_back({std::move(code), r, std::move(detail)});
    };
    bool failed = false;
    for (std::size_t i = 0; i < count; ++i) {
      const double s = opts.s_min * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(count - 1));
      std::vector<double> sx(x.begin(), x.end());
      for (double& v : sx) v *= s;
      const double value = candidate.evaluate(sx).value;
      if (!first_value) first_value = value;
      if (std::abs(value - *first_value) > 1e-12 * std::max(1.0, std::abs(*first_value))) constant = false;
      try {
        ray.s.push_back(s);
        ray.recovered.push_back(recover_cdf(candidate, sx).raw);
      } catch (const NumericFailure& e) {
        ray.s.pop_back();
        if (!failed) flag("derivative-failed", e.what());
        failed = true;
      }
    }
    for (std::size_t i = 0; i < ray.recovered.size(); ++i) {
      const double v = ray.recovered[i];
      if (v < -opts.range_tol || v > 1.0 + opts.range_tol) {
        flag("out-of-range", "recovered value " + detail::fmt_num(v) + " at s=" + detail::fmt_num(ray.s[i]));
        break;
      }
    }
    for (std::size_t i = 1; i < ray.recovered.size(); ++i) {
      if (ray.recovered[i] < ray.recovered[i - 1] - opts.range_tol) {
        flag("non-monotone", "recovered value decreases at s=" + detail::fmt_num(ray.s[i]));
        break;
      }
    }
    if (!ray.recovered.empty() && std::abs(ray.recovered.back() - 1.0) > opts.limit_tol)
      flag("upper-limit", "recovered value at s_max is " + detail::fmt_num(ray.recovered.back()) + ", not 1");
    if (opts.expected_mass_at_zero && !ray.recovered.empty() &&
        std::abs(ray.recovered.front() - *opts.expected_mass_at_zero) > opts.limit_tol)
      flag("lower-limit", "recovered value at s_min is " + detail::fmt_num(ray.recovered.front()));

    std::vector<double> far(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) far[i] = 1.0 / (opts.t_far * x[i]);
    ray.vanishing = opts.t_far * (candidate.evaluate(far).value - 1.0);
    if (std::abs(ray.vanishing) > opts.limit_tol)
      flag("non-vanishing", "t(psi(1/(t x)) - 1) = " + detail::fmt_num(ray.vanishing) + " at t=" +
                                detail::fmt_num(opts.t_far));
    out.rays.push_back(std::move(ray));
  }
  if (constant) out.flags.push_back({"constant", 0, "candidate is constant on every probed point"});
  return out;
}

}  // namespace maxcf
