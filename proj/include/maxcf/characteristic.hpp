#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "maxcf/dnorm.hpp"
#include "maxcf/error.hpp"
#include "maxcf/models.hpp"
#include "maxcf/quadrature.hpp"
#include "maxcf/sample.hpp"

namespace maxcf {

/// Parameters of a T_p iterate: x -> (1 - p^k) + p^k f(x / p^k).
struct TpChain {
  double p = 1.0;
  std::uint64_t k = 1;

  double keep() const { return std::pow(p, static_cast<double>(k)); }
};

/// Quadrature settings for the tail-integral representation of a max-CF.
inline QuadratureOptions tail_integral_defaults() {
  QuadratureOptions o;
  o.abs_tol = 1e-10;
  o.rel_tol = 1e-14;
  o.tail_power = 4.0;
  o.max_intervals = 8000;
  return o;
}

/// t * phi(x/t) = t + int_t^inf 1 - P(x_i Z_i <= y for all i) dy, for x >= 0,
/// t > 0. Coordinates equal to 0 drop out of the max.
inline QuadratureResult maxcf_tail_integral_detailed(const RandomVectorModel& model,
                                                     std::span<const double> x, double t,
                                                     const QuadratureOptions& opts = tail_integral_defaults()) {
  if (!model.has_cdf()) throw InvalidArgument(model.label() + ": tail integral needs a cdf");
  if (x.size() != model.dim()) throw InvalidArgument("tail integral: dimension mismatch");
  for (double v : x)
    if (!(v >= 0.0)) throw DomainError("tail integral: x must be >= 0");
  if (!(t > 0.0)) throw DomainError("tail integral: t must be positive");
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) return {t, 0.0, 0};
  std::vector<double> arg(x.size());
  auto integrand = [&](double y) {
    for (std::size_t i = 0; i < x.size(); ++i)
      arg[i] = x[i] > 0.0 ? y / x[i] : std::numeric_limits<double>::infinity();
    return model.exceedance(arg);
  };
  // Jumps of the integrand sit at x_i * atom; panels must not straddle them.
  std::vector<double> cuts;
  for (double a : model.atoms())
    for (double v : x)
      if (v * a > t) cuts.push_back(v * a);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult res;
  double lo = t;
  for (double c : cuts) {
    const auto piece = integrate(integrand, lo, c, opts);
    res.value += piece.value;
    res.abs_error += piece.abs_error;
    res.intervals += piece.intervals;
    lo = c;
  }
  const auto tail = integrate_to_infinity(integrand, lo, opts);
  res.value += tail.value + t;
  res.abs_error += tail.abs_error;
  res.intervals += tail.intervals;
  return res;
}

inline double maxcf_tail_integral(const RandomVectorModel& model, std::span<const double> x, double t,
                                  const QuadratureOptions& opts = tail_integral_defaults()) {
  return maxcf_tail_integral_detailed(model, x, t, opts).value;
}

/// An evaluable max-CF on the nonnegative orthant together with where its
/// values come from. Cheap to copy; transformed max-CFs share their base.
class MaxCf {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  enum class Kind { closed_form, monte_carlo, transformed, tail_integral, candidate };

  /// Closed form carried by a model.
  static MaxCf closed_form(const RandomVectorModel& model) {
    if (!model.has_maxcf()) throw InvalidArgument(model.label() + ": no closed-form max-CF");
    auto m = std::make_shared<RandomVectorModel>(model);
    return MaxCf(State{model.dim(), Kind::closed_form, "closed-form[" + model.label() + "]",
                       model.is_unit_mean(), ClosedForm{[m](std::span<const double> x) { return m->maxcf(x); }}});
  }

  /// Closed form given directly as a function.
  static MaxCf closed_form(std::size_t dim, Fn fn, std::string label, bool unit_mean_generator = false) {
    return MaxCf(State{dim, Kind::closed_form, "closed-form[" + label + "]", unit_mean_generator,
                       ClosedForm{std::move(fn)}});
  }

  /// Sample mean of max(1, x_1 Z_1, ..., x_d Z_d) over one fixed sample;
  /// every point sees the same draws.
  static MaxCf monte_carlo(const RandomVectorModel& model, std::size_t n, std::uint64_t seed,
                           unsigned threads = 1) {
    if (n < 2) throw InvalidArgument("Monte Carlo max-CF needs n >= 2");
    auto sample = std::make_shared<const EmpiricalSample>(model.sample(seed, n, threads));
    std::ostringstream label;
    label << "monte-carlo[" << model.label() << ";n=" << n << ";seed=" << seed << "]";
    return MaxCf(State{model.dim(), Kind::monte_carlo, label.str(), model.is_unit_mean(),
                       MonteCarlo{std::move(sample), seed}});
  }

  /// Zero-noise evaluation through the tail integral of the model's cdf.
  static MaxCf tail_integral(const RandomVectorModel& model,
                             QuadratureOptions opts = tail_integral_defaults()) {
    if (!model.has_cdf()) throw InvalidArgument(model.label() + ": tail integral needs a cdf");
    auto m = std::make_shared<RandomVectorModel>(model);
    return MaxCf(State{model.dim(), Kind::tail_integral, "tail-integral[" + model.label() + "]",
                       model.is_unit_mean(), TailIntegral{std::move(m), opts}});
  }

  /// Arbitrary function; no max-CF properties are assumed or enforced.
  static MaxCf candidate(std::size_t dim, Fn fn, std::string label, bool declared_generator = false) {
    return MaxCf(State{dim, Kind::candidate, "candidate[" + label + "]", declared_generator,
                       Candidate{std::move(fn)}});
  }

  /// T_p iterate of `base` with the closed coefficient pair.
  static MaxCf transformed(const MaxCf& base, TpChain chain) {
    std::ostringstream label;
    label.precision(15);
    label << "T_p(p=" << chain.p << ";k=" << chain.k << ")<-" << base.provenance();
    return MaxCf(State{base.dim(), Kind::transformed, label.str(), base.is_unit_mean(),
                       Transformed{std::make_shared<const MaxCf>(base), chain}});
  }

  std::size_t dim() const noexcept { return s_->dim; }
  Kind kind() const noexcept { return s_->kind; }
  const std::string& provenance() const noexcept { return s_->provenance; }
  /// True when the underlying vector is a unit-mean generator (declared for candidates).
  bool is_unit_mean() const noexcept { return s_->unit_mean; }

  /// Upper bound on the absolute evaluation error: 0 for closed forms and
  /// candidates, the quadrature tolerance for tail integrals, infinity for
  /// Monte Carlo (stochastic).
  double noise_level() const {
    return std::visit(
        [](const auto& e) -> double {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, MonteCarlo>) return std::numeric_limits<double>::infinity();
          else if constexpr (std::is_same_v<T, TailIntegral>) return e.opts.abs_tol;
          else if constexpr (std::is_same_v<T, Transformed>) return e.chain.keep() * e.base->noise_level();
          else return 0.0;
        },
        s_->eval);
  }

  /// For transformed max-CFs: the base and the chain.
  const MaxCf* base() const {
    auto* t = std::get_if<Transformed>(&s_->eval);
    return t ? t->base.get() : nullptr;
  }
  std::optional<TpChain> chain() const {
    auto* t = std::get_if<Transformed>(&s_->eval);
    return t ? std::optional<TpChain>(t->chain) : std::nullopt;
  }

  /// Raw evaluation without argument checks; see maxcf_eval.
  EstimateWithCI evaluate(std::span<const double> x) const {
    return std::visit([&](const auto& e) { return eval_one(e, x); }, s_->eval);
  }

 private:
  struct ClosedForm {
    Fn fn;
  };
  struct MonteCarlo {
    std::shared_ptr<const EmpiricalSample> sample;
    std::uint64_t seed;
  };
  struct Transformed {
    std::shared_ptr<const MaxCf> base;
    TpChain chain;
  };
  struct TailIntegral {
    std::shared_ptr<const RandomVectorModel> model;
    QuadratureOptions opts;
  };
  struct Candidate {
    Fn fn;
  };
  struct State {
    std::size_t dim;
    Kind kind;
    std::string provenance;
    bool unit_mean;
    std::variant<ClosedForm, MonteCarlo, Transformed, TailIntegral, Candidate> eval;
  };

  explicit MaxCf(State s) : s_(std::make_shared<const State>(std::move(s))) {
    if (s_->dim == 0) throw InvalidArgument("max-CF dimension must be >= 1");
  }

  static EstimateWithCI eval_one(const ClosedForm& e, std::span<const double> x) {
    return EstimateWithCI::exact_value(e.fn(x));
  }
  static EstimateWithCI eval_one(const Candidate& e, std::span<const double> x) {
    return EstimateWithCI::exact_value(e.fn(x));
  }
  static EstimateWithCI eval_one(const MonteCarlo& e, std::span<const double> x) {
    return sample_mean(
        *e.sample,
        [&](std::span<const double> z) {
          double m = 1.0;
          for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, x[i] * z[i]);
          return m;
        },
        e.seed);
  }
  static EstimateWithCI eval_one(const Transformed& e, std::span<const double> x) {
    const double keep = e.chain.keep();
    std::vector<double> y(x.begin(), x.end());
    for (double& v : y) v /= keep;
    auto b = e.base->evaluate(y);
    b.value = (1.0 - keep) + keep * b.value;
    b.std_error *= keep;
    return b;
  }
  static EstimateWithCI eval_one(const TailIntegral& e, std::span<const double> x) {
    return EstimateWithCI::exact_value(maxcf_tail_integral(*e.model, x, 1.0, e.opts));
  }

  std::shared_ptr<const State> s_;
};

/// phi(x) with argument checks.
inline EstimateWithCI maxcf_eval(const MaxCf& cf, std::span<const double> x) {
  if (x.size() != cf.dim())
    throw InvalidArgument("dimension mismatch: max-CF on R^" + std::to_string(cf.dim()) +
                          " evaluated at a " + std::to_string(x.size()) + "-vector");
  for (double v : x)
    if (!(v >= 0.0)) throw DomainError("max-CF is defined for x >= 0 only");
  return cf.evaluate(x);
}

/// Max-CF of the max-stable vector with Frechet(alpha) margins and
/// distribution exp(-||1/x^alpha||_D):
///   1 + N^{1/alpha} int_{N^{-1/alpha}}^inf 1 - exp(-y^-alpha) dy,  N = ||x^alpha||_D.
/// After u = y^-alpha and u = v^m with m = alpha/(alpha-1) the integrand is
/// (m/alpha)(1 - exp(-v^m)) / v^m on (0, N^{1/m}), bounded at 0.
/// The standard error propagates a Monte Carlo D-norm through dphi/dN.
inline EstimateWithCI maxcf_frechet_maxstable(const DNorm& norm, double alpha, std::span<const double> x,
                                              const QuadratureOptions& opts = {1e-12, 1e-14}) {
  if (!(alpha > 1.0)) throw InvalidArgument("invalid parameter: alpha must exceed 1");
  if (x.size() != norm.dim()) throw InvalidArgument("dimension mismatch");
  for (double v : x)
    if (!(v >= 0.0)) throw DomainError("max-CF is defined for x >= 0 only");
  std::vector<double> powered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) powered[i] = std::pow(x[i], alpha);
  const auto level = dnorm_eval(norm, powered);
  const double big_n = level.value;
  if (big_n <= 0.0) return {1.0, 0.0, level.n, level.seed};

  const double m = alpha / (alpha - 1.0);
  auto integrand = [m, alpha](double v) {
    const double vm = std::pow(v, m);
    return vm == 0.0 ? m / alpha : (m / alpha) * (-std::expm1(-vm)) / vm;
  };
  const double upper = std::pow(big_n, 1.0 / m);
  const double integral = integrate(integrand, 0.0, upper, opts).value;
  const double phi = 1.0 + std::pow(big_n, 1.0 / alpha) * integral;
  const double slope = (phi - std::exp(-big_n)) / (alpha * big_n);
  return {phi, slope * level.std_error, level.n, level.seed};
}

/// T_p(f) = 1 - p + p f(. / p), p in (0, 1].
inline MaxCf tp_apply(const MaxCf& f, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("T_p: p must lie in (0,1]");
  if (p == 1.0) return f;
  return MaxCf::transformed(f, {p, 1});
}

enum class IterateMode { composed, closed };

/// k-th iterate of T_p, either as k nested applications or through
/// (1 - p^k) + p^k f(. / p^k).
inline MaxCf tp_iterate(const MaxCf& f, double p, std::uint64_t k, IterateMode mode) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("T_p iterate: p must lie in (0,1)");
  if (k == 0) return f;
  if (mode == IterateMode::closed) return MaxCf::transformed(f, {p, k});
  MaxCf out = f;
  for (std::uint64_t i = 0; i < k; ++i) out = tp_apply(out, p);
  return out;
}

struct TpLimitOptions {
  /// The limit is computed for each p and must agree across them.
  std::vector<double> p_values = {0.5, 0.25, 0.75};
  std::uint64_t k_max = 200;
};

struct TpLimitResult {
  double value = 0.0;  ///< limit for p_values.front()
  std::vector<double> per_p;
  std::vector<std::uint64_t> iterations;
};

/// Pointwise limit of T_p^{(k)}(f)(x) as k grows. Converged once two
/// consecutive increments fall below tol and p^k <= tol/2 (for a generator,
/// 0 <= limit - T_p^{(k)}(f)(x) <= p^k).
inline TpLimitResult tp_limit(const MaxCf& f, const std::optional<DNorm>& dnorm_hint,
                              std::span<const double> x, double tol, const TpLimitOptions& opts = {}) {
  if (!f.is_unit_mean())
    throw ContractViolation("tp_limit: f must be the max-CF of a unit-mean generator (" + f.provenance() + ")");
  if (!(tol > 0.0)) throw InvalidArgument("tp_limit: tol must be positive");
  if (opts.p_values.empty()) throw InvalidArgument("tp_limit: no p values");
  maxcf_eval(f, x);  // argument checks

  TpLimitResult out;
  for (double p : opts.p_values) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("tp_limit: p must lie in (0,1)");
    double prev = f.evaluate(x).value;
    int small_steps = 0;
    bool done = false;
    double last_increment = 0.0;
    for (std::uint64_t k = 1; k <= opts.k_max; ++k) {
      const double cur = MaxCf::transformed(f, {p, k}).evaluate(x).value;
      last_increment = std::abs(cur - prev);
      small_steps = last_increment < tol ? small_steps + 1 : 0;
      prev = cur;
      if (small_steps >= 2 && std::pow(p, static_cast<double>(k)) <= tol / 2) {
        out.per_p.push_back(cur);
        out.iterations.push_back(k);
        done = true;
        break;
      }
    }
    if (!done) {
      std::ostringstream msg;
      msg << "tp_limit: no convergence after " << opts.k_max << " iterations at p=" << p
          << " (last increment " << last_increment << ")";
      throw Divergence(msg.str(), last_increment);
    }
  }
  out.value = out.per_p.front();
  const auto [lo, hi] = std::minmax_element(out.per_p.begin(), out.per_p.end());
  if (*hi - *lo > 2.0 * tol) {
    std::ostringstream msg;
    msg << "tp_limit: limit depends on p (spread " << *hi - *lo << ")";
    throw NumericFailure(msg.str(), *hi - *lo);
  }
  if (dnorm_hint) {
    const auto norm = dnorm_eval(*dnorm_hint, x);
    const double expected = 1.0 + norm.value;
    const double allowed = tol + EstimateWithCI::kBand * norm.std_error;
    if (std::abs(out.value - expected) > allowed) {
      std::ostringstream msg;
      msg.precision(15);
      msg << "tp_limit: limit " << out.value << " differs from 1 + ||x||_D = " << expected;
      throw NumericFailure(msg.str(), std::abs(out.value - expected));
    }
  }
  return out;
}

}  // namespace maxcf
