// Property sweeps over the model catalog: max-CF elementary properties,
// sandwich bounds, D-norm axioms and model/sampler consistency. Every check is
// counted; failures are collected with enough context to reproduce them.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "maxcf/all.hpp"
#include "support.hpp"

namespace maxcf::testing {

struct InvariantReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
};

namespace detail {

inline std::string pt(const std::vector<double>& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Pick a point whose cdf value is 0, 1 or inside [0.01, 0.99]; the normal
// band is meaningless for probabilities of a few counts.
inline std::vector<double> cdf_point(const CatalogEntry& e, PointGen& gen) {
  const auto d = e.model.dim();
  std::vector<double> x;
  for (int attempt = 0; attempt < 200; ++attempt) {
    x = gen.positive(d, std::max(e.cdf_floor * 1.01, 0.05 * e.scale), 2.5 * e.scale);
    for (auto& v : x) v = std::max(v, e.cdf_floor * 1.01);
    const double f = e.model.cdf(x);
    if (f == 0.0 || f == 1.0 || (f >= 0.01 && f <= 0.99)) return x;
  }
  return x;
}

}  // namespace detail

/// Elementary max-CF properties of one evaluator on `count` random points.
/// `slack` absorbs the evaluator's own error (zero for closed forms).
inline void check_maxcf_properties(InvariantReport& rep, const std::string& who, const MaxCf& cf, double scale,
                                   PointGen& gen, std::size_t count, double slack) {
  const auto d = cf.dim();
  auto phi = [&](const std::vector<double>& x) { return maxcf_eval(cf, x).value; };
  using detail::num;
  using detail::pt;

  rep.check(phi(std::vector<double>(d, 0.0)) == 1.0, who + ": phi(0) != 1");
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = gen.nonneg(d, 0.02 * scale, 3.0 * scale);
    const double fx = phi(x);
    rep.check(fx >= 1.0 - slack, who + ": phi < 1 at " + pt(x) + " value " + num(fx));

    for (double r : {1.5, 2.0, 5.0}) {
      const double frx = phi(scaled(x, r));
      rep.check(frx <= r * fx + 1e-12 + (1.0 + r) * slack,
                who + ": phi(r x) > r phi(x) for r=" + num(r) + " at " + pt(x));
    }
    for (double r : {0.2, 0.5}) {
      const double frx = phi(scaled(x, r));
      rep.check(frx >= r * fx - 1e-12 - (1.0 + r) * slack,
                who + ": phi(r x) < r phi(x) for r=" + num(r) + " at " + pt(x));
    }

    const auto y = gen.nonneg(d, 0.02 * scale, 3.0 * scale);
    const double fy = phi(y);
    for (double t : {0.25, 0.5, 0.75}) {
      const double fm = phi(mix(x, y, t));
      rep.check(fm <= t * fx + (1.0 - t) * fy + 1e-10 + 2.0 * slack,
                who + ": convexity fails between " + pt(x) + " and " + pt(y) + " at t=" + num(t));
    }

    const auto z = gen.above(x, scale);
    rep.check(phi(z) >= fx - 1e-12 - 2.0 * slack, who + ": not monotone from " + pt(x) + " to " + pt(z));
  }
}

/// max(1, ||x||_D) <= phi(x) <= 1 + ||x||_D for a unit-mean generator.
inline void check_sandwich(InvariantReport& rep, const std::string& who, const MaxCf& cf, const DNorm& norm,
                           double scale, PointGen& gen, std::size_t count, double slack) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = gen.nonneg(cf.dim(), 0.02 * scale, 3.0 * scale);
    const auto est = maxcf_eval(cf, x);
    const double fx = est.value;
    const auto nx = dnorm_eval(norm, x);
    const double band = EstimateWithCI::kBand * (nx.std_error + est.std_error) + 1e-12 * std::max(1.0, nx.value) +
                        slack;
    rep.check(fx >= std::max(1.0, nx.value) - band,
              who + ": phi below max(1, ||x||_D) at " + detail::pt(x));
    rep.check(fx <= 1.0 + nx.value + band, who + ": phi above 1 + ||x||_D at " + detail::pt(x));
  }
}

inline void check_dnorm_axioms(InvariantReport& rep, const CatalogEntry& e, PointGen& gen) {
  const auto norm = DNorm::exact(e.model);
  const auto d = e.model.dim();
  auto val = [&](const std::vector<double>& x) { return dnorm_eval(norm, x).value; };
  const std::string who = "dnorm[" + e.name + "]";

  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> unit(d, 0.0);
    unit[i] = 1.0;
    rep.check(std::abs(val(unit) - 1.0) <= 1e-12, who + ": ||e_" + std::to_string(i) + "|| != 1");
  }
  rep.check(val(std::vector<double>(d, 0.0)) == 0.0, who + ": ||0|| != 0");

  for (int i = 0; i < 100; ++i) {
    const auto x = gen.signed_vec(d, e.scale);
    const auto y = gen.signed_vec(d, e.scale);
    const double nx = val(x), ny = val(y);
    std::vector<double> s(d);
    for (std::size_t j = 0; j < d; ++j) s[j] = x[j] + y[j];
    rep.check(val(s) <= nx + ny + 1e-12 * std::max(1.0, nx + ny), who + ": triangle inequality at " + detail::pt(x));

    const double t = gen.uniform(-4.0, 4.0);
    rep.check(std::abs(val(scaled(x, t)) - std::abs(t) * nx) <= 1e-12 * std::max(1.0, std::abs(t) * nx),
              who + ": homogeneity at " + detail::pt(x) + " t=" + detail::num(t));

    rep.check(nx >= max_norm(x) - 1e-12 * std::max(1.0, nx) && nx <= l1_norm(x) + 1e-12 * std::max(1.0, nx),
              who + ": sandwich ||x||_inf <= ||x||_D <= ||x||_1 at " + detail::pt(x));
    rep.check(nx > 0.0 || max_norm(x) == 0.0, who + ": zero norm at a nonzero point");

    const auto a = gen.nonneg(d, 0.05, e.scale);
    const auto b = gen.above(a, e.scale);
    rep.check(val(a) <= val(b) + 1e-12 * std::max(1.0, val(b)), who + ": not monotone at " + detail::pt(a));
  }
}

/// Sandwich and monotonicity for a Monte Carlo D-norm, widened by its band.
inline void check_dnorm_monte_carlo(InvariantReport& rep, const CatalogEntry& e, std::size_t n, std::uint64_t seed,
                                    PointGen& gen) {
  const auto norm = DNorm::monte_carlo(e.model, n, seed);
  const auto d = e.model.dim();
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(gen.nonneg(d, 0.05, e.scale));
  std::vector<std::vector<double>> upper;
  for (const auto& x : grid) upper.push_back(gen.above(x, e.scale));
  const auto vals = dnorm_eval_grid(norm, grid);
  const auto ups = dnorm_eval_grid(norm, upper);
  const std::string who = "dnorm-mc[" + e.name + "]";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rep.check(vals[i].std_error >= 0.0, who + ": negative standard error");
    rep.check(max_norm(grid[i]) <= vals[i].upper() + 1e-9, who + ": below ||x||_inf at " + detail::pt(grid[i]));
    rep.check(vals[i].lower() - 1e-9 <= l1_norm(grid[i]), who + ": above ||x||_1 at " + detail::pt(grid[i]));
    rep.check(vals[i].lower() <= ups[i].upper() + 1e-9, who + ": not monotone at " + detail::pt(grid[i]));
  }
}

/// Nonnegativity, means, cdf and closed-form max-CF against one large sample.
inline void check_sampler(InvariantReport& rep, const CatalogEntry& e, std::size_t n, std::uint64_t seed,
                          PointGen& gen) {
  const auto& m = e.model;
  const auto d = m.dim();
  const std::string who = "sampler[" + e.name + "]";
  const auto sample = m.sample(seed, n);
  bool nonneg = true;
  for (double v : sample.data()) nonneg = nonneg && v >= 0.0 && std::isfinite(v);
  rep.check(nonneg, who + ": negative or non-finite draw");

  if (m.is_unit_mean())
    for (double mu : m.means()) rep.check(mu == 1.0, who + ": unit-mean model with mean " + detail::num(mu));

  const auto nn = static_cast<double>(n);
  if (e.finite_variance) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto est = sample_mean(sample, [j](std::span<const double> r) { return r[j]; });
      const double gap = std::abs(est.value - m.means()[j]);
      rep.check(gap <= EstimateWithCI::kBand * est.std_error + 1e-9,
                who + ": mean of coordinate " + std::to_string(j) + " is " + detail::num(est.value) + " vs " +
                    detail::num(m.means()[j]));
    }
  }

  if (m.has_cdf()) {
    for (int i = 0; i < 5; ++i) {
      const auto x = detail::cdf_point(e, gen);
      const double f = m.cdf(x);
      std::size_t below = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const auto row = sample.row(r);
        bool all = true;
        for (std::size_t j = 0; j < d; ++j) all = all && row[j] <= x[j];
        below += all;
      }
      const double emp = static_cast<double>(below) / nn;
      const double band = EstimateWithCI::kBand * std::sqrt(f * (1.0 - f) / nn) + 1e-9;
      rep.check(std::abs(emp - f) <= band, who + ": empirical cdf " + detail::num(emp) + " vs " + detail::num(f) +
                                               " at " + detail::pt(x));
    }
  }

  if (m.has_maxcf() && e.finite_variance) {
    for (int i = 0; i < 5; ++i) {
      const auto x = gen.nonneg(d, 0.05 / e.scale, 3.0 / e.scale);
      const auto est = sample_mean(sample, [&x](std::span<const double> r) {
        double v = 1.0;
        for (std::size_t j = 0; j < r.size(); ++j) v = std::max(v, x[j] * r[j]);
        return v;
      });
      const double exact = m.maxcf(x);
      rep.check(std::abs(est.value - exact) <= EstimateWithCI::kBand * est.std_error + 1e-9,
                who + ": Monte Carlo max-CF " + detail::num(est.value) + " vs closed form " + detail::num(exact) +
                    " at " + detail::pt(x));
    }
  }
}

/// Composed and closed T_p iterates on random points.
inline void check_iterates(InvariantReport& rep, const CatalogEntry& e, PointGen& gen, std::size_t points = 20) {
  const auto base = MaxCf::closed_form(e.model);
  for (double p : {0.3, 0.5, 0.9}) {
    for (std::uint64_t k = 1; k <= 20; ++k) {
      const auto composed = tp_iterate(base, p, k, IterateMode::composed);
      const auto closed = tp_iterate(base, p, k, IterateMode::closed);
      for (std::size_t i = 0; i < points; ++i) {
        const auto x = gen.nonneg(e.model.dim(), 0.02, 3.0 * e.scale);
        const double a = maxcf_eval(composed, x).value, b = maxcf_eval(closed, x).value;
        rep.check(std::abs(a - b) <= 1e-12, "iterate[" + e.name + "]: p=" + detail::num(p) + " k=" +
                                                std::to_string(k) + " composed " + detail::num(a) + " closed " +
                                                detail::num(b) + " at " + detail::pt(x));
      }
    }
  }
}

/// max-CF of the componentwise maximum of the two halves of a stacked vector,
/// against the stacked max-CF at (x, x), on shared draws.
inline void check_componentwise_max(InvariantReport& rep, const CatalogEntry& stacked, std::size_t n,
                                    std::uint64_t seed, PointGen& gen) {
  const auto d2 = stacked.model.dim();
  const auto d = d2 / 2;
  const auto sample = stacked.model.sample(seed, n);
  std::vector<double> folded(n * d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) folded[r * d + j] = std::max(sample.row(r)[j], sample.row(r)[d + j]);
  const EmpiricalSample max_sample(n, d, std::move(folded));
  const auto joint = MaxCf::monte_carlo(stacked.model, n, seed);
  for (int i = 0; i < 10; ++i) {
    const auto x = gen.nonneg(d, 0.05, 3.0);
    std::vector<double> xx(x);
    xx.insert(xx.end(), x.begin(), x.end());
    const auto lhs = sample_mean(max_sample, [&x](std::span<const double> r) {
      double v = 1.0;
      for (std::size_t j = 0; j < r.size(); ++j) v = std::max(v, x[j] * r[j]);
      return v;
    });
    const double rhs = maxcf_eval(joint, xx).value;
    rep.check(std::abs(lhs.value - rhs) <= 1e-12 * std::max(1.0, rhs),
              "componentwise-max[" + stacked.name + "]: " + detail::num(lhs.value) + " vs " + detail::num(rhs));
  }
}

struct SuiteOptions {
  std::size_t property_points = 100;
  std::size_t tail_integral_points = 10;
  std::size_t mc_property_n = 20000;
  std::size_t sampler_n = 1000000;
  std::size_t dnorm_mc_n = 200000;
};

/// The full sweep under one seed.
inline InvariantReport run_invariant_suite(std::uint64_t seed, const SuiteOptions& opts = {}) {
  InvariantReport rep;
  PointGen gen(derive_seed(seed, 0xC0FFEE));
  const auto generators = generator_catalog();
  const auto models = model_catalog();

  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& e = models[i];
    if (e.model.has_maxcf())
      check_maxcf_properties(rep, "closed-form[" + e.name + "]", MaxCf::closed_form(e.model), e.scale, gen,
                             opts.property_points, 0.0);
    if (e.model.has_cdf() && e.cdf_floor == 0.0) {
      const auto cf = MaxCf::tail_integral(e.model);
      check_maxcf_properties(rep, "tail-integral[" + e.name + "]", cf, e.scale, gen, opts.tail_integral_points,
                             cf.noise_level());
    }
    check_maxcf_properties(rep, "monte-carlo[" + e.name + "]",
                           MaxCf::monte_carlo(e.model, opts.mc_property_n, derive_seed(seed, 10 + i)), e.scale, gen,
                           opts.property_points / 4, 0.0);
    check_sampler(rep, e, opts.sampler_n, derive_seed(seed, 100 + i), gen);
  }

  for (const auto& e : generators) {
    const auto cf = MaxCf::closed_form(e.model);
    const auto norm = DNorm::exact(e.model);
    check_sandwich(rep, "closed-form[" + e.name + "]", cf, norm, e.scale, gen, opts.property_points, 0.0);
    check_dnorm_axioms(rep, e, gen);
    check_iterates(rep, e, gen);
  }
  // Monte Carlo D-norms and max-CFs are checked against the exact norm too.
  for (std::size_t i : {std::size_t{2}, std::size_t{4}, std::size_t{6}}) {
    const auto& e = generators[i];
    check_dnorm_monte_carlo(rep, e, opts.dnorm_mc_n, derive_seed(seed, 200 + i), gen);
    check_sandwich(rep, "monte-carlo[" + e.name + "]",
                   MaxCf::monte_carlo(e.model, opts.mc_property_n, derive_seed(seed, 300 + i)), DNorm::exact(e.model),
                   e.scale, gen, opts.property_points / 4, 0.0);
  }

  // Flatness of the bounded constant generator near the origin.
  for (std::size_t d : {1, 2, 4}) {
    const auto m = make_constant_generator(d);
    const auto closed = MaxCf::closed_form(m);
    const auto tail = MaxCf::tail_integral(m);
    for (int i = 0; i < 20; ++i) {
      const auto x = gen.nonneg(d, 1e-3, 1.0, 0.2);
      rep.check(maxcf_eval(closed, x).value == 1.0, "flatness: closed form != 1 at " + detail::pt(x));
      rep.check(std::abs(maxcf_eval(tail, x).value - 1.0) <= 1e-12, "flatness: tail integral != 1 at " + detail::pt(x));
    }
  }

  check_componentwise_max(rep, {"perm(4)", make_permutation_generator(4)}, 50000, derive_seed(seed, 400), gen);
  check_componentwise_max(rep, {"frechet(2,4)", make_frechet_lambda_generator(4, 2.0)}, 50000,
                          derive_seed(seed, 401), gen);
  check_componentwise_max(rep, {"maxstable(3,2)", make_frechet_maxstable_model(3.0, 2)}, 50000,
                          derive_seed(seed, 402), gen);
  return rep;
}

}  // namespace maxcf::testing
