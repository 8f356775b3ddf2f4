#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxcf/characteristic.hpp"
#include "maxcf/dnorm.hpp"
#include "maxcf/error.hpp"
#include "maxcf/inversion.hpp"
#include "maxcf/models.hpp"
#include "maxcf/quadrature.hpp"
#include "maxcf/special.hpp"
#include "maxcf/transport.hpp"

namespace maxcf {

namespace detail {

inline nlohmann::json estimate_json(const EstimateWithCI& e) {
  return {{"value", e.value}, {"std_error", e.std_error}};
}

inline std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  return fmt_num(v);
}

/// Length of the longest strictly decreasing subsequence.
inline std::size_t longest_decreasing(const std::vector<double>& v) {
  std::vector<std::size_t> best(v.size(), 1);
  std::size_t out = v.empty() ? 0 : 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (v[i] < v[j]) {
        best[i] = std::max(best[i], best[j] + 1);
        out = std::max(out, best[i]);
      }
  return out;
}

/// Decreasing across at least three quarters of the indices.
inline bool mostly_decreasing(const std::vector<double>& v) {
  const auto need = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(v.size())));
  return longest_decreasing(v) >= need;
}

inline MaxCf zero_noise_maxcf(const RandomVectorModel& model) {
  return model.has_maxcf() ? MaxCf::closed_form(model) : MaxCf::tail_integral(model);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Maxima of multivariate generalized Pareto vectors.

struct GpdMaximaConfig {
  double alpha = 2.0;
  RandomVectorModel generator = make_constant_generator(1);
  double bound = 1.0;
  std::vector<std::uint64_t> n_list = {10, 100, 1000, 10000};
  std::vector<std::vector<double>> grid = {{0.5}, {1.0}, {2.0}};
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double maxcf_threshold = 0.02;
  double w1_threshold = 0.05;
  double mean_threshold = 0.02;
};

struct ConvergenceReport {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> indices;
  std::vector<std::vector<double>> grid;
  /// Monte Carlo max-CF estimates, per index per grid point.
  std::vector<std::vector<EstimateWithCI>> maxcf_values;
  /// Zero-noise values where the finite-n cdf is available everywhere.
  std::vector<std::vector<double>> maxcf_exact;
  std::vector<double> target_values;
  /// Per index: max over the grid of |phi_n - phi_limit|.
  std::vector<double> maxcf_gaps;
  /// Per index: W1 to the limit, comonotone coupling on common uniforms.
  std::vector<EstimateWithCI> w1_values;
  /// Per index: int |F_n - F| by quadrature (NaN when unavailable).
  std::vector<double> w1_exact;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> sample_means;
  std::vector<std::vector<double>> mean_gaps;
  double target_mean = 0.0;
  double maxcf_threshold = 0.0, w1_threshold = 0.0, mean_threshold = 0.0;
  std::string maxcf_verdict;
  std::string w1_verdict;
  std::string verdict;  ///< converged | diverged | inconclusive

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["label"] = label;
    j["seed"] = seed;
    j["indices"] = indices;
    j["grid"] = grid;
    j["target_values"] = target_values;
    j["maxcf_values"] = nlohmann::json::array();
    for (const auto& row : maxcf_values) {
      auto jr = nlohmann::json::array();
      for (const auto& e : row) jr.push_back(detail::estimate_json(e));
      j["maxcf_values"].push_back(jr);
    }
    j["maxcf_exact"] = maxcf_exact;
    j["maxcf_gaps"] = maxcf_gaps;
    j["w1_values"] = nlohmann::json::array();
    for (const auto& e : w1_values) j["w1_values"].push_back(detail::estimate_json(e));
    j["w1_exact"] = nlohmann::json::array();
    for (double v : w1_exact) j["w1_exact"].push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(v));
    j["means"] = means;
    j["sample_means"] = sample_means;
    j["mean_gaps"] = mean_gaps;
    j["target_mean"] = target_mean;
    j["thresholds"] = {{"maxcf_gap", maxcf_threshold}, {"w1", w1_threshold}, {"mean_gap", mean_threshold}};
    j["maxcf_verdict"] = maxcf_verdict;
    j["w1_verdict"] = w1_verdict;
    j["verdict"] = verdict;
    return j;
  }

  /// One row per (index, grid point).
  std::string to_csv() const {
    std::ostringstream os;
    const std::size_t d = grid.empty() ? 0 : grid.front().size();
    os << "n";
    for (std::size_t i = 0; i < d; ++i) os << ",x" << i + 1;
    os << ",phi,phi_std_error,phi_exact,phi_limit,maxcf_gap,w1,w1_std_error,w1_exact\n";
    for (std::size_t k = 0; k < indices.size(); ++k)
      for (std::size_t g = 0; g < grid.size(); ++g) {
        os << indices[k];
        for (double v : grid[g]) os << "," << detail::csv_num(v);
        os << "," << detail::csv_num(maxcf_values[k][g].value) << "," << detail::csv_num(maxcf_values[k][g].std_error)
           << "," << (maxcf_exact.empty() ? "" : detail::csv_num(maxcf_exact[k][g])) << ","
           << detail::csv_num(target_values[g]) << "," << detail::csv_num(maxcf_gaps[k]) << ","
           << detail::csv_num(w1_values[k].value) << "," << detail::csv_num(w1_values[k].std_error) << ","
           << detail::csv_num(w1_exact[k]) << "\n";
      }
    return os.str();
  }
};

/// Y^(n) = max of n mgpd vectors / n^{1/alpha} against the max-stable limit
/// with Frechet(alpha) margins and D-norm of the generator.
inline ConvergenceReport run_gpd_maxima_experiment(const GpdMaximaConfig& cfg) {
  if (!(cfg.alpha > 1.0)) throw InvalidArgument("gpd-maxima: alpha must exceed 1 (infinite mean otherwise)");
  if (cfg.n_list.empty()) throw InvalidArgument("gpd-maxima: empty n_list");
  if (cfg.grid.empty()) throw InvalidArgument("gpd-maxima: empty grid");
  if (cfg.n_mc < 2) throw InvalidArgument("gpd-maxima: n_mc must be >= 2");
  const std::size_t d = cfg.generator.dim();
  for (const auto& x : cfg.grid) {
    if (x.size() != d) throw InvalidArgument("gpd-maxima: grid point dimension mismatch");
    for (double v : x)
      if (!(v > 0.0)) throw DomainError("gpd-maxima: grid points must be > 0");
  }
  const bool constant = cfg.generator.spec().value("kind", "") == "const";
  const DNorm limit_norm = DNorm::exact(cfg.generator);

  ConvergenceReport rep;
  rep.label = "gpd-maxima(alpha=" + detail::fmt_num(cfg.alpha) + "," + cfg.generator.label() + ")";
  rep.seed = cfg.seed;
  rep.grid = cfg.grid;
  rep.target_mean = gamma_lanczos(1.0 - 1.0 / cfg.alpha);
  rep.maxcf_threshold = cfg.maxcf_threshold;
  rep.w1_threshold = cfg.w1_threshold;
  rep.mean_threshold = cfg.mean_threshold;
  for (const auto& x : cfg.grid) rep.target_values.push_back(maxcf_frechet_maxstable(limit_norm, cfg.alpha, x).value);

  // Scalar laws for the constant generator: Y = y (1,...,1), limit = xi (1,...,1).
  const double alpha = cfg.alpha;
  auto limit_quantile = [alpha](double u) { return std::pow(-std::log(u), -1.0 / alpha); };
  auto limit_cdf = [alpha](double y) { return y <= 0.0 ? 0.0 : std::exp(-std::pow(y, -alpha)); };
  std::vector<double> uniforms;
  if (constant) {
    Rng rng(derive_seed(cfg.seed, 0xC0));
    uniforms.resize(cfg.n_mc);
    for (double& u : uniforms) u = rng.uniform();
  }

  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    const std::uint64_t n = cfg.n_list[k];
    const auto model = make_mgpd_maxima_model(cfg.alpha, cfg.generator, cfg.bound, n);
    rep.indices.push_back(n);

    const auto mc = MaxCf::monte_carlo(model, cfg.n_mc, derive_seed(cfg.seed, k), cfg.threads);
    std::vector<EstimateWithCI> row;
    for (const auto& x : cfg.grid) row.push_back(mc.evaluate(x));
    rep.maxcf_values.push_back(row);

    double gap = 0.0;
    if (constant) {
      const auto exact = MaxCf::tail_integral(model);
      std::vector<double> ex;
      for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        ex.push_back(exact.evaluate(cfg.grid[g]).value);
        gap = std::max(gap, std::abs(ex.back() - rep.target_values[g]));
      }
      rep.maxcf_exact.push_back(ex);
    } else {
      for (std::size_t g = 0; g < cfg.grid.size(); ++g)
        gap = std::max(gap, std::abs(row[g].value - rep.target_values[g]));
    }
    rep.maxcf_gaps.push_back(gap);

    if (constant) {
      const double nn = static_cast<double>(n);
      auto y_quantile = [alpha, nn](double u) { return std::pow(-nn * std::expm1(std::log(u) / nn), -1.0 / alpha); };
      long double mean = 0.0L, m2 = 0.0L;
      for (std::size_t i = 0; i < uniforms.size(); ++i) {
        const double diff = std::abs(y_quantile(uniforms[i]) - limit_quantile(uniforms[i]));
        const long double delta = diff - mean;
        mean += delta / static_cast<long double>(i + 1);
        m2 += delta * (diff - mean);
      }
      const double sd = static_cast<double>(std::sqrt(m2 / static_cast<long double>(uniforms.size() - 1)));
      const double dd = static_cast<double>(d);
      rep.w1_values.push_back({dd * static_cast<double>(mean), dd * sd / std::sqrt(static_cast<double>(uniforms.size())),
                               cfg.n_mc, cfg.seed});
      auto integrand = [&](double y) {
        const std::vector<double> yy(d, y);
        return std::abs(model.cdf(yy) - limit_cdf(y));
      };
      QuadratureOptions opts;
      opts.abs_tol = 1e-11;
      opts.tail_power = 2.0;
      rep.w1_exact.push_back(dd * integrate_to_infinity(integrand, 0.0, opts).value);
    } else {
      rep.w1_values.push_back({std::numeric_limits<double>::quiet_NaN(), 0.0, 0, cfg.seed});
      rep.w1_exact.push_back(std::numeric_limits<double>::quiet_NaN());
    }

    rep.means.push_back(model.means());
    const auto sample = model.sample(derive_seed(cfg.seed, 0x5A + k), cfg.n_mc, cfg.threads);
    rep.sample_means.push_back(sample.column_means());
    std::vector<double> mg;
    for (double m : model.means()) mg.push_back(std::abs(m - rep.target_mean));
    rep.mean_gaps.push_back(mg);
  }

  const bool maxcf_ok = detail::mostly_decreasing(rep.maxcf_gaps) && rep.maxcf_gaps.back() < cfg.maxcf_threshold;
  rep.maxcf_verdict = maxcf_ok ? "converged" : "inconclusive";
  if (constant) {
    std::vector<double> w1;
    for (const auto& e : rep.w1_values) w1.push_back(e.value);
    const bool w1_ok = detail::mostly_decreasing(w1) && w1.back() < cfg.w1_threshold;
    rep.w1_verdict = w1_ok ? "converged" : "inconclusive";
  } else {
    rep.w1_verdict = "unavailable";
  }
  const bool mean_ok = std::all_of(rep.mean_gaps.back().begin(), rep.mean_gaps.back().end(),
                                   [&](double g) { return g < cfg.mean_threshold; });
  rep.verdict = maxcf_ok && rep.w1_verdict == "converged" && mean_ok ? "converged" : "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Max-CF versus classical CF for Z_n with P(Z_n = e^n) = 1/n.

struct CounterexampleRow {
  std::uint64_t n = 0;
  double maxcf = 0.0;        ///< phi_n(x)
  double maxcf_lower = 0.0;  ///< x e^n / n - 1
  double cf_gap = 0.0;       ///< |E exp(i Z_n) - 1|
  double cf_gap_bound = 0.0; ///< 2/n
  double mean = 0.0;         ///< e^n / n, also W1 to the point mass at 0
};

struct CounterexampleReport {
  double x = 1.0;
  std::vector<CounterexampleRow> rows;
  std::string maxcf_verdict;
  std::string cf_verdict;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["x"] = x;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"n", r.n},
                           {"maxcf", r.maxcf},
                           {"maxcf_lower_bound", r.maxcf_lower},
                           {"cf_gap", r.cf_gap},
                           {"cf_gap_bound", r.cf_gap_bound},
                           {"w1_to_zero", r.mean}});
    j["maxcf_verdict"] = maxcf_verdict;
    j["cf_verdict"] = cf_verdict;
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "n,maxcf,maxcf_lower_bound,cf_gap,cf_gap_bound,w1_to_zero\n";
    for (const auto& r : rows)
      os << r.n << "," << detail::fmt_num(r.maxcf) << "," << detail::fmt_num(r.maxcf_lower) << ","
         << detail::fmt_num(r.cf_gap) << "," << detail::fmt_num(r.cf_gap_bound) << "," << detail::fmt_num(r.mean)
         << "\n";
    return os.str();
  }
};

inline CounterexampleReport run_counterexample_cf_vs_maxcf(const std::vector<std::uint64_t>& n_list, double x) {
  if (!(x > 0.0)) throw DomainError("counterexample: x must be > 0");
  if (n_list.empty()) throw InvalidArgument("counterexample: empty n_list");
  CounterexampleReport rep;
  rep.x = x;
  for (auto n : n_list) {
    if (n == 0) throw InvalidArgument("counterexample: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double top = std::exp(nn);
    CounterexampleRow r;
    r.n = n;
    r.maxcf = make_two_point_model(n).maxcf(std::vector<double>{x});
    r.maxcf_lower = x * top / nn - 1.0;
    // E e^{iZ} - 1 = (e^{i e^n} - 1) / n
    r.cf_gap = std::abs(std::polar(1.0, top) - 1.0) / nn;
    r.cf_gap_bound = 2.0 / nn;
    r.mean = top / nn;
    rep.rows.push_back(r);
  }
  std::vector<std::uint64_t> sorted_n(n_list);
  std::sort(sorted_n.begin(), sorted_n.end());
  bool grows = rep.rows.size() >= 2;
  bool bounded_gap = true;
  for (const auto& r : rep.rows) {
    if (r.maxcf < r.maxcf_lower) grows = false;
    if (r.cf_gap > r.cf_gap_bound + 1e-15) bounded_gap = false;
  }
  // x e^n / n increases in n >= 1, so the lower bound certifies divergence.
  rep.maxcf_verdict = grows ? "diverged" : "inconclusive";
  rep.cf_verdict = bounded_gap ? "converged" : "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Max-CF of the bivariate vector -eta with P(-eta > y) = exp(-||y||_D).

/// 1 + x1 e^{-1/x1} + x2 e^{-1/x2} - e^{-N}/N with N = ||1/x||_D.
inline double copula_limit_formula(const DNorm& norm, std::span<const double> x) {
  if (norm.dim() != 2 || x.size() != 2) throw InvalidArgument("copula formula: d must be 2");
  for (double v : x)
    if (!(v > 0.0)) throw DomainError("copula formula: x must be > 0");
  const std::vector<double> inv = {1.0 / x[0], 1.0 / x[1]};
  const double big_n = dnorm_eval(norm, inv).value;
  return 1.0 + x[0] * std::exp(-inv[0]) + x[1] * std::exp(-inv[1]) - std::exp(-big_n) / big_n;
}

struct CopulaRow {
  std::vector<double> x;
  double formula = 0.0;
  EstimateWithCI check;
  double residual = 0.0;
  bool pass = false;
};

struct CopulaReport {
  std::string norm;
  std::string method;  ///< monte-carlo | tail-integral
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::vector<CopulaRow> rows;
  bool pass = true;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["norm"] = norm;
    j["method"] = method;
    j["seed"] = seed;
    j["tolerance"] = tolerance;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"x", r.x},
                           {"formula", r.formula},
                           {"check", detail::estimate_json(r.check)},
                           {"residual", r.residual},
                           {"pass", r.pass}});
    j["verdict"] = pass ? "formula-confirmed" : "discrepancy";
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "x1,x2,formula,check,check_std_error,residual,pass\n";
    for (const auto& r : rows)
      os << detail::fmt_num(r.x[0]) << "," << detail::fmt_num(r.x[1]) << "," << detail::fmt_num(r.formula) << ","
         << detail::fmt_num(r.check.value) << "," << detail::fmt_num(r.check.std_error) << ","
         << detail::fmt_num(r.residual) << "," << (r.pass ? 1 : 0) << "\n";
    return os.str();
  }
};

/// Checks the displayed formula against an independent evaluation: Monte
/// Carlo with independent exponentials for the l1-norm, the tail integral
/// of the inclusion-exclusion cdf for a lambda-norm.
inline CopulaReport run_copula_limit_check(const DNorm& norm, const std::vector<std::vector<double>>& grid,
                                           std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  if (norm.dim() != 2) throw InvalidArgument("copula-limit: the D-norm must be bivariate");
  if (grid.empty()) throw InvalidArgument("copula-limit: empty grid");
  CopulaReport rep;
  rep.norm = norm.label();
  rep.seed = seed;
  std::optional<MaxCf> check;
  if (norm.family() == NormFamily::l1) {
    if (n < 2) throw InvalidArgument("copula-limit: Monte Carlo check needs n >= 2");
    check = MaxCf::monte_carlo(make_neg_eta_model(1.0), n, seed, threads);
    rep.method = "monte-carlo";
  } else if (norm.family() == NormFamily::lp) {
    check = MaxCf::tail_integral(make_neg_eta_model(norm.family_param()));
    rep.method = "tail-integral";
    rep.tolerance = 1e-8;
  } else {
    throw InvalidArgument("copula-limit: unsupported D-norm " + norm.label() +
                          " (supported: the l1-norm and lambda-norms)");
  }
  for (const auto& x : grid) {
    CopulaRow r;
    r.x = x;
    r.formula = copula_limit_formula(norm, x);
    r.check = check->evaluate(x);
    r.residual = std::abs(r.formula - r.check.value);
    const double tol = rep.method == "monte-carlo" ? EstimateWithCI::kBand * r.check.std_error : rep.tolerance;
    r.pass = r.residual <= tol;
    rep.pass = rep.pass && r.pass;
    rep.rows.push_back(std::move(r));
  }
  if (rep.method == "monte-carlo") rep.tolerance = EstimateWithCI::kBand;
  return rep;
}

// ---------------------------------------------------------------------------
// phi(1/q) = 1 + SP/q with SP(a) = (1 - a)(ES(a) - q(a)).

struct RiskRow {
  double alpha = 0.0;
  double q = 0.0;
  double es = 0.0;
  double sp = 0.0;
  double phi = 0.0;  ///< phi_Z(1/q)
  double rhs = 0.0;  ///< 1 + SP/q
  double residual = 0.0;
  bool skipped = false;
  bool pass = false;
};

struct RiskReport {
  std::string model;
  double tolerance = 1e-8;
  std::vector<RiskRow> rows;
  bool pass = true;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model"] = model;
    j["tolerance"] = tolerance;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
      if (r.skipped) {
        j["rows"].push_back({{"alpha", r.alpha}, {"skipped", true}, {"reason", "q = 0"}});
        continue;
      }
      j["rows"].push_back({{"alpha", r.alpha},
                           {"q", r.q},
                           {"es", r.es},
                           {"sp", r.sp},
                           {"phi_at_inverse_q", r.phi},
                           {"one_plus_sp_over_q", r.rhs},
                           {"residual", r.residual},
                           {"pass", r.pass}});
    }
    j["verdict"] = pass ? "identity-holds" : "identity-violated";
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "alpha,q,es,sp,phi,rhs,residual,pass\n";
    for (const auto& r : rows) {
      if (r.skipped) {
        os << detail::fmt_num(r.alpha) << ",,,,,,,skipped\n";
        continue;
      }
      os << detail::fmt_num(r.alpha) << "," << detail::fmt_num(r.q) << "," << detail::fmt_num(r.es) << ","
         << detail::fmt_num(r.sp) << "," << detail::fmt_num(r.phi) << "," << detail::fmt_num(r.rhs) << ","
         << detail::fmt_num(r.residual) << "," << (r.pass ? 1 : 0) << "\n";
    }
    return os.str();
  }
};

/// ES(a) = (1/(1-a)) int_a^1 q(b) db, computed with 1 - b = (1-a) w^2 so
/// that an s^{-xi} singularity of q at 1 turns into a bounded integrand.
/// The upper quantile takes 1 - b directly; forming b near 1 would cost
/// relative accuracy eps / (1 - b) exactly where q is steepest.
inline double expected_shortfall(const RandomVectorModel& model, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("expected shortfall: level must lie in (0,1)");
  const double tail = 1.0 - level;
  auto integrand = [&](double w) {
    const double s = tail * w * w;
    if (!(s > 0.0)) return 0.0;
    return 2.0 * w * model.upper_quantile(std::min(s, tail));
  };
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-13;
  opts.max_intervals = 8000;
  return integrate(integrand, 0.0, 1.0, opts).value;
}

inline RiskReport risk_identity_check(const RandomVectorModel& model, const std::vector<double>& alphas,
                                      double tol = 1e-8) {
  if (model.dim() != 1) throw InvalidArgument("risk-identity: model must be univariate");
  if (!model.has_quantile() || !model.has_cdf())
    throw InvalidArgument("risk-identity: model needs a quantile function and a cdf");
  RiskReport rep;
  rep.model = model.label();
  rep.tolerance = tol;
  const MaxCf phi = detail::zero_noise_maxcf(model);
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("risk-identity: alpha must lie in (0,1)");
    RiskRow r;
    r.alpha = a;
    r.q = model.quantile(a);
    if (r.q <= 0.0) {
      r.skipped = true;
      rep.rows.push_back(r);
      continue;
    }
    r.es = expected_shortfall(model, a);
    r.sp = (1.0 - a) * (r.es - r.q);
    r.phi = phi.evaluate(std::vector<double>{1.0 / r.q}).value;
    r.rhs = 1.0 + r.sp / r.q;
    r.residual = std::abs(r.phi - r.rhs);
    r.pass = r.residual <= tol;
    rep.pass = rep.pass && r.pass;
    rep.rows.push_back(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pointwise limits of max-CFs need not be max-CFs.

struct NonclosednessConfig {
  RandomVectorModel base = make_constant_generator(1);
  double p = 0.5;
  std::vector<std::uint64_t> k_list = {1, 2, 5, 10, 20, 40};
  std::vector<std::vector<double>> grid = {{0.5}, {1.0}, {2.0}};
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double limit_tol = 1e-6;
  /// p_j -> 1 for the control sequence that does converge.
  std::vector<double> control_p = {0.5, 0.75, 0.9, 0.99};
};

struct NonclosednessRow {
  std::uint64_t k = 0;
  std::vector<double> values;    ///< closed iterate on the grid
  double limit_gap = 0.0;        ///< max |T_p^k phi - (1 + ||.||_D)|
  double prob_nonzero = 0.0;     ///< exact p^k
  EstimateWithCI prob_nonzero_mc;
  double w1_to_zero = 0.0;       ///< E ||Y^(k)||_1, exact
};

struct ControlRow {
  double p = 0.0;
  double w1_to_base = 0.0;  ///< exact: E|B/p - 1| * E||Z||_1
  double maxcf_gap = 0.0;   ///< max over the grid of |phi_p - phi_base|
  DNormGap dnorm_gap;       ///< Monte Carlo D-norm of the thinned generator vs the exact base
};

struct NonclosednessReport {
  std::string base;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> grid;
  std::vector<double> limit_values;  ///< 1 + ||x||_D
  std::vector<NonclosednessRow> rows;
  std::vector<ControlRow> control;
  MaxCfDiagnostic diagnostic;
  bool limit_reached = false;
  bool limit_flagged = false;
  std::string verdict;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["base"] = base;
    j["p"] = p;
    j["seed"] = seed;
    j["grid"] = grid;
    j["limit_values"] = limit_values;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"k", r.k},
                           {"values", r.values},
                           {"limit_gap", r.limit_gap},
                           {"prob_nonzero", r.prob_nonzero},
                           {"prob_nonzero_mc", detail::estimate_json(r.prob_nonzero_mc)},
                           {"w1_to_zero", r.w1_to_zero}});
    j["control"] = nlohmann::json::array();
    for (const auto& c : control)
      j["control"].push_back({{"p", c.p},
                              {"w1_to_base", c.w1_to_base},
                              {"maxcf_gap", c.maxcf_gap},
                              {"dnorm_gap", c.dnorm_gap.max_gap},
                              {"dnorm_band", c.dnorm_gap.band},
                              {"dnorm_within_band", c.dnorm_gap.within_band}});
    j["diagnostic"] = diagnostic.to_json();
    j["verdict"] = verdict;
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    const std::size_t d = grid.empty() ? 0 : grid.front().size();
    os << "k";
    for (std::size_t i = 0; i < d; ++i) os << ",x" << i + 1;
    os << ",phi_k,limit,limit_gap,prob_nonzero,prob_nonzero_mc,w1_to_zero\n";
    for (const auto& r : rows)
      for (std::size_t g = 0; g < grid.size(); ++g) {
        os << r.k;
        for (double v : grid[g]) os << "," << detail::fmt_num(v);
        os << "," << detail::fmt_num(r.values[g]) << "," << detail::fmt_num(limit_values[g]) << ","
           << detail::fmt_num(r.limit_gap) << "," << detail::fmt_num(r.prob_nonzero) << ","
           << detail::fmt_num(r.prob_nonzero_mc.value) << "," << detail::fmt_num(r.w1_to_zero) << "\n";
      }
    return os.str();
  }
};

inline NonclosednessReport run_nonclosedness_demo(const NonclosednessConfig& cfg) {
  const auto& base = cfg.base;
  if (!base.is_unit_mean()) throw ContractViolation("nonclosedness: base must be a unit-mean generator");
  if (!base.has_maxcf() || !base.has_dnorm())
    throw InvalidArgument("nonclosedness: base needs a closed-form max-CF and an exact D-norm");
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw InvalidArgument("nonclosedness: p must lie in (0,1)");
  if (cfg.k_list.empty() || cfg.grid.empty()) throw InvalidArgument("nonclosedness: empty k_list or grid");
  const std::size_t d = base.dim();
  for (const auto& x : cfg.grid) {
    if (x.size() != d) throw InvalidArgument("nonclosedness: grid point dimension mismatch");
    for (double v : x)
      if (!(v > 0.0)) throw DomainError("nonclosedness: grid points must be > 0");
  }

  NonclosednessReport rep;
  rep.base = base.label();
  rep.p = cfg.p;
  rep.seed = cfg.seed;
  rep.grid = cfg.grid;
  for (const auto& x : cfg.grid) rep.limit_values.push_back(1.0 + base.dnorm(x));
  const MaxCf base_cf = MaxCf::closed_form(base);
  double mean_l1 = 0.0;
  for (double m : base.means()) mean_l1 += m;

  for (std::size_t idx = 0; idx < cfg.k_list.size(); ++idx) {
    const auto k = cfg.k_list[idx];
    NonclosednessRow r;
    r.k = k;
    const auto iterate = tp_iterate(base_cf, cfg.p, k, IterateMode::closed);
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
      r.values.push_back(iterate.evaluate(cfg.grid[g]).value);
      r.limit_gap = std::max(r.limit_gap, std::abs(r.values.back() - rep.limit_values[g]));
    }
    r.prob_nonzero = std::pow(cfg.p, static_cast<double>(k));
    const auto thinned = make_thinned_generator(base, cfg.p, k);
    const auto sample = thinned.sample(derive_seed(cfg.seed, idx), cfg.n_mc, cfg.threads);
    r.prob_nonzero_mc = sample_mean(
        sample,
        [](std::span<const double> z) {
          return std::any_of(z.begin(), z.end(), [](double v) { return v != 0.0; }) ? 1.0 : 0.0;
        },
        cfg.seed);
    r.w1_to_zero = mean_l1;
    rep.rows.push_back(std::move(r));
  }

  for (std::size_t idx = 0; idx < cfg.control_p.size(); ++idx) {
    const double p = cfg.control_p[idx];
    ControlRow c;
    c.p = p;
    // |B/p - 1| is 1/p - 1 with probability p and 1 otherwise.
    c.w1_to_base = 2.0 * (1.0 - p) * mean_l1;
    const auto cf = tp_apply(base_cf, p);
    for (const auto& x : cfg.grid) c.maxcf_gap = std::max(c.maxcf_gap, std::abs(cf.evaluate(x).value - base_cf.evaluate(x).value));
    const auto thinned = make_thinned_generator(base, p, 1);
    c.dnorm_gap = dnorm_pointwise_gap(DNorm::monte_carlo(thinned, cfg.n_mc, derive_seed(cfg.seed, 0xD0 + idx), cfg.threads),
                                      DNorm::exact(base), cfg.grid);
    rep.control.push_back(c);
  }

  const DNorm norm = DNorm::exact(base);
  const auto candidate = MaxCf::candidate(
      d, [norm](std::span<const double> x) { return 1.0 + dnorm_eval(norm, x).value; }, "1+" + norm.label());
  rep.diagnostic = diagnose_max_cf(candidate, cfg.grid);
  rep.limit_reached = rep.rows.back().limit_gap < cfg.limit_tol;
  rep.limit_flagged = rep.diagnostic.flagged();
  rep.verdict = rep.limit_reached && rep.limit_flagged ? "limit is not a max-CF" : "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Distinct distributions have distinct max-CFs.

struct UniquenessRow {
  std::vector<double> x;
  EstimateWithCI a;
  EstimateWithCI b;
  bool separated = false;
};

struct UniquenessReport {
  std::string a, b;
  bool declared_equal = false;
  std::uint64_t seed = 0;
  std::vector<UniquenessRow> rows;
  std::string verdict;  ///< distinct | equal-consistent | inconsistent | inconclusive

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["a"] = a;
    j["b"] = b;
    j["declared_equal"] = declared_equal;
    j["seed"] = seed;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back(
          {{"x", r.x}, {"a", detail::estimate_json(r.a)}, {"b", detail::estimate_json(r.b)}, {"separated", r.separated}});
    j["verdict"] = verdict;
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    const std::size_t d = rows.empty() ? 0 : rows.front().x.size();
    for (std::size_t i = 0; i < d; ++i) os << "x" << i + 1 << ",";
    os << "phi_a,phi_a_std_error,phi_b,phi_b_std_error,separated\n";
    for (const auto& r : rows) {
      for (double v : r.x) os << detail::fmt_num(v) << ",";
      os << detail::fmt_num(r.a.value) << "," << detail::fmt_num(r.a.std_error) << "," << detail::fmt_num(r.b.value)
         << "," << detail::fmt_num(r.b.std_error) << "," << (r.separated ? 1 : 0) << "\n";
    }
    return os.str();
  }
};

/// Monte Carlo max-CFs of both models on the grid; bands value +- 4 se.
inline UniquenessReport uniqueness_smoke_test(const RandomVectorModel& a, const RandomVectorModel& b,
                                              const std::vector<std::vector<double>>& grid, std::size_t n,
                                              std::uint64_t seed, bool declared_equal, unsigned threads = 1) {
  if (a.dim() != b.dim()) throw InvalidArgument("uniqueness: dimension mismatch");
  if (grid.empty()) throw InvalidArgument("uniqueness: empty grid");
  UniquenessReport rep;
  rep.a = a.label();
  rep.b = b.label();
  rep.declared_equal = declared_equal;
  rep.seed = seed;
  const auto ca = MaxCf::monte_carlo(a, n, derive_seed(seed, 1), threads);
  const auto cb = MaxCf::monte_carlo(b, n, derive_seed(seed, 2), threads);
  bool any = false;
  for (const auto& x : grid) {
    UniquenessRow r;
    r.x = x;
    r.a = maxcf_eval(ca, x);
    r.b = maxcf_eval(cb, x);
    r.separated = r.a.upper() < r.b.lower() || r.b.upper() < r.a.lower();
    any = any || r.separated;
    rep.rows.push_back(std::move(r));
  }
  if (declared_equal) rep.verdict = any ? "inconsistent" : "equal-consistent";
  else rep.verdict = any ? "distinct" : "inconclusive";
  return rep;
}

}  // namespace maxcf
