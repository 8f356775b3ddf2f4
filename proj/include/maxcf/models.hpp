#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxcf/error.hpp"
#include "maxcf/quadrature.hpp"
#include "maxcf/random.hpp"
#include "maxcf/sample.hpp"
#include "maxcf/special.hpp"

namespace maxcf {

/// Which classical norm a generator's D-norm is, when it is one.
enum class NormFamily { sup, l1, lp, other };

/// A nonnegative integrable random vector: a sampler plus whatever closed
/// forms are known for it. Immutable once built; copies share nothing
/// mutable, so sampling from several threads with distinct seeds is safe.
class RandomVectorModel {
 public:
  using RowSampler = std::function<void(Rng&, std::span<double>)>;
  using VectorFn = std::function<double(std::span<const double>)>;
  using ScalarFn = std::function<double(double)>;

  /// Everything a factory fills in.
  struct Parts {
    std::size_t dim = 0;
    std::vector<double> means;
    RowSampler draw;
    std::optional<VectorFn> cdf;
    /// 1 - cdf without cancellation; optional.
    std::optional<VectorFn> exceedance;
    std::optional<VectorFn> maxcf;
    std::optional<ScalarFn> quantile;
    /// s -> quantile(1 - s) without forming 1 - s; optional.
    std::optional<ScalarFn> upper_quantile;
    /// x -> E max_i |x_i| Z_i, for generators with an exact evaluator.
    std::optional<VectorFn> dnorm;
    std::string dnorm_method = "closed-form";
    NormFamily family = NormFamily::other;
    double family_param = 0.0;
    bool unit_mean = false;
    /// Almost-sure upper bound on every component, when finite.
    std::optional<double> bound;
    /// Positive points where some marginal cdf jumps.
    std::vector<double> atoms;
    nlohmann::json spec;
    std::string label;
  };

  /// Rows per independently seeded chunk. Fixed so that samples do not
  /// depend on the thread count.
  static constexpr std::size_t kChunkRows = 4096;

  explicit RandomVectorModel(Parts parts) : p_(std::move(parts)) {
    if (p_.dim == 0) throw InvalidArgument("model dimension must be >= 1");
    if (p_.means.size() != p_.dim) throw InvalidArgument("model means must have one entry per dimension");
    if (!p_.draw) throw InvalidArgument("model needs a sampler");
  }

  std::size_t dim() const noexcept { return p_.dim; }
  const std::vector<double>& means() const noexcept { return p_.means; }
  bool is_unit_mean() const noexcept { return p_.unit_mean; }
  std::optional<double> bound() const noexcept { return p_.bound; }
  const std::vector<double>& atoms() const noexcept { return p_.atoms; }
  NormFamily family() const noexcept { return p_.family; }
  double family_param() const noexcept { return p_.family_param; }
  const nlohmann::json& spec() const noexcept { return p_.spec; }
  const std::string& label() const noexcept { return p_.label; }
  const std::string& dnorm_method() const noexcept { return p_.dnorm_method; }

  bool has_cdf() const noexcept { return p_.cdf.has_value(); }
  bool has_maxcf() const noexcept { return p_.maxcf.has_value(); }
  bool has_quantile() const noexcept { return p_.quantile.has_value(); }
  bool has_dnorm() const noexcept { return p_.dnorm.has_value(); }

  double cdf(std::span<const double> x) const {
    if (!p_.cdf) throw InvalidArgument(p_.label + ": no closed-form cdf");
    check_dim(x);
    return (*p_.cdf)(x);
  }

  /// P(Z <= x fails). Accurate in the far tail when the model supplies it.
  double exceedance(std::span<const double> x) const {
    if (!p_.exceedance) return 1.0 - cdf(x);
    check_dim(x);
    return (*p_.exceedance)(x);
  }

  /// Closed-form max-CF, for x >= 0.
  double maxcf(std::span<const double> x) const {
    if (!p_.maxcf) throw InvalidArgument(p_.label + ": no closed-form max-CF");
    check_dim(x);
    for (double v : x)
      if (v < 0.0) throw DomainError("max-CF is defined on x >= 0 only");
    return (*p_.maxcf)(x);
  }

  double quantile(double level) const {
    if (!p_.quantile) throw InvalidArgument(p_.label + ": no quantile function");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    return (*p_.quantile)(level);
  }

  /// The level-(1 - s) quantile, accurate for tiny s when the model supplies it.
  double upper_quantile(double s) const {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("upper quantile tail must lie in (0,1)");
    if (p_.upper_quantile) return (*p_.upper_quantile)(s);
    return quantile(1.0 - s);
  }

  /// Exact D-norm of this model seen as a generator.
  double dnorm(std::span<const double> x) const {
    if (!p_.dnorm) throw InvalidArgument(p_.label + ": no exact D-norm evaluator");
    check_dim(x);
    return (*p_.dnorm)(x);
  }

  /// One draw into `row` (size dim()).
  void draw(Rng& rng, std::span<double> row) const { p_.draw(rng, row); }

  /// n draws. Chunk c is generated from derive_seed(seed, c), so the
  /// result is the same for every thread count.
  EmpiricalSample sample(std::uint64_t seed, std::size_t n, unsigned threads = 1) const {
    EmpiricalSample out(n, p_.dim);
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    auto work = [&](std::size_t first, std::size_t stride) {
      for (std::size_t c = first; c < chunks; c += stride) {
        Rng rng(derive_seed(seed, c));
        const std::size_t end = std::min(n, (c + 1) * kChunkRows);
        for (std::size_t i = c * kChunkRows; i < end; ++i) p_.draw(rng, out.row(i));
      }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
    if (threads == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
      for (auto& th : pool) th.join();
    }
    return out;
  }

 private:
  void check_dim(std::span<const double> x) const {
    if (x.size() != p_.dim) {
      std::ostringstream msg;
      msg << p_.label << ": expected a " << p_.dim << "-vector, got " << x.size();
      throw InvalidArgument(msg.str());
    }
  }

  Parts p_;
};

struct GpdParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.5;
};

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// P(V_i > v) for the Pareto-type marginal V_i = (Z_i/U)^{1/alpha}, from
/// P(U < a Z_i) = E min(1, a Z_i) = 1 + a - phi_Z(a e_i), a = v^-alpha.
/// Equals a exactly once a * bound <= 1.
inline double pareto_marginal_survival(const RandomVectorModel& gen, std::size_t i, double alpha, double v) {
  if (v <= 0.0) return 1.0;
  const double a = std::pow(v, -alpha);
  if (gen.bound() && a * *gen.bound() <= 1.0) return a;
  std::vector<double> e(gen.dim(), 0.0);
  e[i] = a;
  return std::clamp(1.0 + a - gen.maxcf(e), 0.0, 1.0);
}

}  // namespace detail

/// Z = (1,...,1); generates the sup-norm.
inline RandomVectorModel make_constant_generator(std::size_t d) {
  if (d == 0) throw InvalidArgument("invalid dimension: d must be >= 1");
  RandomVectorModel::Parts p;
  p.dim = d;
  p.means.assign(d, 1.0);
  p.draw = [](Rng&, std::span<double> row) { std::fill(row.begin(), row.end(), 1.0); };
  p.cdf = [](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v >= 1.0; }) ? 1.0 : 0.0;
  };
  p.maxcf = [](std::span<const double> x) { return std::max(1.0, detail::norm_inf(x)); };
  if (d == 1) p.quantile = [](double) { return 1.0; };
  p.dnorm = [](std::span<const double> x) { return detail::norm_inf(x); };
  p.family = NormFamily::sup;
  p.unit_mean = true;
  p.bound = 1.0;
  p.atoms = {1.0};
  p.spec = {{"kind", "const"}, {"params", {{"d", d}}}};
  p.label = "const(d=" + std::to_string(d) + ")";
  return RandomVectorModel(std::move(p));
}

/// Z = d * e_J with J uniform on {1..d}; generates the l1-norm.
inline RandomVectorModel make_permutation_generator(std::size_t d) {
  if (d == 0) throw InvalidArgument("invalid dimension: d must be >= 1");
  const double dd = static_cast<double>(d);
  RandomVectorModel::Parts p;
  p.dim = d;
  p.means.assign(d, 1.0);
  p.draw = [d, dd](Rng& rng, std::span<double> row) {
    std::fill(row.begin(), row.end(), 0.0);
    auto j = static_cast<std::size_t>(rng.uniform() * dd);
    row[std::min(j, d - 1)] = dd;
  };
  p.cdf = [dd](std::span<const double> x) {
    if (std::any_of(x.begin(), x.end(), [](double v) { return v < 0.0; })) return 0.0;
    double hits = 0.0;
    for (double v : x) hits += v >= dd ? 1.0 : 0.0;
    return hits / dd;
  };
  p.maxcf = [dd](std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += std::max(1.0, dd * v);
    return acc / dd;
  };
  // Enumerate the d equally likely outcomes d*e_j.
  p.dnorm = [dd](std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double outcome = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) outcome = std::max(outcome, std::abs(x[i]) * (i == j ? dd : 0.0));
      acc += outcome;
    }
    return acc / dd;
  };
  p.dnorm_method = "enumeration";
  p.family = NormFamily::l1;
  p.unit_mean = true;
  p.bound = dd;
  p.atoms = {dd};
  if (d == 1) p.quantile = [](double) { return 1.0; };
  p.spec = {{"kind", "perm"}, {"params", {{"d", d}}}};
  p.label = "perm(d=" + std::to_string(d) + ")";
  return RandomVectorModel(std::move(p));
}

/// Z_i = X_i / Gamma(1 - 1/lambda) with X_i iid Frechet(lambda); generates
/// the lambda-norm.
inline RandomVectorModel make_frechet_lambda_generator(std::size_t d, double lambda) {
  if (d == 0) throw InvalidArgument("invalid dimension: d must be >= 1");
  if (!(lambda > 1.0)) throw InvalidArgument("invalid parameter: lambda must exceed 1 (finite mean)");
  const double g = gamma_lanczos(1.0 - 1.0 / lambda);
  RandomVectorModel::Parts p;
  p.dim = d;
  p.means.assign(d, 1.0);
  p.draw = [lambda, g](Rng& rng, std::span<double> row) {
    for (double& v : row) v = std::pow(-std::log(rng.uniform()), -1.0 / lambda) / g;
  };
  p.cdf = [lambda, g](std::span<const double> x) {
    double log_p = 0.0;
    for (double v : x) {
      if (v <= 0.0) return 0.0;
      log_p -= std::pow(g * v, -lambda);
    }
    return std::exp(log_p);
  };
  p.exceedance = [lambda, g](std::span<const double> x) {
    double log_p = 0.0;
    for (double v : x) {
      if (v <= 0.0) return 1.0;
      log_p -= std::pow(g * v, -lambda);
    }
    return -std::expm1(log_p);
  };
  // max_i x_i Z_i is Frechet(lambda) with scale^lambda = sum (x_i/g)^lambda.
  p.maxcf = [lambda, g](std::span<const double> x) {
    double level = 0.0;
    for (double v : x) level += std::pow(v / g, lambda);
    return frechet_max_cf(lambda, level);
  };
  if (d == 1) p.quantile = [lambda, g](double a) { return std::pow(-std::log(a), -1.0 / lambda) / g; };
  p.dnorm = [lambda](std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += std::pow(std::abs(v), lambda);
    return std::pow(acc, 1.0 / lambda);
  };
  p.family = NormFamily::lp;
  p.family_param = lambda;
  p.unit_mean = true;
  p.spec = {{"kind", "frechet"}, {"params", {{"lambda", lambda}, {"d", d}}}};
  p.label = "frechet(lambda=" + detail::fmt_num(lambda) + ",d=" + std::to_string(d) + ")";
  return RandomVectorModel(std::move(p));
}

/// Univariate generalized Pareto distribution with finite mean.
inline RandomVectorModel make_gpd_model(const GpdParams& gp) {
  if (!(gp.xi > 0.0 && gp.xi < 1.0)) throw InvalidArgument("invalid parameter: xi must lie in (0,1)");
  if (!(gp.sigma > 0.0)) throw InvalidArgument("invalid parameter: sigma must be positive");
  if (!(gp.mu >= 0.0)) throw InvalidArgument("invalid parameter: mu must be nonnegative");
  const double mu = gp.mu, sigma = gp.sigma, xi = gp.xi;
  auto q = [=](double a) { return mu + (sigma / xi) * (std::pow(1.0 - a, -xi) - 1.0); };
  RandomVectorModel::Parts p;
  p.dim = 1;
  p.means = {mu + sigma / (1.0 - xi)};
  p.draw = [q](Rng& rng, std::span<double> row) { row[0] = q(rng.uniform()); };
  p.cdf = [=](std::span<const double> x) {
    if (x[0] < mu) return 0.0;
    return 1.0 - std::pow(1.0 + xi * (x[0] - mu) / sigma, -1.0 / xi);
  };
  p.exceedance = [=](std::span<const double> x) {
    if (x[0] < mu) return 1.0;
    return std::pow(1.0 + xi * (x[0] - mu) / sigma, -1.0 / xi);
  };
  p.maxcf = [=](std::span<const double> xv) {
    const double x = xv[0];
    if (x == 0.0) return 1.0;
    if (mu > 0.0 && x > 1.0 / mu) return x * (mu + sigma / (1.0 - xi));
    return 1.0 + sigma * x / (1.0 - xi) *
                     std::pow(1.0 + xi * (1.0 - mu * x) / (sigma * x), 1.0 - 1.0 / xi);
  };
  p.quantile = q;
  p.upper_quantile = [=](double s) { return mu + (sigma / xi) * std::expm1(-xi * std::log(s)); };
  p.spec = {{"kind", "gpd"}, {"params", {{"mu", mu}, {"sigma", sigma}, {"xi", xi}}}};
  p.label = "gpd(mu=" + detail::fmt_num(mu) + ",sigma=" + detail::fmt_num(sigma) +
            ",xi=" + detail::fmt_num(xi) + ")";
  return RandomVectorModel(std::move(p));
}

/// Uniform(0, upper).
inline RandomVectorModel make_uniform_model(double upper) {
  if (!(upper > 0.0)) throw InvalidArgument("invalid parameter: upper must be positive");
  RandomVectorModel::Parts p;
  p.dim = 1;
  p.means = {upper / 2.0};
  p.draw = [upper](Rng& rng, std::span<double> row) { row[0] = upper * rng.uniform(); };
  p.cdf = [upper](std::span<const double> x) { return std::clamp(x[0] / upper, 0.0, 1.0); };
  p.maxcf = [upper](std::span<const double> xv) {
    const double x = xv[0];
    if (x * upper <= 1.0) return 1.0;
    return x * upper / 2.0 + 1.0 / (2.0 * x * upper);
  };
  p.quantile = [upper](double a) { return upper * a; };
  p.upper_quantile = [upper](double s) { return upper - upper * s; };
  p.bound = upper;
  p.spec = {{"kind", "uniform"}, {"params", {{"upper", upper}}}};
  p.label = "uniform(upper=" + detail::fmt_num(upper) + ")";
  return RandomVectorModel(std::move(p));
}

namespace detail {

inline void require_bounded_generator(const RandomVectorModel& gen, double bound, const char* who) {
  if (!gen.is_unit_mean())
    throw ContractViolation(std::string(who) + ": generator must be unit-mean");
  if (!gen.bound() || *gen.bound() > bound)
    throw ContractViolation(std::string(who) + ": generator components must be bounded by `bound`");
  if (!gen.has_dnorm() || !gen.has_maxcf())
    throw ContractViolation(std::string(who) +
                            ": generator must provide its exact D-norm and closed-form max-CF");
}

}  // namespace detail

/// Multivariate generalized Pareto vector V = (Z/U)^{1/alpha} with U uniform
/// independent of a bounded generator Z <= bound. The cdf is available on
/// x >= bound^{1/alpha} (componentwise) only.
inline RandomVectorModel make_mgpd_model(double alpha, const RandomVectorModel& generator,
                                         double bound) {
  if (!(alpha > 1.0)) throw InvalidArgument("invalid parameter: alpha must exceed 1");
  if (!(bound >= 1.0)) throw InvalidArgument("invalid parameter: bound must be >= 1");
  detail::require_bounded_generator(generator, bound, "mgpd");
  const std::size_t d = generator.dim();
  const double floor_x = std::pow(bound, 1.0 / alpha);

  RandomVectorModel::Parts p;
  p.dim = d;
  p.draw = [generator, alpha](Rng& rng, std::span<double> row) {
    const double u = rng.uniform();
    generator.draw(rng, row);
    for (double& v : row) v = std::pow(v / u, 1.0 / alpha);
  };
  p.cdf = [generator, alpha, floor_x](std::span<const double> x) {
    std::vector<double> inv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < floor_x)
        throw DomainError("mgpd cdf is only available for x >= bound^(1/alpha) componentwise");
      inv[i] = std::pow(x[i], -alpha);
    }
    return 1.0 - generator.dnorm(inv);
  };
  p.exceedance = [generator, alpha, floor_x](std::span<const double> x) {
    std::vector<double> inv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < floor_x)
        throw DomainError("mgpd cdf is only available for x >= bound^(1/alpha) componentwise");
      inv[i] = std::pow(x[i], -alpha);
    }
    return generator.dnorm(inv);
  };
  // E V_i = int_0^inf 1 - F_{V_i}(v) dv; beyond floor_x the tail is v^-alpha.
  p.means.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    auto survival = [&](double v) { return detail::pareto_marginal_survival(generator, i, alpha, v); };
    const double head = integrate(survival, 0.0, floor_x, {1e-12, 1e-13}).value;
    p.means[i] = head + std::pow(floor_x, 1.0 - alpha) / (alpha - 1.0);
  }
  if (d == 1 && generator.spec().value("kind", "") == "const") {
    p.quantile = [alpha](double a) { return std::pow(1.0 - a, -1.0 / alpha); };
    p.upper_quantile = [alpha](double s) { return std::pow(s, -1.0 / alpha); };
  }
  p.spec = {{"kind", "mgpd"},
            {"params", {{"alpha", alpha}, {"bound", bound}, {"generator", generator.spec()}}}};
  p.label = "mgpd(alpha=" + detail::fmt_num(alpha) + "," + generator.label() + ")";
  return RandomVectorModel(std::move(p));
}

/// Y = max of n iid mgpd vectors, divided by n^{1/alpha}.
///
/// For the constant generator Y is a common scalar times (1,...,1) and is
/// sampled exactly by inversion of P(Y <= y) = (1 - y^-alpha / n)^n; its cdf
/// is exact everywhere. Other generators are simulated directly (cost n per
/// draw) and expose the cdf on x >= (bound/n)^{1/alpha} only.
inline RandomVectorModel make_mgpd_maxima_model(double alpha, const RandomVectorModel& generator,
                                                double bound, std::uint64_t n) {
  if (!(alpha > 1.0)) throw InvalidArgument("invalid parameter: alpha must exceed 1");
  if (n == 0) throw InvalidArgument("invalid parameter: n must be >= 1");
  if (!(bound >= 1.0)) throw InvalidArgument("invalid parameter: bound must be >= 1");
  detail::require_bounded_generator(generator, bound, "mgpd maxima");
  const std::size_t d = generator.dim();
  const double nn = static_cast<double>(n);
  const double norming = std::pow(nn, 1.0 / alpha);
  const bool constant = generator.spec().value("kind", "") == "const";

  RandomVectorModel::Parts p;
  p.dim = d;
  p.spec = {{"kind", "ymax"},
            {"params", {{"alpha", alpha}, {"n", n}, {"bound", bound}, {"generator", generator.spec()}}}};
  p.label = "ymax(alpha=" + detail::fmt_num(alpha) + ",n=" + std::to_string(n) + "," +
            generator.label() + ")";
  p.means.resize(d);

  if (constant) {
    auto scalar_quantile = [alpha, nn](double a) {
      return std::pow(-nn * std::expm1(std::log(a) / nn), -1.0 / alpha);
    };
    auto scalar_cdf = [alpha, nn](double y) {
      if (y <= 0.0) return 0.0;
      const double base = 1.0 - std::pow(y, -alpha) / nn;
      return base <= 0.0 ? 0.0 : std::exp(nn * std::log1p(-std::pow(y, -alpha) / nn));
    };
    p.draw = [scalar_quantile](Rng& rng, std::span<double> row) {
      std::fill(row.begin(), row.end(), scalar_quantile(rng.uniform()));
    };
    p.cdf = [scalar_cdf](std::span<const double> x) {
      return scalar_cdf(*std::min_element(x.begin(), x.end()));
    };
    p.exceedance = [alpha, nn](std::span<const double> x) {
      const double y = *std::min_element(x.begin(), x.end());
      if (y <= 0.0) return 1.0;
      const double t = std::pow(y, -alpha) / nn;
      return t >= 1.0 ? 1.0 : -std::expm1(nn * std::log1p(-t));
    };
    if (d == 1) p.quantile = scalar_quantile;
    // E max_k U_k^{-1/alpha} = n B(1 - 1/alpha, n).
    const double a = 1.0 - 1.0 / alpha;
    const double mean = std::pow(nn, -1.0 / alpha) * nn * gamma_lanczos(a) *
                        std::exp(std::lgamma(nn) - std::lgamma(nn + a));
    p.means.assign(d, mean);
    return RandomVectorModel(std::move(p));
  }

  const double floor_x = std::pow(bound / nn, 1.0 / alpha);
  p.draw = [generator, alpha, n, norming](Rng& rng, std::span<double> row) {
    std::vector<double> v(row.size());
    std::fill(row.begin(), row.end(), 0.0);
    for (std::uint64_t k = 0; k < n; ++k) {
      const double u = rng.uniform();
      generator.draw(rng, v);
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::max(row[i], std::pow(v[i] / u, 1.0 / alpha));
    }
    for (double& r : row) r /= norming;
  };
  p.cdf = [generator, alpha, nn, floor_x](std::span<const double> x) {
    std::vector<double> inv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < floor_x)
        throw DomainError("mgpd maxima cdf is only available for x >= (bound/n)^(1/alpha)");
      inv[i] = std::pow(x[i], -alpha) / nn;
    }
    return std::pow(1.0 - generator.dnorm(inv), nn);
  };
  p.exceedance = [generator, alpha, nn, floor_x](std::span<const double> x) {
    std::vector<double> inv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < floor_x)
        throw DomainError("mgpd maxima cdf is only available for x >= (bound/n)^(1/alpha)");
      inv[i] = std::pow(x[i], -alpha) / nn;
    }
    return -std::expm1(nn * std::log1p(-generator.dnorm(inv)));
  };
  for (std::size_t i = 0; i < d; ++i) {
    auto survival = [&](double y) {
      return -std::expm1(nn * std::log1p(-detail::pareto_marginal_survival(generator, i, alpha, norming * y)));
    };
    QuadratureOptions opts;
    opts.abs_tol = 1e-11;
    opts.tail_power = 2.0;
    p.means[i] = integrate_to_infinity(survival, 0.0, opts).value;
  }
  return RandomVectorModel(std::move(p));
}

/// Max-stable vector with Frechet(alpha) margins and complete dependence:
/// xi * (1,...,1), i.e. the sup-norm case of exp(-||1/x^alpha||_D).
inline RandomVectorModel make_frechet_maxstable_model(double alpha, std::size_t d) {
  if (d == 0) throw InvalidArgument("invalid dimension: d must be >= 1");
  if (!(alpha > 1.0)) throw InvalidArgument("invalid parameter: alpha must exceed 1 (finite mean)");
  auto q = [alpha](double a) { return std::pow(-std::log(a), -1.0 / alpha); };
  RandomVectorModel::Parts p;
  p.dim = d;
  p.means.assign(d, gamma_lanczos(1.0 - 1.0 / alpha));
  p.draw = [q](Rng& rng, std::span<double> row) { std::fill(row.begin(), row.end(), q(rng.uniform())); };
  p.cdf = [alpha](std::span<const double> x) {
    const double m = *std::min_element(x.begin(), x.end());
    return m <= 0.0 ? 0.0 : std::exp(-std::pow(m, -alpha));
  };
  p.exceedance = [alpha](std::span<const double> x) {
    const double m = *std::min_element(x.begin(), x.end());
    return m <= 0.0 ? 1.0 : -std::expm1(-std::pow(m, -alpha));
  };
  p.maxcf = [alpha](std::span<const double> x) {
    return frechet_max_cf(alpha, std::pow(detail::norm_inf(x), alpha));
  };
  if (d == 1) p.quantile = q;
  p.spec = {{"kind", "maxstable"}, {"params", {{"alpha", alpha}, {"d", d}}}};
  p.label = "maxstable(alpha=" + detail::fmt_num(alpha) + ",d=" + std::to_string(d) + ")";
  return RandomVectorModel(std::move(p));
}

/// Bernoulli-thinned generator (B / p^k) Z with P(B = 1) = p^k, i.e. the
/// generator U_1...U_k / p^k * Z. Its max-CF is the k-th T_p iterate of the
/// base max-CF and its D-norm equals the base D-norm.
inline RandomVectorModel make_thinned_generator(const RandomVectorModel& base, double p,
                                                std::uint64_t k) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("invalid parameter: p must lie in (0,1]");
  if (!base.is_unit_mean()) throw ContractViolation("thinning needs a unit-mean generator");
  const double keep = std::pow(p, static_cast<double>(k));
  RandomVectorModel::Parts parts;
  parts.dim = base.dim();
  parts.means.assign(base.dim(), 1.0);
  parts.draw = [base, keep](Rng& rng, std::span<double> row) {
    if (rng.uniform() < keep) {
      base.draw(rng, row);
      for (double& v : row) v /= keep;
    } else {
      std::fill(row.begin(), row.end(), 0.0);
    }
  };
  if (base.has_cdf()) {
    parts.cdf = [base, keep](std::span<const double> x) {
      if (std::any_of(x.begin(), x.end(), [](double v) { return v < 0.0; })) return 0.0;
      std::vector<double> scaled(x.begin(), x.end());
      for (double& v : scaled) v *= keep;
      return (1.0 - keep) + keep * base.cdf(scaled);
    };
    parts.exceedance = [base, keep](std::span<const double> x) {
      if (std::any_of(x.begin(), x.end(), [](double v) { return v < 0.0; })) return 1.0;
      std::vector<double> scaled(x.begin(), x.end());
      for (double& v : scaled) v *= keep;
      return keep * base.exceedance(scaled);
    };
  }
  if (base.has_maxcf()) {
    parts.maxcf = [base, keep](std::span<const double> x) {
      std::vector<double> scaled(x.begin(), x.end());
      for (double& v : scaled) v /= keep;
      return (1.0 - keep) + keep * base.maxcf(scaled);
    };
  }
  if (base.has_dnorm()) {
    parts.dnorm = [base](std::span<const double> x) { return base.dnorm(x); };
    parts.dnorm_method = base.dnorm_method();
  }
  parts.family = base.family();
  parts.family_param = base.family_param();
  parts.unit_mean = true;
  if (base.bound()) parts.bound = *base.bound() / keep;
  for (double a : base.atoms()) parts.atoms.push_back(a / keep);
  parts.spec = {{"kind", "thin"}, {"params", {{"p", p}, {"k", k}, {"generator", base.spec()}}}};
  parts.label = "thin(p=" + detail::fmt_num(p) + ",k=" + std::to_string(k) + "," + base.label() + ")";
  return RandomVectorModel(std::move(parts));
}

/// Z_n with P(Z_n = e^n) = 1/n and P(Z_n = 0) = 1 - 1/n.
inline RandomVectorModel make_two_point_model(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("invalid parameter: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double top = std::exp(nn);
  RandomVectorModel::Parts p;
  p.dim = 1;
  p.means = {top / nn};
  p.draw = [nn, top](Rng& rng, std::span<double> row) { row[0] = rng.uniform() < 1.0 / nn ? top : 0.0; };
  p.cdf = [nn, top](std::span<const double> x) {
    if (x[0] < 0.0) return 0.0;
    return x[0] < top ? 1.0 - 1.0 / nn : 1.0;
  };
  p.maxcf = [nn, top](std::span<const double> x) {
    return 1.0 - 1.0 / nn + std::max(1.0, x[0] * top) / nn;
  };
  p.quantile = [nn, top](double a) { return a <= 1.0 - 1.0 / nn ? 0.0 : top; };
  p.bound = top;
  p.atoms = {top};
  p.spec = {{"kind", "twopoint"}, {"params", {{"n", n}}}};
  p.label = "twopoint(n=" + std::to_string(n) + ")";
  return RandomVectorModel(std::move(p));
}

/// Positive stable variate with Laplace transform exp(-t^a), 0 < a < 1
/// (Kanter's representation).
inline double positive_stable(Rng& rng, double a) {
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
         std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
}

/// The bivariate vector -eta with P(-eta > y) = exp(-||y||_lambda), y >= 0:
/// independent standard exponentials for lambda = 1, Gumbel-logistic
/// dependence (sampled by Marshall-Olkin with a positive stable frailty)
/// for lambda > 1. The cdf follows by inclusion-exclusion.
inline RandomVectorModel make_neg_eta_model(double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda))
    throw InvalidArgument("invalid parameter: lambda must be >= 1 and finite");
  RandomVectorModel::Parts p;
  p.dim = 2;
  p.means = {1.0, 1.0};
  if (lambda == 1.0) {
    p.draw = [](Rng& rng, std::span<double> row) {
      row[0] = rng.exponential();
      row[1] = rng.exponential();
    };
  } else {
    p.draw = [lambda](Rng& rng, std::span<double> row) {
      const double s = positive_stable(rng, 1.0 / lambda);
      for (double& v : row) v = std::pow(rng.exponential() / s, 1.0 / lambda);
    };
  }
  p.cdf = [lambda](std::span<const double> y) {
    if (y[0] <= 0.0 || y[1] <= 0.0) return 0.0;
    const double joint = std::pow(std::pow(y[0], lambda) + std::pow(y[1], lambda), 1.0 / lambda);
    return -std::expm1(-y[0]) - std::exp(-y[1]) + std::exp(-joint);
  };
  p.exceedance = [lambda](std::span<const double> y) {
    if (y[0] <= 0.0 || y[1] <= 0.0) return 1.0;
    const double joint = std::pow(std::pow(y[0], lambda) + std::pow(y[1], lambda), 1.0 / lambda);
    return std::exp(-y[0]) + std::exp(-y[1]) - std::exp(-joint);
  };
  p.unit_mean = true;
  p.spec = {{"kind", "negeta"}, {"params", {{"lambda", lambda}}}};
  p.label = "negeta(lambda=" + detail::fmt_num(lambda) + ")";
  return RandomVectorModel(std::move(p));
}

}  // namespace maxcf
