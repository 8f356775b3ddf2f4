#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maxcf/error.hpp"
#include "maxcf/models.hpp"
#include "maxcf/sample.hpp"

namespace maxcf {

/// ||x||_D = E max_i |x_i| Z_i for a unit-mean generator Z.
class DNorm {
 public:
  enum class Method { exact_closed_form, exact_enumeration, monte_carlo };

  /// Exact evaluator; the generator must carry one.
  static DNorm exact(const RandomVectorModel& generator) {
    require_generator(generator);
    if (!generator.has_dnorm())
      throw InvalidArgument(generator.label() + ": no exact D-norm; use DNorm::monte_carlo");
    const Method m = generator.dnorm_method() == "enumeration" ? Method::exact_enumeration
                                                               : Method::exact_closed_form;
    return DNorm(generator, m, 0, 0);
  }

  static DNorm monte_carlo(const RandomVectorModel& generator, std::size_t n, std::uint64_t seed,
                           unsigned threads = 1) {
    require_generator(generator);
    if (n < 2) throw InvalidArgument("Monte Carlo D-norm needs n >= 2");
    DNorm norm(generator, Method::monte_carlo, n, seed);
    norm.threads_ = threads;
    return norm;
  }

  const RandomVectorModel& generator() const noexcept { return generator_; }
  Method method() const noexcept { return method_; }
  bool is_exact() const noexcept { return method_ != Method::monte_carlo; }
  std::size_t n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  unsigned threads() const noexcept { return threads_; }
  std::size_t dim() const noexcept { return generator_.dim(); }
  NormFamily family() const noexcept { return generator_.family(); }
  double family_param() const noexcept { return generator_.family_param(); }

  std::string label() const {
    switch (method_) {
      case Method::exact_closed_form: return "dnorm[" + generator_.label() + ",closed-form]";
      case Method::exact_enumeration: return "dnorm[" + generator_.label() + ",enumeration]";
      case Method::monte_carlo:
        return "dnorm[" + generator_.label() + ",monte-carlo(n=" + std::to_string(n_) +
               ",seed=" + std::to_string(seed_) + ")]";
    }
    return {};
  }

 private:
  DNorm(RandomVectorModel g, Method m, std::size_t n, std::uint64_t seed)
      : generator_(std::move(g)), method_(m), n_(n), seed_(seed) {}

  static void require_generator(const RandomVectorModel& g) {
    if (!g.is_unit_mean()) throw ContractViolation(g.label() + " is not a unit-mean generator");
  }

  RandomVectorModel generator_;
  Method method_;
  std::size_t n_;
  std::uint64_t seed_;
  unsigned threads_ = 1;
};

namespace detail {

inline void check_dnorm_arg(const DNorm& norm, std::span<const double> x) {
  if (x.size() != norm.dim())
    throw InvalidArgument("dimension mismatch: D-norm on R^" + std::to_string(norm.dim()) +
                          " evaluated at a " + std::to_string(x.size()) + "-vector");
}

inline double max_abs_product(std::span<const double> x, std::span<const double> z) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i]) * z[i]);
  return m;
}

}  // namespace detail

/// D-norms of every grid point from one generator sample (common random
/// numbers across the grid).
inline std::vector<EstimateWithCI> dnorm_eval_grid(const DNorm& norm,
                                                   const std::vector<std::vector<double>>& grid) {
  for (const auto& x : grid) detail::check_dnorm_arg(norm, x);
  std::vector<EstimateWithCI> out;
  out.reserve(grid.size());
  if (norm.is_exact()) {
    for (const auto& x : grid) out.push_back(EstimateWithCI::exact_value(norm.generator().dnorm(x)));
    return out;
  }
  const auto sample = norm.generator().sample(norm.seed(), norm.n(), norm.threads());
  for (const auto& x : grid) {
    out.push_back(sample_mean(
        sample, [&](std::span<const double> z) { return detail::max_abs_product(x, z); }, norm.seed()));
  }
  return out;
}

inline EstimateWithCI dnorm_eval(const DNorm& norm, std::span<const double> x) {
  return dnorm_eval_grid(norm, {std::vector<double>(x.begin(), x.end())}).front();
}

struct DNormGap {
  /// max over the grid of |a(x) - b(x)|
  double max_gap = 0.0;
  /// band the gap is judged against at the worst point: 4 (se_a + se_b) + 1e-9
  double band = 0.0;
  /// every point's gap lies within its own band
  bool within_band = true;
};

/// Pointwise comparison of two D-norms over a grid; exact evaluators
/// contribute zero width to the band.
inline DNormGap dnorm_pointwise_gap(const DNorm& a, const DNorm& b,
                                    const std::vector<std::vector<double>>& grid) {
  if (grid.empty()) throw InvalidArgument("dnorm_pointwise_gap: empty grid");
  if (a.dim() != b.dim()) throw InvalidArgument("dnorm_pointwise_gap: dimension mismatch");
  const auto va = dnorm_eval_grid(a, grid);
  const auto vb = dnorm_eval_grid(b, grid);
  DNormGap out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = std::abs(va[i].value - vb[i].value);
    const double band = EstimateWithCI::kBand * (va[i].std_error + vb[i].std_error) + 1e-9;
    if (gap >= out.max_gap) {
      out.max_gap = gap;
      out.band = band;
    }
    if (gap > band) out.within_band = false;
  }
  return out;
}

}  // namespace maxcf
