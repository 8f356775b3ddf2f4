// Shared fixtures for the test suite: seeded point generators and the model
// catalog the property checks sweep over.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "maxcf/all.hpp"

namespace maxcf::testing {

/// Random points for property checks. Coordinates are log-uniform over a few
/// decades with an occasional exact zero, so flat regions, kinks and large
/// arguments all get hit.
class PointGen {
 public:
  explicit PointGen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

  double coordinate(double lo, double hi, double zero_prob = 0.1) {
    if (rng_.uniform() < zero_prob) return 0.0;
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  std::vector<double> nonneg(std::size_t d, double lo = 0.05, double hi = 5.0, double zero_prob = 0.1) {
    std::vector<double> x(d);
    for (auto& v : x) v = coordinate(lo, hi, zero_prob);
    return x;
  }

  std::vector<double> positive(std::size_t d, double lo, double hi) { return nonneg(d, lo, hi, 0.0); }

  /// Signed coordinates, for norm axioms.
  std::vector<double> signed_vec(std::size_t d, double scale = 5.0) {
    std::vector<double> x(d);
    for (auto& v : x) v = uniform(-scale, scale);
    return x;
  }

  /// y >= x componentwise.
  std::vector<double> above(const std::vector<double>& x, double spread = 2.0) {
    std::vector<double> y(x);
    for (auto& v : y) v += rng_.uniform() < 0.2 ? 0.0 : uniform(0.0, spread);
    return y;
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

struct CatalogEntry {
  std::string name;
  RandomVectorModel model;
  /// Second moments finite, so 4-sigma sample checks are meaningful.
  bool finite_variance = true;
  /// The cdf is defined on x >= cdf_floor componentwise.
  double cdf_floor = 0.0;
  /// Typical scale of the draws; test points are spread around it.
  double scale = 2.0;
};

/// Unit-mean generators with an exact D-norm.
inline std::vector<CatalogEntry> generator_catalog() {
  return {
      {"const(1)", make_constant_generator(1), true, 0.0, 1.5},
      {"const(3)", make_constant_generator(3), true, 0.0, 1.5},
      {"perm(2)", make_permutation_generator(2), true, 0.0, 2.5},
      {"perm(4)", make_permutation_generator(4), true, 0.0, 4.5},
      {"frechet(3,2)", make_frechet_lambda_generator(2, 3.0), true, 0.0, 2.0},
      {"frechet(1.5,3)", make_frechet_lambda_generator(3, 1.5), false, 0.0, 3.0},
      {"thin(0.5,2,perm(3))", make_thinned_generator(make_permutation_generator(3), 0.5, 2), true, 0.0, 12.0},
      {"thin(0.7,1,const(2))", make_thinned_generator(make_constant_generator(2), 0.7, 1), true, 0.0, 1.5},
  };
}

/// Everything else that is nonnegative and integrable.
inline std::vector<CatalogEntry> model_catalog() {
  auto out = generator_catalog();
  const std::vector<CatalogEntry> more = {
      {"gpd(0,1,0.2)", make_gpd_model({0.0, 1.0, 0.2}), true, 0.0, 2.0},
      {"gpd(0,1,0.5)", make_gpd_model({0.0, 1.0, 0.5}), false, 0.0, 3.0},
      {"gpd(0.5,2,0.7)", make_gpd_model({0.5, 2.0, 0.7}), false, 0.0, 5.0},
      {"uniform(2)", make_uniform_model(2.0), true, 0.0, 1.5},
      {"twopoint(4)", make_two_point_model(4), true, 0.0, 20.0},
      {"maxstable(3,2)", make_frechet_maxstable_model(3.0, 2), true, 0.0, 2.0},
      {"maxstable(2,2)", make_frechet_maxstable_model(2.0, 2), false, 0.0, 2.5},
      {"mgpd(3,perm(2))", make_mgpd_model(3.0, make_permutation_generator(2), 2.0), true, std::cbrt(2.0), 2.0},
      {"mgpd(2,const(2))", make_mgpd_model(2.0, make_constant_generator(2), 1.0), false, 1.0, 2.0},
      {"ymax(3,50,const(1))", make_mgpd_maxima_model(3.0, make_constant_generator(1), 1.0, 50), true, 0.0, 2.0},
      {"ymax(3,5,perm(2))", make_mgpd_maxima_model(3.0, make_permutation_generator(2), 2.0, 5), true,
       std::cbrt(2.0 / 5.0), 2.0},
      {"negeta(1)", make_neg_eta_model(1.0), true, 0.0, 1.5},
      {"negeta(2)", make_neg_eta_model(2.0), true, 0.0, 1.5},
  };
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

inline double max_norm(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double l1_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline std::vector<double> scaled(const std::vector<double>& x, double r) {
  std::vector<double> y(x);
  for (auto& v : y) v *= r;
  return y;
}

inline std::vector<double> mix(const std::vector<double>& x, const std::vector<double>& y, double t) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = t * x[i] + (1.0 - t) * y[i];
  return z;
}

}  // namespace maxcf::testing
