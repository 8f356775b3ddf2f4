// Model catalog: closed forms, cdfs, samplers and parameter contracts.
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "maxcf/all.hpp"
#include "support.hpp"

using namespace maxcf;
using Catch::Approx;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

}  // namespace

TEST_CASE("constant generator", "[models]") {
  const auto m = make_constant_generator(2);
  const auto s = m.sample(1, 50);
  for (double x : s.data()) REQUIRE(x == 1.0);
  REQUIRE(m.maxcf(v({2.0, 0.5})) == 2.0);
  REQUIRE(m.maxcf(v({0.3, 0.5})) == 1.0);
  REQUIRE(m.means() == std::vector<double>{1.0, 1.0});
  REQUIRE(m.is_unit_mean());
  REQUIRE_THROWS_AS(make_constant_generator(0), InvalidArgument);
}

TEST_CASE("permutation generator", "[models]") {
  const auto m = make_permutation_generator(2);
  REQUIRE(m.dnorm(v({3.0, 4.0})) == 7.0);
  REQUIRE(m.means() == std::vector<double>{1.0, 1.0});
  const auto s = m.sample(3, 1000);
  for (std::size_t i = 0; i < s.n(); ++i) {
    const auto r = s.row(i);
    REQUIRE(r[0] + r[1] == 2.0);
    REQUIRE(r[0] * r[1] == 0.0);
  }
  REQUIRE(m.cdf(v({2.0, 1.0})) == 0.5);
  REQUIRE(m.cdf(v({2.0, 2.0})) == 1.0);
}

TEST_CASE("Frechet lambda generator", "[models]") {
  REQUIRE_THROWS_AS(make_frechet_lambda_generator(2, 1.0), InvalidArgument);
  const auto m = make_frechet_lambda_generator(3, 3.0);
  REQUIRE(m.dnorm(v({1.0, 2.0, 2.0})) == Approx(std::cbrt(17.0)).epsilon(1e-14));

  SECTION("lambda = 2: sample means are 1 and E max(Z1, Z2) = sqrt 2") {
    const auto g = make_frechet_lambda_generator(2, 2.0);
    const auto s = g.sample(11, 1000000);
    const auto est = sample_mean(s, [](std::span<const double> r) { return std::max(r[0], r[1]); });
    REQUIRE(std::abs(est.value - std::sqrt(2.0)) <= EstimateWithCI::kBand * est.std_error);
    for (std::size_t j = 0; j < 2; ++j) {
      const auto mj = sample_mean(s, [j](std::span<const double> r) { return r[j]; });
      // infinite variance at lambda = 2: a loose band
      REQUIRE(mj.value == Approx(1.0).margin(0.02));
    }
  }
}

TEST_CASE("GPD closed forms", "[models]") {
  const auto g = make_gpd_model({0.0, 1.0, 0.5});
  REQUIRE(g.cdf(v({1.0})) == Approx(5.0 / 9.0).epsilon(1e-15));
  REQUIRE(g.maxcf(v({1.0})) == Approx(7.0 / 3.0).epsilon(1e-15));
  REQUIRE(g.quantile(0.5) == Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-15));
  REQUIRE(g.means()[0] == 2.0);

  SECTION("shifted GPD above 1/mu is linear") {
    const auto h = make_gpd_model({2.0, 1.0, 0.5});
    REQUIRE(h.maxcf(v({1.0})) == Approx(4.0).epsilon(1e-15));
  }
  SECTION("parameter contracts") {
    REQUIRE_THROWS_AS(make_gpd_model({0.0, 1.0, 1.0}), InvalidArgument);
    REQUIRE_THROWS_AS(make_gpd_model({0.0, 1.0, 0.0}), InvalidArgument);
    REQUIRE_THROWS_AS(make_gpd_model({0.0, 0.0, 0.5}), InvalidArgument);
  }
  SECTION("Monte Carlo agrees with the closed form") {
    const auto s = g.sample(5, 1000000);
    const auto est = sample_mean(s, [](std::span<const double> r) { return std::max(1.0, r[0]); });
    REQUIRE(std::abs(est.value - 7.0 / 3.0) <= EstimateWithCI::kBand * est.std_error);
    std::size_t below = 0;
    for (double x : s.data()) below += x <= 1.0;
    const double f = 5.0 / 9.0;
    REQUIRE(std::abs(below / 1e6 - f) <= 4.0 * std::sqrt(f * (1 - f) / 1e6));
  }
}

TEST_CASE("uniform model", "[models]") {
  const auto u = make_uniform_model(2.0);
  REQUIRE(u.maxcf(v({1.0})) == Approx(1.25).epsilon(1e-15));
  REQUIRE(u.maxcf(v({0.5})) == Approx(1.0).epsilon(1e-15));
  REQUIRE(u.cdf(v({1.0})) == 0.5);
  REQUIRE_THROWS_AS(make_uniform_model(0.0), InvalidArgument);
}

TEST_CASE("multivariate GPD vector", "[models]") {
  const auto m = make_mgpd_model(2.0, make_constant_generator(1), 1.0);
  for (double x : {1.0, 1.5, 3.0}) REQUIRE(m.cdf(v({x})) == Approx(1.0 - 1.0 / (x * x)).epsilon(1e-14));
  REQUIRE_THROWS_AS(m.cdf(v({0.5})), DomainError);
  for (double x : m.sample(2, 10000).data()) REQUIRE(x >= 1.0);

  SECTION("contracts") {
    REQUIRE_THROWS_AS(make_mgpd_model(2.0, make_gpd_model({0.0, 1.0, 0.5}), 1.0), ContractViolation);
    REQUIRE_THROWS_AS(make_mgpd_model(1.0, make_constant_generator(1), 1.0), InvalidArgument);
    REQUIRE_THROWS_AS(make_mgpd_model(2.0, make_permutation_generator(3), 2.0), ContractViolation);
  }
  SECTION("bivariate cdf is 1 - ||1/x^alpha||_D") {
    const auto p = make_mgpd_model(2.0, make_permutation_generator(2), 2.0);
    const double x1 = 2.0, x2 = 3.0;
    REQUIRE(p.cdf(v({x1, x2})) == Approx(1.0 - (1.0 / (x1 * x1) + 1.0 / (x2 * x2))).epsilon(1e-14));
  }
}

TEST_CASE("maxima of GPD vectors", "[models]") {
  const auto m = make_mgpd_maxima_model(2.0, make_constant_generator(1), 1.0, 10);
  for (double x : {0.5, 1.0, 2.0})
    REQUIRE(m.cdf(v({x})) == Approx(std::pow(std::max(0.0, 1.0 - 1.0 / (10.0 * x * x)), 10.0)).epsilon(1e-13));
  SECTION("mean tends to sqrt(pi)") {
    const auto big = make_mgpd_maxima_model(2.0, make_constant_generator(1), 1.0, 1000000);
    REQUIRE(big.means()[0] == Approx(std::sqrt(std::numbers::pi)).margin(1e-5));
  }
  SECTION("n = 0 is refused") {
    REQUIRE_THROWS_AS(make_mgpd_maxima_model(2.0, make_constant_generator(1), 1.0, 0), InvalidArgument);
  }
}

TEST_CASE("thinned generator", "[models]") {
  const auto t = make_thinned_generator(make_constant_generator(1), 0.5, 5);
  REQUIRE(t.is_unit_mean());
  REQUIRE(t.cdf(v({0.0})) == Approx(1.0 - 1.0 / 32.0).epsilon(1e-15));
  REQUIRE(t.maxcf(v({2.0})) == Approx(1.0 - 1.0 / 32.0 + 2.0).epsilon(1e-15));
  REQUIRE_THROWS_AS(make_thinned_generator(make_uniform_model(2.0), 0.5, 1), ContractViolation);
}

TEST_CASE("two-point model", "[models]") {
  const auto z = make_two_point_model(10);
  REQUIRE(z.maxcf(v({1.0})) == Approx(0.9 + std::exp(10.0) / 10.0).epsilon(1e-15));
  REQUIRE(z.means()[0] == Approx(std::exp(10.0) / 10.0).epsilon(1e-15));
}

TEST_CASE("max-stable Frechet vector", "[models]") {
  // complete dependence: the cdf only sees the smallest coordinate
  const auto m = make_frechet_maxstable_model(2.0, 2);
  REQUIRE(m.cdf(v({1.0, 3.0})) == Approx(std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(m.means()[0] == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("samples do not depend on the thread count", "[models]") {
  for (const auto& e : maxcf::testing::model_catalog()) {
    INFO(e.name);
    const auto a = e.model.sample(9, 20000, 1);
    const auto b = e.model.sample(9, 20000, 4);
    REQUIRE(a.data() == b.data());
  }
}

TEST_CASE("every model round-trips through its JSON spec", "[models]") {
  for (const auto& e : maxcf::testing::model_catalog()) {
    INFO(e.name);
    const auto back = model_from_json(e.model.spec());
    REQUIRE(back.label() == e.model.label());
    REQUIRE(back.sample(4, 100).data() == e.model.sample(4, 100).data());
  }
}
