// Acceptance run: one PASS/FAIL line per criterion, with the measured
// runtime checked against its budget. Exit status is nonzero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "invariants.hpp"
#include "maxcf/all.hpp"
#include "ot_oracle.hpp"

using namespace maxcf;
using maxcf::testing::PointGen;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Criterion = std::function<void(Outcome&)>;

bool run(int number, double budget_s, const Criterion& body) {
  Outcome out;
  out.detail.precision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << "exception: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  if (!in_time) out.detail << "runtime over budget; ";
  const bool ok = out.pass && in_time;
  std::printf("criterion %d [PRIMARY] %s  %s(%.2f s, budget %.0f s)\n", number, ok ? "PASS" : "FAIL",
              out.detail.str().c_str(), secs, budget_s);
  std::fflush(stdout);
  return ok;
}

std::vector<double> v1(double x) { return {x}; }

void closed_form_agreement(Outcome& o) {
  const auto g = make_gpd_model({0.0, 1.0, 0.5});
  const auto closed = MaxCf::closed_form(g);
  const auto tail = MaxCf::tail_integral(g);
  const auto mc = MaxCf::monte_carlo(g, 1000000, 20261016);
  double worst_mc = 0.0, worst_tail = 0.0;
  for (double x : {0.25, 0.5, 1.0, 2.0, 5.0}) {
    const double c = maxcf_eval(closed, v1(x)).value;
    const auto m = maxcf_eval(mc, v1(x));
    const double t = maxcf_eval(tail, v1(x)).value;
    worst_mc = std::max(worst_mc, std::abs(m.value - c) / m.std_error);
    worst_tail = std::max(worst_tail, std::abs(t - c));
    o.require(std::abs(m.value - c) <= EstimateWithCI::kBand * m.std_error, "Monte Carlo outside 4 se at x=" + std::to_string(x));
    o.require(std::abs(t - c) <= 1e-8, "tail integral off by more than 1e-8 at x=" + std::to_string(x));
  }
  const double at1 = maxcf_eval(closed, v1(1.0)).value;
  o.require(std::abs(at1 - 7.0 / 3.0) <= 1e-12, "phi(1) != 7/3");
  o.detail << "max |MC-closed|/se=" << worst_mc << ", max |tail-closed|=" << worst_tail
           << ", |phi(1)-7/3|=" << std::abs(at1 - 7.0 / 3.0) << " ";
}

void inversion_round_trip(Outcome& o) {
  struct Case {
    RandomVectorModel model;
    double lo, hi;
  };
  const std::vector<Case> cases = {{make_gpd_model({0.0, 1.0, 0.5}), 0.05, 20.0},
                                   {make_uniform_model(2.0), 0.05, 3.0},
                                   {make_constant_generator(1), 0.05, 4.0},
                                   {make_constant_generator(2), 0.05, 4.0}};
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto cf = MaxCf::closed_form(c.model);
    const auto d = c.model.dim();
    for (int i = 0; i < 20; ++i) {
      // log-spaced, with coordinates staggered to stay off the jump at 1
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double u = (i + 0.5 + 0.37 * static_cast<double>(j)) / 20.0;
        x[j] = c.lo * std::pow(c.hi / c.lo, u);
        if (std::abs(x[j] - 1.0) < 0.02) x[j] *= 1.05;
      }
      const double err = std::abs(invert_maxcf(cf, x) - c.model.cdf(x));
      worst = std::max(worst, err);
      o.require(err <= 1e-6, c.model.label() + " round trip error " + std::to_string(err));
    }
  }
  o.detail << "max |recovered-cdf|=" << worst << " over 80 points ";
}

void iterate_algebra(Outcome& o) {
  PointGen gen(31);
  double worst = 0.0;
  for (const auto& m : {make_constant_generator(2), make_permutation_generator(3), make_frechet_lambda_generator(2, 3.0)}) {
    const auto base = MaxCf::closed_form(m);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(gen.nonneg(m.dim(), 0.02, 6.0));
    for (double p : {0.3, 0.5, 0.9})
      for (std::uint64_t k = 1; k <= 20; ++k) {
        const auto a = tp_iterate(base, p, k, IterateMode::composed);
        const auto b = tp_iterate(base, p, k, IterateMode::closed);
        for (const auto& x : pts) worst = std::max(worst, std::abs(maxcf_eval(a, x).value - maxcf_eval(b, x).value));
      }
  }
  o.require(worst <= 1e-12, "composed vs closed gap " + std::to_string(worst));
  double worst_limit = 0.0, worst_spread = 0.0;
  TpLimitOptions opts;
  opts.p_values = {0.25, 0.5, 0.75};
  for (const auto& m : {make_constant_generator(2), make_permutation_generator(2), make_permutation_generator(4)}) {
    const auto cf = MaxCf::closed_form(m);
    const auto norm = DNorm::exact(m);
    for (int i = 0; i < 10; ++i) {
      const auto x = gen.nonneg(m.dim(), 0.05, 5.0);
      const auto r = tp_limit(cf, norm, x, 1e-9, opts);
      const double expected = 1.0 + dnorm_eval(norm, x).value;
      for (double l : r.per_p) worst_limit = std::max(worst_limit, std::abs(l - expected));
      const auto [lo, hi] = std::minmax_element(r.per_p.begin(), r.per_p.end());
      worst_spread = std::max(worst_spread, *hi - *lo);
    }
  }
  o.require(worst_limit <= 1e-9, "tp_limit off 1+||x||_D");
  o.require(worst_spread <= 2e-9, "tp_limit depends on p");
  o.detail << "iterate gap=" << worst << ", limit gap=" << worst_limit << ", p-spread=" << worst_spread << " ";
}

void transport_correctness(Outcome& o) {
  PointGen gen(4242);
  using maxcf::testing::random_measure;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + gen.rng().index(5), n = 1 + gen.rng().index(5), d = 1 + gen.rng().index(3);
    const auto a = random_measure(gen, m, d, rep % 2 == 0), b = random_measure(gen, n, d, rep % 2 == 0);
    worst = std::max(worst, std::abs(w1_discrete_exact(a, b).cost - maxcf::testing::brute_force_w1(a, b)));
  }
  o.require(worst <= 1e-10, "exact vs brute force gap " + std::to_string(worst));
  double worst_sorted = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + gen.rng().index(100);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = gen.uniform(0.0, 10.0);
    for (auto& v : y) v = gen.uniform(0.0, 10.0);
    const EmpiricalSample sx(n, 1, x), sy(n, 1, y);
    worst_sorted = std::max(worst_sorted, std::abs(w1_sorted_1d(sx, sy) -
                                                   w1_discrete_exact(DiscreteMeasure::uniform(sx),
                                                                     DiscreteMeasure::uniform(sy)).cost));
  }
  o.require(worst_sorted <= 1e-10, "sorted vs exact gap " + std::to_string(worst_sorted));
  double sym = 0.0, tri = -INFINITY, self = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 1 + gen.rng().index(3);
    const auto a = random_measure(gen, 1 + gen.rng().index(5), d, false);
    const auto b = random_measure(gen, 1 + gen.rng().index(5), d, false);
    const auto c = random_measure(gen, 1 + gen.rng().index(5), d, false);
    const double ab = w1_discrete_exact(a, b).cost;
    sym = std::max(sym, std::abs(ab - w1_discrete_exact(b, a).cost));
    tri = std::max(tri, w1_discrete_exact(a, c).cost - ab - w1_discrete_exact(b, c).cost);
    self = std::max(self, w1_discrete_exact(a, a).cost);
  }
  o.require(sym <= 1e-10, "symmetry");
  o.require(tri <= 1e-10, "triangle inequality");
  o.require(self == 0.0, "d(a,a) != 0");
  o.detail << "brute-force gap=" << worst << ", sorted gap=" << worst_sorted << ", asymmetry=" << sym
           << ", triangle excess=" << tri << " ";
}

void gpd_maxima_convergence(Outcome& o) {
  GpdMaximaConfig cfg;
  cfg.seed = 7;
  const auto rep = run_gpd_maxima_experiment(cfg);
  std::vector<double> w1;
  for (const auto& e : rep.w1_values) w1.push_back(e.value);
  o.require(maxcf::detail::mostly_decreasing(rep.maxcf_gaps), "max-CF gaps not decreasing");
  o.require(maxcf::detail::mostly_decreasing(w1), "W1 not decreasing");
  o.require(rep.maxcf_gaps.back() < 0.02, "final max-CF gap >= 0.02");
  o.require(w1.back() < 0.05, "final W1 >= 0.05");
  const double mean = rep.means.back()[0];
  o.require(std::abs(mean - std::sqrt(std::numbers::pi)) < 0.02, "mean not within 0.02 of sqrt(pi)");
  o.require(rep.verdict == "converged", "verdict " + rep.verdict);
  o.detail << "gaps=[";
  for (double g : rep.maxcf_gaps) o.detail << g << " ";
  o.detail << "] W1=[";
  for (double g : w1) o.detail << g << " ";
  o.detail << "] mean=" << mean << " sample mean=" << rep.sample_means.back()[0] << " ";
}

void counterexample(Outcome& o) {
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 1; n <= 20; ++n) ns.push_back(n);
  const auto rep = run_counterexample_cf_vs_maxcf(ns, 1.0);
  for (const auto& r : rep.rows) {
    const double n = static_cast<double>(r.n);
    o.require(r.maxcf >= std::exp(n) / n - 1.0, "phi_n(1) below e^n/n - 1 at n=" + std::to_string(r.n));
    o.require(r.cf_gap <= 2.0 / n, "CF gap above 2/n at n=" + std::to_string(r.n));
  }
  o.require(rep.maxcf_verdict == "diverged" && rep.cf_verdict == "converged", "verdicts");
  o.detail << "phi_20(1)=" << rep.rows.back().maxcf << ", cf gap at 20=" << rep.rows.back().cf_gap << " ";
}

void nonclosedness(Outcome& o) {
  NonclosednessConfig cfg;
  cfg.seed = 7;
  const auto rep = run_nonclosedness_demo(cfg);
  o.require(rep.rows.back().k == 40 && rep.rows.back().limit_gap < 1e-6, "gap at k=40");
  for (const auto& r : rep.rows)
    o.require(r.prob_nonzero == std::ldexp(1.0, -static_cast<int>(r.k)), "P(Y != 0) != 2^-k");
  const auto sup = DNorm::exact(make_constant_generator(1));
  const auto cand = MaxCf::candidate(1, [sup](std::span<const double> x) { return 1.0 + dnorm_eval(sup, x).value; },
                                     "1+||.||_inf");
  const auto diag = diagnose_max_cf(cand, {{1.0}});
  o.require(diag.flagged(), "1+||.||_inf not flagged");
  o.require(rep.verdict == "limit is not a max-CF", "verdict " + rep.verdict);
  o.detail << "gap at k=40=" << rep.rows.back().limit_gap << ", flags=" << diag.flags.size() << " ("
           << (diag.flags.empty() ? "" : diag.flags.front().code) << ") ";
}

void risk_identity(Outcome& o) {
  double worst = 0.0;
  for (const auto& m : {make_gpd_model({0.0, 1.0, 0.5}), make_uniform_model(2.0)}) {
    const auto rep = risk_identity_check(m, {0.25, 0.5, 0.75, 0.9});
    for (const auto& r : rep.rows) {
      worst = std::max(worst, r.residual);
      o.require(!r.skipped && r.residual <= 1e-8, m.label() + " residual at alpha=" + std::to_string(r.alpha));
    }
  }
  o.detail << "max residual=" << worst << " ";
}

void invariant_suites(Outcome& o) {
  std::size_t checks = 0, failures = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rep = maxcf::testing::run_invariant_suite(seed);
    checks += rep.checks;
    failures += rep.failures.size();
    for (std::size_t i = 0; i < rep.failures.size() && i < 5; ++i)
      o.detail << "[seed " << seed << "] " << rep.failures[i] << "; ";
  }
  o.require(failures == 0, std::to_string(failures) + " invariant failures");
  o.detail << checks << " checks, " << failures << " failures over seeds 1,2,3 ";
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run(1, 10.0, closed_form_agreement);
  ok &= run(2, 5.0, inversion_round_trip);
  ok &= run(3, 1.0, iterate_algebra);
  ok &= run(4, 30.0, transport_correctness);
  ok &= run(5, 120.0, gpd_maxima_convergence);
  ok &= run(6, 1.0, counterexample);
  ok &= run(7, 5.0, nonclosedness);
  ok &= run(8, 1.0, risk_identity);
  ok &= run(9, 180.0, invariant_suites);
  return ok ? 0 : 1;
}
