#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "maxcf/error.hpp"
#include "maxcf/models.hpp"
#include "maxcf/random.hpp"
#include "maxcf/sample.hpp"

namespace maxcf {

/// Finitely supported probability measure on R^d.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::size_t m, std::size_t d, std::vector<double> support, std::vector<double> weights)
      : m_(m), d_(d), support_(std::move(support)), weights_(std::move(weights)) {
    if (m == 0 || d == 0) throw InvalidArgument("DiscreteMeasure: need at least one point and d >= 1");
    if (support_.size() != m * d) throw InvalidArgument("DiscreteMeasure: support size is not m*d");
    if (weights_.size() != m) throw InvalidArgument("DiscreteMeasure: one weight per support point");
    long double total = 0.0L;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw InvalidArgument("DiscreteMeasure: weights must be nonnegative");
      total += w;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12)
      throw InvalidArgument("DiscreteMeasure: weights must sum to 1");
    for (double v : support_)
      if (!std::isfinite(v)) throw InvalidArgument("DiscreteMeasure: support must be finite");
  }

  /// Uniform weights on the rows of a sample.
  static DiscreteMeasure uniform(const EmpiricalSample& s) {
    return DiscreteMeasure(s.n(), s.d(), s.data(), std::vector<double>(s.n(), 1.0 / static_cast<double>(s.n())));
  }

  std::size_t size() const noexcept { return m_; }
  std::size_t dim() const noexcept { return d_; }
  std::span<const double> point(std::size_t i) const { return {support_.data() + i * d_, d_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Coordinate j as a 1-d measure.
  DiscreteMeasure marginal(std::size_t j) const {
    std::vector<double> s(m_);
    for (std::size_t i = 0; i < m_; ++i) s[i] = support_[i * d_ + j];
    return DiscreteMeasure(m_, 1, std::move(s), weights_);
  }

  /// One row per point: x1..xd,weight.
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(15);
    for (std::size_t j = 0; j < d_; ++j) os << "x" << j + 1 << ",";
    os << "weight\n";
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) os << support_[i * d_ + j] << ",";
      os << weights_[i] << "\n";
    }
    return os.str();
  }

 private:
  std::size_t m_, d_;
  std::vector<double> support_;
  std::vector<double> weights_;
};

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  ///< rows x cols, row-major
  double cost = 0.0;

  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }

  /// Nonzero entries as i,j,mass.
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(15);
    os << "i,j,mass\n";
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (at(i, j) > 0.0) os << i << "," << j << "," << at(i, j) << "\n";
    return os.str();
  }
};

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// (1/n) sum |a_(i) - b_(i)| over order statistics.
inline double w1_sorted_1d(const EmpiricalSample& a, const EmpiricalSample& b) {
  if (a.d() != 1 || b.d() != 1) throw InvalidArgument("w1_sorted_1d: samples must be 1-dimensional");
  if (a.n() != b.n())
    throw InvalidArgument("w1_sorted_1d: unequal sample sizes; use w1_weighted_1d on DiscreteMeasure");
  std::vector<double> x = a.data(), y = b.data();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return static_cast<double>(s / static_cast<long double>(x.size()));
}

/// int |F_a - F_b| for 1-d measures with arbitrary weights.
inline double w1_weighted_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw InvalidArgument("w1_weighted_1d: measures must be 1-dimensional");
  // (position, signed weight) events swept in order
  std::vector<std::pair<double, double>> ev;
  ev.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ev.emplace_back(a.point(i)[0], a.weight(i));
  for (std::size_t i = 0; i < b.size(); ++i) ev.emplace_back(b.point(i)[0], -b.weight(i));
  std::sort(ev.begin(), ev.end());
  long double diff = 0.0L, total = 0.0L;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    diff += ev[i].second;
    total += std::abs(diff) * (ev[i + 1].first - ev[i].first);
  }
  return static_cast<double>(total);
}

namespace detail {

// Primal network simplex for the uncapacitated transportation problem.
// Flows are kept in floating point: integer scaling would introduce
// rounding of the weights that is larger than the accuracy we need.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost)
      : m_(supply.size()), n_(demand.size()), cost_(std::move(cost)) {
    nodes_ = m_ + n_ + 1;
    root_ = m_ + n_;
    const std::size_t real = m_ * n_;
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, c);
    eps_ = 1e-12 * std::max(1.0, max_cost);
    const double art = (max_cost + 1.0) * static_cast<double>(nodes_);
    src_.resize(real + m_ + n_);
    dst_.resize(real + m_ + n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        src_[i * n_ + j] = i;
        dst_[i * n_ + j] = m_ + j;
      }
    flow_.assign(src_.size(), 0.0);
    in_tree_.assign(src_.size(), false);
    // Artificial arcs: supply nodes point at the root, demand nodes hang below it.
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t a = real + i;
      src_[a] = i;
      dst_[a] = root_;
      cost_.push_back(art);
      flow_[a] = supply[i];
      in_tree_[a] = true;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t a = real + m_ + j;
      src_[a] = root_;
      dst_[a] = m_ + j;
      cost_.push_back(art);
      flow_[a] = demand[j];
      in_tree_[a] = true;
    }
    real_arcs_ = real;
    for (std::size_t a = real; a < src_.size(); ++a) tree_.push_back(a);
    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(src_.size()))));
    rebuild();
  }

  void solve() {
    const std::size_t cap = 50 * src_.size() + 10000;
    for (std::size_t it = 0; it < cap; ++it) {
      const auto entering = find_entering();
      if (entering == kNone) return;
      pivot(entering);
    }
    throw NumericFailure("network simplex: iteration cap reached", std::numeric_limits<double>::infinity());
  }

  double flow(std::size_t i, std::size_t j) const { return flow_[i * n_ + j]; }

  double artificial_flow() const {
    double s = 0.0;
    for (std::size_t a = real_arcs_; a < flow_.size(); ++a) s += std::abs(flow_[a]);
    return s;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double reduced(std::size_t a) const { return cost_[a] + pi_[src_[a]] - pi_[dst_[a]]; }

  std::size_t find_entering() {
    const std::size_t arcs = src_.size();
    double best = -eps_;
    std::size_t best_arc = kNone;
    std::size_t seen = 0;
    for (std::size_t step = 0; step < arcs; ++step) {
      const std::size_t a = (next_ + step) % arcs;
      if (!in_tree_[a]) {
        const double r = reduced(a);
        if (r < best) {
          best = r;
          best_arc = a;
        }
      }
      if (++seen == block_) {
        if (best_arc != kNone) {
          next_ = (a + 1) % arcs;
          return best_arc;
        }
        seen = 0;
      }
    }
    return best_arc;
  }

  // Direction flags: up_[v] is true when the tree arc to the parent is v -> parent.
  void rebuild() {
    std::vector<std::vector<std::size_t>> adj(nodes_);
    for (std::size_t a : tree_) {
      adj[src_[a]].push_back(a);
      adj[dst_[a]].push_back(a);
    }
    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    up_.assign(nodes_, false);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    std::vector<std::size_t> stack{root_};
    std::vector<bool> seen(nodes_, false);
    seen[root_] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t a : adj[u]) {
        const std::size_t v = src_[a] == u ? dst_[a] : src_[a];
        if (seen[v]) continue;
        seen[v] = true;
        parent_[v] = u;
        pred_[v] = a;
        up_[v] = src_[a] == v;
        depth_[v] = depth_[u] + 1;
        // zero reduced cost on tree arcs
        pi_[v] = up_[v] ? pi_[u] - cost_[a] : pi_[u] + cost_[a];
        stack.push_back(v);
      }
    }
  }

  void pivot(std::size_t in) {
    const std::size_t first = src_[in], second = dst_[in];
    std::size_t a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) a = parent_[a];
      else b = parent_[b];
    }
    const std::size_t join = a;

    // Cycle orientation follows the entering arc first -> second. Only arcs
    // traversed against their direction can block (no capacities).
    double delta = std::numeric_limits<double>::infinity();
    std::size_t out_node = kNone;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      if (up_[u] && flow_[pred_[u]] < delta) {
        delta = flow_[pred_[u]];
        out_node = u;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      if (!up_[u] && flow_[pred_[u]] <= delta) {
        delta = flow_[pred_[u]];
        out_node = u;
      }
    }
    if (out_node == kNone) throw NumericFailure("network simplex: unbounded cycle", 0.0);

    if (delta > 0.0) {
      flow_[in] += delta;
      for (std::size_t u = first; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? -delta : delta;
      for (std::size_t u = second; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? delta : -delta;
    }
    const std::size_t out = pred_[out_node];
    flow_[out] = 0.0;
    in_tree_[out] = false;
    in_tree_[in] = true;
    *std::find(tree_.begin(), tree_.end(), out) = in;
    rebuild();
  }

  std::size_t m_, n_, nodes_ = 0, root_ = 0, real_arcs_ = 0, block_ = 10, next_ = 0;
  double eps_ = 0.0;
  std::vector<double> cost_;
  std::vector<std::size_t> src_, dst_;
  std::vector<double> flow_;
  std::vector<bool> in_tree_;
  std::vector<std::size_t> tree_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<bool> up_;
  std::vector<double> pi_;
};

}  // namespace detail

inline constexpr std::size_t kExactSolverCap = 512;

/// Optimal plan for the L1 ground cost. Points with zero weight are kept in
/// the plan shape but do not enter the solver.
inline TransportPlan w1_discrete_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                       std::size_t cap = kExactSolverCap) {
  if (a.dim() != b.dim()) throw InvalidArgument("w1_discrete_exact: dimension mismatch");
  if (a.size() + b.size() > cap) {
    std::ostringstream msg;
    msg << "w1_discrete_exact: combined support " << a.size() + b.size() << " exceeds the cap " << cap
        << "; use w1_bounds or subsample";
    throw InvalidArgument(msg.str());
  }
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.weight(i) > 0.0) ia.push_back(i);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b.weight(j) > 0.0) ib.push_back(j);
  std::vector<double> supply, demand, cost(ia.size() * ib.size());
  for (auto i : ia) supply.push_back(a.weight(i));
  for (auto j : ib) demand.push_back(b.weight(j));
  for (std::size_t r = 0; r < ia.size(); ++r)
    for (std::size_t c = 0; c < ib.size(); ++c) cost[r * ib.size() + c] = l1_distance(a.point(ia[r]), b.point(ib[c]));

  detail::TransportSimplex solver(supply, demand, cost);
  solver.solve();
  if (solver.artificial_flow() > 1e-9)
    throw NumericFailure("network simplex: residual flow on artificial arcs", solver.artificial_flow());

  TransportPlan plan;
  plan.rows = a.size();
  plan.cols = b.size();
  plan.mass.assign(plan.rows * plan.cols, 0.0);
  long double total = 0.0L;
  for (std::size_t r = 0; r < ia.size(); ++r)
    for (std::size_t c = 0; c < ib.size(); ++c) {
      const double f = std::max(0.0, solver.flow(r, c));
      plan.mass[ia[r] * plan.cols + ib[c]] = f;
      total += static_cast<long double>(f) * cost[r * ib.size() + c];
    }
  plan.cost = static_cast<double>(total);
  return plan;
}

struct W1Bounds {
  double lower = 0.0;  ///< sum of the coordinatewise 1-d distances
  double upper = 0.0;  ///< cost of the independent coupling
};

inline W1Bounds w1_bounds(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("w1_bounds: dimension mismatch");
  W1Bounds out;
  for (std::size_t j = 0; j < a.dim(); ++j) out.lower += w1_weighted_1d(a.marginal(j), b.marginal(j));
  long double up = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      up += static_cast<long double>(a.weight(i)) * b.weight(j) * l1_distance(a.point(i), b.point(j));
  out.upper = static_cast<double>(up);
  return out;
}

struct W1ModelDistance {
  /// d >= 2: batch mean. d = 1: exact W1 between the full samples.
  /// std_error = batch sd / sqrt(batches) in both cases.
  EstimateWithCI estimate;
  std::vector<double> batches;
  double spread = 0.0;  ///< sample sd of the batch values
};

/// W1 between two models from n draws of each. In d = 1 the sorted formula
/// handles the full samples and the batches are disjoint blocks of n/batches
/// rows; otherwise each batch is an exact distance between random subsamples
/// that fit under the solver cap.
inline W1ModelDistance w1_model_distance_detailed(const RandomVectorModel& a, const RandomVectorModel& b,
                                                  std::size_t n, std::uint64_t seed, unsigned threads = 1,
                                                  std::size_t batches = 10, std::size_t cap = kExactSolverCap) {
  if (a.dim() != b.dim()) throw InvalidArgument("w1_model_distance: dimension mismatch");
  if (batches < 2 || n < 2 * batches)
    throw InvalidArgument("w1_model_distance: need at least two batches and n >= 2 * batches");
  const auto sa = a.sample(derive_seed(seed, 1), n, threads);
  const auto sb = b.sample(derive_seed(seed, 2), n, threads);
  const std::size_t d = a.dim();

  W1ModelDistance out;
  if (d == 1) {
    const std::size_t block = n / batches;
    for (std::size_t k = 0; k < batches; ++k) {
      const auto first = static_cast<std::ptrdiff_t>(k * block), last = first + static_cast<std::ptrdiff_t>(block);
      out.batches.push_back(
          w1_sorted_1d(EmpiricalSample(block, 1, {sa.data().begin() + first, sa.data().begin() + last}),
                       EmpiricalSample(block, 1, {sb.data().begin() + first, sb.data().begin() + last})));
    }
  } else {
    const std::size_t sub = std::min(n, cap / 2);
    auto subsample = [&](const EmpiricalSample& s, Rng& rng) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < sub; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
      std::vector<double> data;
      data.reserve(sub * d);
      for (std::size_t i = 0; i < sub; ++i) {
        const auto r = s.row(idx[i]);
        data.insert(data.end(), r.begin(), r.end());
      }
      return EmpiricalSample(sub, d, std::move(data));
    };
    for (std::size_t k = 0; k < batches; ++k) {
      Rng rng(derive_seed(seed, 100 + k));
      const auto xa = subsample(sa, rng);
      const auto xb = subsample(sb, rng);
      out.batches.push_back(w1_discrete_exact(DiscreteMeasure::uniform(xa), DiscreteMeasure::uniform(xb), cap).cost);
    }
  }
  long double mean = 0.0L;
  for (double v : out.batches) mean += v;
  mean /= static_cast<long double>(batches);
  long double ss = 0.0L;
  for (double v : out.batches) ss += (v - mean) * (v - mean);
  out.spread = static_cast<double>(std::sqrt(ss / static_cast<long double>(batches - 1)));
  const double value = d == 1 ? w1_sorted_1d(sa, sb) : static_cast<double>(mean);
  out.estimate = {value, out.spread / std::sqrt(static_cast<double>(batches)), n, seed};
  return out;
}

inline EstimateWithCI w1_model_distance(const RandomVectorModel& a, const RandomVectorModel& b, std::size_t n,
                                        std::uint64_t seed, unsigned threads = 1) {
  return w1_model_distance_detailed(a, b, n, seed, threads).estimate;
}

}  // namespace maxcf
