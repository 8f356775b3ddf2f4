#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "maxcf/error.hpp"

namespace maxcf {

/// n x d matrix of nonnegative draws, row-major.
class EmpiricalSample {
 public:
  EmpiricalSample() = default;
  EmpiricalSample(std::size_t n, std::size_t d) : n_(n), d_(d), data_(n * d, 0.0) {
    if (n == 0 || d == 0) throw InvalidArgument("EmpiricalSample: need n >= 1 and d >= 1");
  }
  EmpiricalSample(std::size_t n, std::size_t d, std::vector<double> data)
      : n_(n), d_(d), data_(std::move(data)) {
    if (n == 0 || d == 0) throw InvalidArgument("EmpiricalSample: need n >= 1 and d >= 1");
    if (data_.size() != n * d) throw InvalidArgument("EmpiricalSample: data size is not n*d");
    for (double v : data_)
      if (!(v >= 0.0)) throw DomainError("EmpiricalSample: entries must be nonnegative");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = data_[i * d_ + j];
    return out;
  }

  std::vector<double> column_means() const {
    std::vector<long double> acc(d_, 0.0L);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < d_; ++j) acc[j] += data_[i * d_ + j];
    std::vector<double> out(d_);
    for (std::size_t j = 0; j < d_; ++j) out[j] = static_cast<double>(acc[j] / n_);
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

/// Point estimate with a CLT standard error. The reported band is
/// value +- kBand * std_error.
struct EstimateWithCI {
  static constexpr double kBand = 4.0;

  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  double lower() const noexcept { return value - kBand * std_error; }
  double upper() const noexcept { return value + kBand * std_error; }
  bool exact() const noexcept { return std_error == 0.0; }

  static EstimateWithCI exact_value(double v) { return {v, 0.0, 0, 0}; }
};

/// Sample mean of f(row) with its standard error.
inline EstimateWithCI sample_mean(const EmpiricalSample& s,
                                  const std::function<double(std::span<const double>)>& f,
                                  std::uint64_t seed = 0) {
  // Welford update
  long double mean = 0.0L, m2 = 0.0L;
  for (std::size_t i = 0; i < s.n(); ++i) {
    const long double v = f(s.row(i));
    const long double delta = v - mean;
    mean += delta / static_cast<long double>(i + 1);
    m2 += delta * (v - mean);
  }
  const auto n = static_cast<long double>(s.n());
  const long double var = s.n() > 1 ? m2 / (n - 1) : 0.0L;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)), s.n(), seed};
}

}  // namespace maxcf
