#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "chargegrid/error.hpp"

namespace chargegrid {

/// Right-continuous empirical CDF. `n` counts every trial, including
/// censored ones that contribute no value, so the function may plateau
/// below 1.
class EmpiricalCdf {
 public:
  static constexpr double confidence = 0.99;

  EmpiricalCdf() = default;
  EmpiricalCdf(std::vector<double> values, std::size_t n) : values_(std::move(values)), n_(n) {
    if (values_.size() > n_) throw InvalidParameter("more values than trials");
    std::sort(values_.begin(), values_.end());
  }
  explicit EmpiricalCdf(std::vector<double> values) : values_(std::move(values)) {
    n_ = values_.size();
    std::sort(values_.begin(), values_.end());
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t n() const { return n_; }
  std::size_t censored() const { return n_ - values_.size(); }

  /// Dvoretzky-Kiefer-Wolfowitz half-width at 99% confidence.
  double band() const {
    if (n_ == 0) return 1.0;
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n_)));
  }

  /// Fraction of trials with value <= x.
  double operator()(double x) const {
    if (n_ == 0) return 0.0;
    const auto k = std::upper_bound(values_.begin(), values_.end(), x) - values_.begin();
    return static_cast<double>(k) / static_cast<double>(n_);
  }

  /// Fraction of trials with value < x.
  double below(double x) const {
    if (n_ == 0) return 0.0;
    const auto k = std::lower_bound(values_.begin(), values_.end(), x) - values_.begin();
    return static_cast<double>(k) / static_cast<double>(n_);
  }

  /// Merge of the two sample multisets; associative and order-independent.
  EmpiricalCdf merged(const EmpiricalCdf& other) const {
    EmpiricalCdf out;
    out.n_ = n_ + other.n_;
    out.values_.resize(values_.size() + other.values_.size());
    std::merge(values_.begin(), values_.end(), other.values_.begin(), other.values_.end(),
               out.values_.begin());
    return out;
  }

  /// Kolmogorov-Smirnov distance to a continuous CDF, checked on both sides
  /// of every jump.
  template <class F>
  double ks_distance(F&& cdf) const {
    if (n_ == 0) return 1.0;
    double worst = 0.0;
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double f = cdf(values_[i]);
      worst = std::max({worst, std::abs(f - static_cast<double>(i) * inv),
                        std::abs(f - static_cast<double>(i + 1) * inv)});
    }
    return worst;
  }

  /// CSV rows "value,F,band_lo,band_hi", one per sample value.
  void write_csv(std::ostream& os) const {
    os << "value,F,band_lo,band_hi\n";
    const double b = band();
    const auto old = os.precision(12);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (i + 1 < values_.size() && values_[i + 1] == values_[i]) continue;
      const double f = static_cast<double>(i + 1) / static_cast<double>(n_);
      os << values_[i] << ',' << f << ',' << std::max(0.0, f - b) << ','
         << std::min(1.0, f + b) << '\n';
    }
    os.precision(old);
  }

 private:
  std::vector<double> values_;
  std::size_t n_ = 0;
};

}  // namespace chargegrid
