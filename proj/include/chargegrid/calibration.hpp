#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid {

/// Distance-to-center distribution of roads, uniform on [lo, hi].
struct UniformDistances {
  double lo = 0.0;
  double hi = 1.0;
};

/// Empirical distance-to-center distribution; equal weights when empty.
struct EmpiricalDistances {
  std::vector<double> values;
  std::vector<double> weights;
};

using DistanceWeights = std::variant<UniformDistances, EmpiricalDistances>;

namespace detail {

// Integral of g(r) over [a, b] with r read as distance to the nearest center.
inline double profile_integral(const ThinningSpec& spec, double a, double b) {
  if (const auto* mc = std::get_if<MultiCenterPowerLaw>(&spec))
    return power_law_integral(mc->alpha, mc->r_min, a, b);
  return integral_g(spec, a, b);
}

}  // namespace detail

/// Expected charging probability E[g(R)] of a road drawn from `weights`.
inline double avg_charging_fraction(const ThinningSpec& spec, const DistanceWeights& weights) {
  validate(spec);
  return std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, UniformDistances>) {
          if (!(w.hi >= w.lo)) throw InvalidParameter("uniform weights: hi < lo");
          if (w.hi == w.lo) return eval_g(spec, w.lo);
          return detail::profile_integral(spec, w.lo, w.hi) / (w.hi - w.lo);
        } else {
          if (w.values.empty()) throw InvalidParameter("empty distance weight set");
          if (!w.weights.empty() && w.weights.size() != w.values.size())
            throw InvalidParameter("weights and values differ in length");
          double num = 0.0;
          double den = 0.0;
          for (std::size_t i = 0; i < w.values.size(); ++i) {
            const double wi = w.weights.empty() ? 1.0 : w.weights[i];
            if (wi < 0.0) throw InvalidParameter("negative distance weight");
            num += wi * eval_g(spec, w.values[i]);
            den += wi;
          }
          if (!(den > 0.0)) throw InvalidParameter("distance weights sum to zero");
          return num / den;
        }
      },
      weights);
}

/// Search interval for the free parameter of each family: p for uniform,
/// alpha for the power laws, sigma for the gaussian.
struct CalibrationBracket {
  double alpha_lo = 0.05;
  double alpha_hi = 50.0;
  double sigma_lo = 1.0;
  double sigma_hi = 1e7;
};

inline constexpr double calibration_tolerance = 0.005;

namespace detail {

inline ThinningSpec with_parameter(ThinningSpec spec, double value) {
  std::visit(
      [value](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Uniform>) s.p = value;
        else if constexpr (std::is_same_v<T, Gaussian>) s.sigma = value;
        else s.alpha = value;
      },
      spec);
  return spec;
}

}  // namespace detail

/// Solves for the family's free parameter so that the average charging
/// fraction under `weights` hits `target`, by bisection.
inline ThinningSpec calibrate(const ThinningSpec& family, double target,
                              const DistanceWeights& weights,
                              const CalibrationBracket& bracket = {}) {
  if (!(target >= 0.0 && target <= 1.0))
    throw InvalidParameter("calibration target must lie in [0, 1]");
  double lo = 0.0;
  double hi = 1.0;
  if (std::holds_alternative<Gaussian>(family)) {
    lo = bracket.sigma_lo;
    hi = bracket.sigma_hi;
  } else if (!std::holds_alternative<Uniform>(family)) {
    lo = bracket.alpha_lo;
    hi = bracket.alpha_hi;
  }
  auto fraction = [&](double v) {
    return avg_charging_fraction(detail::with_parameter(family, v), weights);
  };
  double f_lo = fraction(lo);
  double f_hi = fraction(hi);
  const double reach_lo = std::min(f_lo, f_hi);
  const double reach_hi = std::max(f_lo, f_hi);
  if (target < reach_lo - calibration_tolerance || target > reach_hi + calibration_tolerance) {
    throw CalibrationFailure("target fraction " + std::to_string(target) +
                                 " outside achievable range [" + std::to_string(reach_lo) + ", " +
                                 std::to_string(reach_hi) + "]",
                             reach_lo, reach_hi);
  }
  // Orient so that fraction increases from lo to hi.
  if (f_lo > f_hi) {
    std::swap(lo, hi);
    std::swap(f_lo, f_hi);
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = fraction(mid);
    if (f == target) break;
    (f < target ? lo : hi) = mid;
    if (std::abs(hi - lo) <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  auto result = detail::with_parameter(family, mid);
  const double achieved = avg_charging_fraction(result, weights);
  if (std::abs(achieved - target) > calibration_tolerance)
    throw CalibrationFailure("bisection ended " + std::to_string(achieved) + " away from target",
                             reach_lo, reach_hi);
  return result;
}

}  // namespace chargegrid
