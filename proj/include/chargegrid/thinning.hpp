#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/geometry.hpp"

namespace chargegrid {

/// Every road has the same charging probability.
struct Uniform {
  double p = 0.0;
};

/// g(r) = 1 on the plateau |r| <= r_min and (|r|/r_min)^-alpha beyond it.
struct PowerLaw {
  double alpha = 1.0;
  double r_min = 1.0;
};

/// g(r) = peak * exp(-r^2 / (2 sigma^2)).
struct Gaussian {
  double sigma = 1.0;
  double peak = 1.0;
};

/// Power law in the distance to the nearest of several centers.
struct MultiCenterPowerLaw {
  double alpha = 1.0;
  double r_min = 1.0;
  std::vector<Point2> centers;
};

/// Deployment density g: maps a road's distance from the center to the
/// probability that the road carries dynamic charging.
using ThinningSpec = std::variant<Uniform, PowerLaw, Gaussian, MultiCenterPowerLaw>;

inline void validate(const ThinningSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          if (!(s.p >= 0.0 && s.p <= 1.0))
            throw InvalidParameter("uniform: p must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (!(s.sigma > 0.0)) throw InvalidParameter("gaussian: sigma must be positive");
          if (!(s.peak > 0.0 && s.peak <= 1.0))
            throw InvalidParameter("gaussian: peak must lie in (0, 1]");
        } else {
          if (!(s.alpha > 0.0) || !std::isfinite(s.alpha))
            throw InvalidParameter("power law: alpha must be positive");
          if (!(s.r_min > 0.0) || !std::isfinite(s.r_min))
            throw InvalidParameter("power law: r_min must be positive");
          if constexpr (std::is_same_v<T, MultiCenterPowerLaw>) {
            if (s.centers.empty())
              throw InvalidParameter("multi-center power law needs at least one center");
          }
        }
      },
      spec);
}

namespace detail {

inline double power_law_value(double alpha, double r_min, double r) {
  const double a = std::abs(r);
  return a <= r_min ? 1.0 : std::pow(a / r_min, -alpha);
}

// Integral of (r/r_min)^-alpha over [u, v] with r_min <= u <= v.
inline double power_tail_integral(double alpha, double r_min, double u, double v) {
  if (v <= u) return 0.0;
  const double lu = std::log(u / r_min);
  const double lv = std::log(v / r_min);
  const double k = 1.0 - alpha;
  if (std::abs(k) < 1e-9) return r_min * (lv - lu);
  // r_min * (e^{k lv} - e^{k lu}) / k, written to stay accurate as k -> 0.
  return r_min * std::exp(k * lu) * std::expm1(k * (lv - lu)) / k;
}

// Closed-form integral of the single-center power law over [a, b]: left tail,
// plateau and right tail contributions.
inline double power_law_integral(double alpha, double r_min, double a, double b) {
  double total = 0.0;
  if (a < -r_min) {
    const double hi = std::min(b, -r_min);
    total += power_tail_integral(alpha, r_min, -hi, -a);
  }
  const double plo = std::max(a, -r_min);
  const double phi = std::min(b, r_min);
  if (phi > plo) total += phi - plo;
  if (b > r_min) total += power_tail_integral(alpha, r_min, std::max(a, r_min), b);
  return total;
}

inline double gaussian_integral(double sigma, double peak, double a, double b) {
  const double scale = sigma * std::numbers::sqrt2;
  const double pref = peak * sigma * std::sqrt(std::numbers::pi / 2.0);
  const double ua = a / scale;
  const double ub = b / scale;
  if (ua >= 0.0) return pref * (std::erfc(ua) - std::erfc(ub));
  if (ub <= 0.0) return pref * (std::erfc(-ub) - std::erfc(-ua));
  return pref * (std::erf(ub) - std::erf(ua));
}

inline std::vector<double> center_coordinates(const MultiCenterPowerLaw& s, Axis axis) {
  std::vector<double> cs;
  cs.reserve(s.centers.size());
  for (const auto& c : s.centers) cs.push_back(coordinate_of(c, axis));
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  return cs;
}

inline double nearest_offset(std::span<const double> sorted_centers, double coord) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : sorted_centers) best = std::min(best, std::abs(coord - c));
  return best;
}

}  // namespace detail

/// g(r) for a distance (or signed offset) r from the nearest center.
inline double eval_g(const ThinningSpec& spec, double r) {
  return std::visit(
      [r](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return s.p;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return s.peak * std::exp(-r * r / (2.0 * s.sigma * s.sigma));
        } else {
          return detail::power_law_value(s.alpha, s.r_min, r);
        }
      },
      spec);
}

/// Centers the spec measures distance from: its own list for the
/// multi-center variant, otherwise the origin.
inline std::vector<Point2> spec_centers(const ThinningSpec& spec) {
  if (const auto* mc = std::get_if<MultiCenterPowerLaw>(&spec)) return mc->centers;
  return {Point2{0.0, 0.0}};
}

/// Charging probability of an axis-parallel line. The line's distance to a
/// center is the offset of its coordinate from the center's coordinate.
inline double eval_g_line(const ThinningSpec& spec, Axis axis, double coord) {
  if (const auto* mc = std::get_if<MultiCenterPowerLaw>(&spec)) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& c : mc->centers) r = std::min(r, std::abs(coord - coordinate_of(c, axis)));
    return eval_g(spec, r);
  }
  return eval_g(spec, coord);
}

/// Charging probability at a planar point (planar distance to nearest center).
inline double eval_g_point(const ThinningSpec& spec, Point2 p) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& c : spec_centers(spec)) r = std::min(r, distance(p, c));
  return eval_g(spec, r);
}

/// Integral of the line-charging profile along one axis over [a, b].
inline double integral_g(const ThinningSpec& spec, double a, double b,
                         Axis axis = Axis::vertical) {
  if (!(a <= b)) throw InvalidParameter("integral_g: a must not exceed b");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return s.p * (b - a);
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return detail::power_law_integral(s.alpha, s.r_min, a, b);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return detail::gaussian_integral(s.sigma, s.peak, a, b);
        } else {
          // Between consecutive midpoints of the sorted center coordinates the
          // nearest center is fixed, so each piece is a shifted power law.
          const auto cs = detail::center_coordinates(s, axis);
          std::vector<double> cuts{a};
          for (std::size_t i = 0; i + 1 < cs.size(); ++i) {
            const double m = 0.5 * (cs[i] + cs[i + 1]);
            if (m > a && m < b) cuts.push_back(m);
          }
          cuts.push_back(b);
          double total = 0.0;
          std::size_t k = 0;
          for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            while (k + 1 < cs.size() && std::abs(mid - cs[k + 1]) < std::abs(mid - cs[k])) ++k;
            total += detail::power_law_integral(s.alpha, s.r_min, cuts[i] - cs[k],
                                                cuts[i + 1] - cs[k]);
          }
          return total;
        }
      },
      spec);
}

/// Integral of 1 - g over [a, b], the intensity of non-charging roads.
inline double integral_one_minus_g(const ThinningSpec& spec, double a, double b,
                                   Axis axis = Axis::vertical) {
  return (b - a) - integral_g(spec, a, b, axis);
}

/// Coordinates where the line profile along an axis has a kink; used as
/// quadrature split points.
inline std::vector<double> profile_breakpoints(const ThinningSpec& spec, Axis axis) {
  return std::visit(
      [axis](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return {-s.r_min, s.r_min};
        } else if constexpr (std::is_same_v<T, MultiCenterPowerLaw>) {
          const auto cs = detail::center_coordinates(s, axis);
          std::vector<double> out;
          for (std::size_t i = 0; i < cs.size(); ++i) {
            out.push_back(cs[i] - s.r_min);
            out.push_back(cs[i] + s.r_min);
            if (i + 1 < cs.size()) out.push_back(0.5 * (cs[i] + cs[i + 1]));
          }
          return out;
        } else {
          return {};
        }
      },
      spec);
}

inline std::string kind_name(const ThinningSpec& spec) {
  static constexpr const char* names[] = {"uniform", "power_law", "gaussian",
                                          "multi_center_power_law"};
  return names[spec.index()];
}

}  // namespace chargegrid
