#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/geometry.hpp"
#include "chargegrid/rng.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid {

enum class Orientation { parallel, perpendicular };

/// A trip's source and destination roads in a canonical frame: the source
/// road is the vertical line x = s and the source sits at y = along on it.
///
///  - parallel: the destination road is the vertical line x = d, so
///    d_h = |d - s|, and the destination sits d_v above the source.
///  - perpendicular: the destination road is the horizontal line y = d, so
///    d_v = |d - along|, and the destination sits d_h to the side of the
///    source (direction x_dir).
///
/// Crossing (horizontal) roads are therefore met along the source road while
/// covering d_v, and vertical roads are met while covering d_h.
struct SourceDestPair {
  double s = 0.0;
  double d = 0.0;
  double d_h = 0.0;
  double d_v = 0.0;
  Orientation orientation = Orientation::parallel;
  double along = 0.0;
  int x_dir = 1;
  int y_dir = 1;

  static SourceDestPair parallel(double s, double d, double d_v,
                                 std::optional<double> along = std::nullopt, int y_dir = 1) {
    SourceDestPair p;
    p.s = s;
    p.d = d;
    p.d_h = std::abs(d - s);
    p.d_v = d_v;
    p.orientation = Orientation::parallel;
    p.along = along.value_or(s);
    p.x_dir = d >= s ? 1 : -1;
    p.y_dir = y_dir >= 0 ? 1 : -1;
    p.validate();
    return p;
  }

  static SourceDestPair perpendicular(double s, double d, double d_h,
                                      std::optional<double> along = std::nullopt, int x_dir = 1) {
    SourceDestPair p;
    p.s = s;
    p.d = d;
    p.d_h = d_h;
    p.along = along.value_or(s);
    p.d_v = std::abs(d - p.along);
    p.orientation = Orientation::perpendicular;
    p.x_dir = x_dir >= 0 ? 1 : -1;
    p.y_dir = d >= p.along ? 1 : -1;
    p.validate();
    return p;
  }

  void validate() const {
    if (!(d_h >= 0.0) || !(d_v >= 0.0))
      throw InvalidParameter("source/destination separations must be non-negative");
    if (orientation == Orientation::parallel && std::abs(std::abs(d - s) - d_h) > 1e-9 * (1 + d_h))
      throw InvalidParameter("parallel pair requires d_h = |d - s|");
    if (orientation == Orientation::perpendicular &&
        std::abs(std::abs(d - along) - d_v) > 1e-9 * (1 + d_v))
      throw InvalidParameter("perpendicular pair requires d_v = |d - along|");
    if (std::abs(x_dir) != 1 || std::abs(y_dir) != 1)
      throw InvalidParameter("directions must be +1 or -1");
  }

  Point2 source_point() const { return {s, along}; }
  // Exact on the destination road, whatever rounding d_h or d_v carry.
  Point2 dest_point() const {
    if (orientation == Orientation::parallel) return {d, along + y_dir * d_v};
    return {s + x_dir * d_h, d};
  }
  Axis dest_axis() const {
    return orientation == Orientation::parallel ? Axis::vertical : Axis::horizontal;
  }

  /// Start coordinate, direction and extent of the trip along one axis.
  /// Vertical roads are met while moving in x, horizontal roads in y.
  double start(Axis axis) const { return axis == Axis::vertical ? s : along; }
  int direction(Axis axis) const { return axis == Axis::vertical ? x_dir : y_dir; }
  double separation(Axis axis) const { return axis == Axis::vertical ? d_h : d_v; }
};

struct UniformDensity {
  double lo = -1.0;
  double hi = 1.0;
};

/// Density proportional to a plateau-plus-power-law profile on [lo, hi].
struct PowerLawDensity {
  double alpha = 1.0;
  double r_min = 1.0;
  double lo = -1.0;
  double hi = 1.0;
};

/// One-dimensional probability density of a road coordinate.
class Density {
 public:
  Density(UniformDensity u) : impl_(u) { check(u.lo, u.hi); }  // NOLINT
  Density(PowerLawDensity p) : impl_(p) {                          // NOLINT
    check(p.lo, p.hi);
    if (!(p.alpha > 0.0 && p.r_min > 0.0))
      throw InvalidParameter("power-law density needs alpha, r_min > 0");
    mass_ = detail::power_law_integral(p.alpha, p.r_min, p.lo, p.hi);
  }

  double lo() const { return std::visit([](const auto& d) { return d.lo; }, impl_); }
  double hi() const { return std::visit([](const auto& d) { return d.hi; }, impl_); }

  double pdf(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    if (const auto* u = std::get_if<UniformDensity>(&impl_)) return 1.0 / (u->hi - u->lo);
    const auto& p = std::get<PowerLawDensity>(impl_);
    return detail::power_law_value(p.alpha, p.r_min, x) / mass_;
  }

  double cdf(double x) const {
    if (x <= lo()) return 0.0;
    if (x >= hi()) return 1.0;
    if (const auto* u = std::get_if<UniformDensity>(&impl_)) return (x - u->lo) / (u->hi - u->lo);
    const auto& p = std::get<PowerLawDensity>(impl_);
    return detail::power_law_integral(p.alpha, p.r_min, p.lo, x) / mass_;
  }

  /// Inverse-CDF sampling (bisection for the power-law variant).
  double sample(Engine& eng) const {
    const double u = uniform01(eng);
    if (const auto* d = std::get_if<UniformDensity>(&impl_)) return d->lo + u * (d->hi - d->lo);
    double a = lo();
    double b = hi();
    for (int i = 0; i < 100 && b - a > 1e-9 * (1.0 + std::abs(a)); ++i) {
      const double m = 0.5 * (a + b);
      (cdf(m) < u ? a : b) = m;
    }
    return 0.5 * (a + b);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> out{lo(), hi()};
    if (const auto* p = std::get_if<PowerLawDensity>(&impl_)) {
      out.push_back(-p->r_min);
      out.push_back(p->r_min);
    }
    return out;
  }

 private:
  static void check(double lo, double hi) {
    if (!(hi > lo)) throw InvalidParameter("density support must have hi > lo");
  }

  std::variant<UniformDensity, PowerLawDensity> impl_;
  double mass_ = 1.0;
};

/// Densities of the source and destination road coordinates.
struct SourceDestDistribution {
  Density source;
  Density dest;
};

}  // namespace chargegrid
