#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/quadrature.hpp"
#include "chargegrid/source_dest.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid::analytic {

enum class RoadClass { charging, non_charging };

enum class Metric { d_n, rho_c };

/// Intensity integral of the chosen road class over the segment of length x
/// that starts at the source and points toward the destination along `axis`.
inline double segment_mass(const ThinningSpec& spec, const SourceDestPair& sd, Axis axis,
                           RoadClass cls, double x) {
  const double a0 = sd.start(axis);
  const double lo = sd.direction(axis) > 0 ? a0 : a0 - x;
  const double hi = sd.direction(axis) > 0 ? a0 + x : a0;
  return cls == RoadClass::charging ? integral_g(spec, lo, hi, axis)
                                    : integral_one_minus_g(spec, lo, hi, axis);
}

inline double class_probability(const ThinningSpec& spec, Axis axis, double coord,
                                RoadClass cls) {
  const double g = eval_g_line(spec, axis, coord);
  return cls == RoadClass::charging ? g : 1.0 - g;
}

/// CDF of the distance from the source to the nearest road of class `cls`
/// running across `axis` (vertical roads are crossed while moving in x).
inline double nearest_road_cdf(const ThinningSpec& spec, double lambda, const SourceDestPair& sd,
                               Axis axis, RoadClass cls, double x) {
  if (x < 0.0) throw InvalidParameter("distance x must be non-negative");
  if (x == 0.0) return 0.0;
  return -std::expm1(-lambda * segment_mass(spec, sd, axis, cls, x));
}

inline double nearest_road_pdf(const ThinningSpec& spec, double lambda, const SourceDestPair& sd,
                               Axis axis, RoadClass cls, double x) {
  if (x < 0.0) throw InvalidParameter("distance x must be non-negative");
  const double at = sd.start(axis) + sd.direction(axis) * x;
  return lambda * class_probability(spec, axis, at, cls) *
         std::exp(-lambda * segment_mass(spec, sd, axis, cls, x));
}

inline double cdf_nearest_charging_given_sd(const ThinningSpec& spec, double lambda,
                                            const SourceDestPair& sd, Axis axis, double x) {
  return nearest_road_cdf(spec, lambda, sd, axis, RoadClass::charging, x);
}
inline double pdf_nearest_charging_given_sd(const ThinningSpec& spec, double lambda,
                                            const SourceDestPair& sd, Axis axis, double x) {
  return nearest_road_pdf(spec, lambda, sd, axis, RoadClass::charging, x);
}
inline double cdf_nearest_noncharging_given_sd(const ThinningSpec& spec, double lambda,
                                               const SourceDestPair& sd, Axis axis, double x) {
  return nearest_road_cdf(spec, lambda, sd, axis, RoadClass::non_charging, x);
}
inline double pdf_nearest_noncharging_given_sd(const ThinningSpec& spec, double lambda,
                                               const SourceDestPair& sd, Axis axis, double x) {
  return nearest_road_pdf(spec, lambda, sd, axis, RoadClass::non_charging, x);
}

namespace detail {

// Kinks of the road profile expressed as distances from the source along
// `axis`, clipped to [0, limit].
inline std::vector<double> distance_breakpoints(const ThinningSpec& spec, const SourceDestPair& sd,
                                                Axis axis, double limit) {
  std::vector<double> out;
  for (double c : profile_breakpoints(spec, axis)) {
    const double t = (c - sd.start(axis)) * sd.direction(axis);
    if (t > 0.0 && t < limit) out.push_back(t);
  }
  return out;
}

}  // namespace detail

/// Unconditional CDF of the nearest-road distance along `axis` when the
/// source and destination road coordinates are drawn from `dist`. The trip
/// direction is toward the destination, so the outer integral over s weighs
/// both half-planes d > s and d < s; the inner integral over d is evaluated
/// by quadrature as well.
inline double nearest_road_cdf_unconditional(const ThinningSpec& spec, double lambda,
                                             const SourceDestDistribution& dist, RoadClass cls,
                                             double x, Axis axis = Axis::vertical) {
  if (x < 0.0) throw InvalidParameter("distance x must be non-negative");
  if (x == 0.0) return 0.0;
  const auto dest_bps = dist.dest.breakpoints();
  quad::Options inner_opt{.abs_tol = 1e-10, .rel_tol = 1e-12};
  auto mass_below = [&](double s) {
    const double lo = dist.dest.lo();
    const double hi = std::clamp(s, lo, dist.dest.hi());
    if (hi <= lo) return 0.0;
    return quad::integral([&](double d) { return dist.dest.pdf(d); }, lo, hi, dest_bps, inner_opt);
  };
  auto survival = [&](double lo, double hi) {
    const double m = cls == RoadClass::charging ? integral_g(spec, lo, hi, axis)
                                                : integral_one_minus_g(spec, lo, hi, axis);
    return std::exp(-lambda * m);
  };
  auto integrand = [&](double s) {
    const double fs = dist.source.pdf(s);
    if (fs == 0.0) return 0.0;
    const double below = mass_below(s);
    return fs * ((1.0 - below) * survival(s, s + x) + below * survival(s - x, s));
  };
  std::vector<double> bps = dist.source.breakpoints();
  for (double b : dest_bps) bps.push_back(b);
  for (double b : profile_breakpoints(spec, axis)) {
    bps.push_back(b);
    bps.push_back(b - x);
    bps.push_back(b + x);
  }
  const double tail = quad::integral(integrand, dist.source.lo(), dist.source.hi(), bps,
                                     {.abs_tol = 1e-7, .rel_tol = 0.0});
  return std::clamp(1.0 - tail, 0.0, 1.0);
}

inline double cdf_nearest_charging_unconditional(const ThinningSpec& spec, double lambda,
                                                 const SourceDestDistribution& dist, double x) {
  return nearest_road_cdf_unconditional(spec, lambda, dist, RoadClass::charging, x);
}

/// CDF of the gap between the nearest non-charging road and the next
/// charging road across `axis`, given that both occur within the trip's
/// separation along that axis (non-charging first). Vertical axis gives X1
/// over d_h, horizontal axis gives X2 over d_v.
inline double cdf_gap_X(const ThinningSpec& spec, double lambda, const SourceDestPair& sd,
                        Axis axis, double x) {
  if (x < 0.0) throw InvalidParameter("gap x must be non-negative");
  const double sep = sd.separation(axis);
  if (!(sep > 0.0)) throw InvalidParameter("gap distribution needs a positive separation");
  auto F_nc = [&](double t) {
    return t <= 0.0 ? 0.0 : nearest_road_cdf(spec, lambda, sd, axis, RoadClass::non_charging, t);
  };
  auto f_c = [&](double t) {
    return nearest_road_pdf(spec, lambda, sd, axis, RoadClass::charging, t);
  };
  auto bps = detail::distance_breakpoints(spec, sd, axis, sep);
  const quad::Options opt{.abs_tol = 1e-12, .rel_tol = 1e-10};
  const double den = quad::integral([&](double t) { return F_nc(t) * f_c(t); }, 0.0, sep, bps, opt);
  if (!(den > 0.0))
    throw ConditioningDegenerate("gap distribution: conditioning event has probability zero");
  if (x == 0.0) return 0.0;
  if (x >= sep) return 1.0;
  const auto nb = bps.size();
  for (std::size_t i = 0; i < nb; ++i) bps.push_back(bps[i] + x);
  bps.push_back(x);
  const double num = quad::integral([&](double t) { return (F_nc(t) - F_nc(t - x)) * f_c(t); },
                                    0.0, sep, bps, opt);
  return std::clamp(num / den, 0.0, 1.0);
}

/// Component probabilities of the parallel event tree where only the
/// destination road charges.
struct T3Components {
  double t3 = 0.0;     // source non-charging, destination charging
  double t3_1_1 = 0.0; // no crossing road on the way
  double t3_1_2 = 0.0; // exactly one crossing road, non-charging
  double t3_1_3 = 0.0; // at least two crossing roads, all non-charging
  double t3_1_4 = 0.0; // at least one charging crossing road
  double t3_2_3 = 0.0; // no charging vertical road between the trip roads
  double t3_3_1 = 0.0; // nearest crossing road is non-charging
  double t3_4_1 = 0.0; // the driver turns onto the nearest charging crossing road
};

inline constexpr std::size_t t3_leaf_count = 10;

/// Leaf probabilities P(L_{3,i} | S, D), i = 1..10 (index 0..9). The split
/// between leaves 8 and 9 (which charging road the driver picks when both
/// kinds are available) has no closed form: index 7 carries their combined
/// mass and index 8 is reported as zero.
using T3Leaves = std::array<double, t3_leaf_count>;

namespace detail {

inline void require_parallel(const SourceDestPair& sd) {
  if (sd.orientation != Orientation::parallel)
    throw InvalidParameter("event tree T3 needs parallel source and destination roads");
}

// P(D_NC < D_C < sep) / P(D_C < sep) along the crossing axis, the chance that
// the nearest crossing road is non-charging given that a charging one exists.
inline double nearest_crossing_noncharging(const ThinningSpec& spec, double lambda,
                                           const SourceDestPair& sd) {
  const Axis axis = Axis::horizontal;
  const double sep = sd.d_v;
  const double fc_sep = nearest_road_cdf(spec, lambda, sd, axis, RoadClass::charging, sep);
  if (!(fc_sep > 0.0)) return 0.0;
  const auto bps = distance_breakpoints(spec, sd, axis, sep);
  const double num = quad::integral(
      [&](double a) {
        return nearest_road_cdf(spec, lambda, sd, axis, RoadClass::non_charging, a) *
               nearest_road_pdf(spec, lambda, sd, axis, RoadClass::charging, a);
      },
      0.0, sep, bps, {.abs_tol = 1e-12, .rel_tol = 1e-10});
  return std::clamp(num / fc_sep, 0.0, 1.0);
}

}  // namespace detail

inline T3Components event_probs_T3(const ThinningSpec& spec, double lambda,
                                   const SourceDestPair& sd) {
  detail::require_parallel(sd);
  validate(spec);
  T3Components c;
  c.t3 = (1.0 - eval_g_line(spec, Axis::vertical, sd.s)) * eval_g_line(spec, Axis::vertical, sd.d);

  const double cross_c = lambda * segment_mass(spec, sd, Axis::horizontal, RoadClass::charging, sd.d_v);
  const double cross_n =
      lambda * segment_mass(spec, sd, Axis::horizontal, RoadClass::non_charging, sd.d_v);
  c.t3_1_1 = std::exp(-cross_c - cross_n);
  c.t3_1_2 = cross_n * std::exp(-cross_n - cross_c);
  c.t3_1_3 = std::exp(-cross_c) * (1.0 - std::exp(-cross_n) * (1.0 + cross_n));
  c.t3_1_4 = -std::expm1(-cross_c);

  c.t3_2_3 = std::exp(-lambda * segment_mass(spec, sd, Axis::vertical, RoadClass::charging, sd.d_h));
  c.t3_3_1 = detail::nearest_crossing_noncharging(spec, lambda, sd);
  c.t3_4_1 = 0.0;
  if (c.t3_3_1 > 0.0) {
    c.t3_4_1 = sd.d_h >= sd.d_v ? 1.0 : cdf_gap_X(spec, lambda, sd, Axis::horizontal, sd.d_h);
  }
  return c;
}

inline T3Leaves t3_leaf_probabilities(const ThinningSpec& spec, double lambda,
                                      const SourceDestPair& sd) {
  const auto c = event_probs_T3(spec, lambda, sd);
  const double no_vc = c.t3_2_3;
  const double some_vc = 1.0 - no_vc;
  T3Leaves l{};
  l[0] = c.t3 * c.t3_1_1;
  l[1] = c.t3 * c.t3_1_2;
  l[2] = c.t3 * c.t3_1_3 * no_vc;
  l[3] = c.t3 * c.t3_1_3 * some_vc;
  l[4] = c.t3 * c.t3_1_4 * no_vc * c.t3_3_1 * c.t3_4_1;
  l[5] = c.t3 * c.t3_1_4 * no_vc * c.t3_3_1 * (1.0 - c.t3_4_1);
  l[6] = c.t3 * c.t3_1_4 * no_vc * (1.0 - c.t3_3_1);
  l[7] = c.t3 * c.t3_1_4 * some_vc * c.t3_3_1;
  l[8] = 0.0;
  l[9] = c.t3 * c.t3_1_4 * some_vc * (1.0 - c.t3_3_1);
  return l;
}

/// Probabilities of the eight charging-status events for the pair's
/// orientation; the four events of the other orientation get zero.
inline std::array<double, 8> event_probabilities(const ThinningSpec& spec,
                                                 const SourceDestPair& sd) {
  const double gs = eval_g_line(spec, Axis::vertical, sd.s);
  const double gd = eval_g_line(spec, sd.dest_axis(), sd.d);
  const std::array<double, 4> four = {gs * gd, gs * (1.0 - gd), (1.0 - gs) * gd,
                                      (1.0 - gs) * (1.0 - gd)};
  std::array<double, 8> out{};
  const std::size_t off = sd.orientation == Orientation::parallel ? 0 : 4;
  for (std::size_t i = 0; i < 4; ++i) out[off + i] = four[i];
  return out;
}

/// Converts a charged-trip percentage into charged distance for a minimal
/// route of length d_h + d_v.
inline double rho_c_percent_to_distance(const SourceDestPair& sd, double percent) {
  return percent / 100.0 * (sd.d_h + sd.d_v);
}

/// CDF of D_n (x in meters) or of the charged distance (x in meters of the
/// route, see rho_c_percent_to_distance) conditioned on leaf L_{3,5}: the
/// driver leaves the non-charging source road at the nearest charging
/// crossing road, rides it across d_h and finishes on the charging
/// destination road.
inline double leaf_L35_metric_cdf(const ThinningSpec& spec, double lambda,
                                  const SourceDestPair& sd, Metric metric, double x) {
  detail::require_parallel(sd);
  const Axis axis = Axis::horizontal;
  const double dh = sd.d_h;
  const double dv = sd.d_v;
  if (!(dv > 0.0)) throw ConditioningDegenerate("leaf L3,5 needs d_v > 0");
  auto F_c = [&](double t) {
    return t <= 0.0 ? 0.0 : nearest_road_cdf(spec, lambda, sd, axis, RoadClass::charging, t);
  };
  auto f_nc = [&](double t) {
    return nearest_road_pdf(spec, lambda, sd, axis, RoadClass::non_charging, t);
  };
  auto bps = detail::distance_breakpoints(spec, sd, axis, dv);
  const auto nb = bps.size();
  for (std::size_t i = 0; i < nb; ++i) bps.push_back(bps[i] - dh);
  bps.push_back(dv - dh);
  const quad::Options opt{.abs_tol = 1e-12, .rel_tol = 1e-10};
  const double den = quad::integral(
      [&](double t) { return (F_c(std::min(t + dh, dv)) - F_c(t)) * f_nc(t); }, 0.0, dv, bps, opt);
  if (!(den > 0.0)) throw ConditioningDegenerate("leaf L3,5 has probability zero");

  if (metric == Metric::d_n) {
    if (x <= 0.0) return 0.0;
    if (x >= dv) return 1.0;
    bps.push_back(x - dh);
    const double num = quad::integral(
        [&](double t) { return (F_c(std::min(t + dh, x)) - F_c(t)) * f_nc(t); }, 0.0, x, bps, opt);
    return std::clamp(num / den, 0.0, 1.0);
  }
  if (x <= dh) return 0.0;
  if (x >= dh + dv) return 1.0;
  const double lower = dh + dv - x;
  bps.push_back(lower);
  bps.push_back(lower - dh);
  const double num = quad::integral(
      [&](double t) {
        return std::max(0.0, F_c(std::min(dv, t + dh)) - F_c(std::max(lower, t))) * f_nc(t);
      },
      0.0, dv, bps, opt);
  return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace chargegrid::analytic
