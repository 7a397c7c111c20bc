#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/geometry.hpp"
#include "chargegrid/rng.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid {

/// Square sampling window [-half_width, half_width]^2 centered on the city center.
struct SimWindow {
  double half_width = 0.0;

  explicit SimWindow(double hw = 1.0) : half_width(hw) {
    if (!(hw > 0.0)) throw InvalidParameter("window half-width must be positive");
  }
  double width() const { return 2.0 * half_width; }
  bool contains(double coord) const { return coord >= -half_width && coord <= half_width; }
};

struct LineRoad {
  double coord = 0.0;
  bool charging = false;

  friend bool operator==(const LineRoad&, const LineRoad&) = default;
};

/// One Manhattan Poisson line process sample. Vertical lines are located by
/// their x offset from the center, horizontal lines by their y offset. Both
/// lists are sorted by coordinate.
struct CityRealization {
  std::vector<LineRoad> vertical_lines;
  std::vector<LineRoad> horizontal_lines;
  double lambda = 0.0;
  SimWindow window;

  const std::vector<LineRoad>& lines(Axis axis) const {
    return axis == Axis::vertical ? vertical_lines : horizontal_lines;
  }
  std::vector<LineRoad>& lines(Axis axis) {
    return axis == Axis::vertical ? vertical_lines : horizontal_lines;
  }
  std::size_t charging_count() const {
    return std::count_if(vertical_lines.begin(), vertical_lines.end(),
                         [](const LineRoad& l) { return l.charging; }) +
           std::count_if(horizontal_lines.begin(), horizontal_lines.end(),
                         [](const LineRoad& l) { return l.charging; });
  }

  friend bool operator==(const CityRealization& a, const CityRealization& b) {
    return a.vertical_lines == b.vertical_lines && a.horizontal_lines == b.horizontal_lines &&
           a.lambda == b.lambda && a.window.half_width == b.window.half_width;
  }
};

/// Points of a homogeneous PPP with intensity lambda on [lo, hi], sorted.
inline std::vector<double> sample_ppp(Engine& eng, double lambda, double lo, double hi) {
  std::vector<double> pts;
  if (!(hi > lo) || lambda <= 0.0) return pts;
  std::poisson_distribution<std::int64_t> count(lambda * (hi - lo));
  const auto n = count(eng);
  pts.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) pts.push_back(lo + (hi - lo) * uniform01(eng));
  std::sort(pts.begin(), pts.end());
  return pts;
}

/// Homogeneous MPLP on the window; every line starts non-charging.
inline CityRealization sample_mplp(double lambda, const SimWindow& window, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw InvalidParameter("line density lambda must be positive");
  CityRealization city{{}, {}, lambda, window};
  for (Axis axis : {Axis::vertical, Axis::horizontal}) {
    auto eng = make_stream(seed, StreamPurpose::lines, {static_cast<std::uint64_t>(axis)});
    for (double c : sample_ppp(eng, lambda, -window.half_width, window.half_width))
      city.lines(axis).push_back({c, false});
  }
  return city;
}

/// Marks each line charging independently with probability g of its offset.
inline CityRealization thin(CityRealization city, const ThinningSpec& spec, std::uint64_t seed) {
  validate(spec);
  for (Axis axis : {Axis::vertical, Axis::horizontal}) {
    auto eng = make_stream(seed, StreamPurpose::thinning, {static_cast<std::uint64_t>(axis)});
    for (auto& line : city.lines(axis))
      line.charging = uniform01(eng) < eval_g_line(spec, axis, line.coord);
  }
  return city;
}

/// CSV export: header "axis,coord_m,charging".
inline void write_city_csv(std::ostream& os, const CityRealization& city) {
  os << "axis,coord_m,charging\n";
  os.precision(17);
  for (Axis axis : {Axis::vertical, Axis::horizontal}) {
    const char* name = axis == Axis::vertical ? "vertical" : "horizontal";
    for (const auto& l : city.lines(axis))
      os << name << ',' << l.coord << ',' << (l.charging ? 1 : 0) << '\n';
  }
}

}  // namespace chargegrid
