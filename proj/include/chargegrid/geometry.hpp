#pragma once

#include <cmath>

namespace chargegrid {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

/// Orientation of a road in an axis-parallel network. Vertical roads are
/// located by their x coordinate, horizontal roads by their y coordinate.
enum class Axis { vertical, horizontal };

inline double coordinate_of(Point2 p, Axis axis) { return axis == Axis::vertical ? p.x : p.y; }

}  // namespace chargegrid
