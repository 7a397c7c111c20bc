#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "chargegrid/error.hpp"
#include "chargegrid/mplp.hpp"
#include "chargegrid/route.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid {

/// Trip between two points that lie on lines of a realization.
struct TripSample {
  Point2 source;
  Point2 dest;
  std::uint64_t realization_seed = 0;
};

struct OpenInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double c) const { return c > lo && c < hi; }
};

/// Lazily sampled, thinned MPLP. Each axis is cut into fixed-width tiles and
/// every tile draws its lines from its own stream, so any window of the
/// process can be materialized on demand and the result does not depend on
/// the order of queries. Overridden intervals exclude tile lines and carry
/// explicitly supplied lines instead; fixed lines model roads the trip is
/// conditioned on (the source and destination roads).
class LineField {
 public:
  LineField(double lambda, ThinningSpec spec, SimWindow window, std::uint64_t seed,
            std::uint64_t stream)
      : lambda_(lambda), spec_(std::move(spec)), window_(window), seed_(seed), stream_(stream) {
    if (!(lambda > 0.0)) throw InvalidParameter("line density lambda must be positive");
    tile_ = 16.0 / lambda;
  }

  double lambda() const { return lambda_; }
  const SimWindow& window() const { return window_; }
  const ThinningSpec& spec() const { return spec_; }

  void add_line(Axis axis, LineRoad line) { axis_(axis).fixed.push_back(line); }

  void set_override(Axis axis, OpenInterval where, std::vector<LineRoad> lines) {
    auto& a = axis_(axis);
    a.overrides.push_back(where);
    for (const auto& l : lines)
      if (where.contains(l.coord)) a.fixed.push_back(l);
    a.tiles.clear();
  }

  /// All lines with coordinate in [lo, hi] (clipped to the window), sorted.
  std::vector<LineRoad> lines_in(Axis axis, double lo, double hi) {
    lo = std::max(lo, -window_.half_width);
    hi = std::min(hi, window_.half_width);
    std::vector<LineRoad> out;
    if (hi < lo) return out;
    auto& a = axis_(axis);
    const auto k0 = static_cast<std::int64_t>(std::floor(lo / tile_));
    const auto k1 = static_cast<std::int64_t>(std::floor(hi / tile_));
    for (std::int64_t k = k0; k <= k1; ++k) {
      for (const auto& l : tile(axis, k))
        if (l.coord >= lo && l.coord <= hi) out.push_back(l);
    }
    for (const auto& l : a.fixed)
      if (l.coord >= lo && l.coord <= hi) out.push_back(l);
    std::sort(out.begin(), out.end(),
              [](const LineRoad& x, const LineRoad& y) { return x.coord < y.coord; });
    return out;
  }

 private:
  struct AxisState {
    std::vector<LineRoad> fixed;
    std::vector<OpenInterval> overrides;
    std::map<std::int64_t, std::vector<LineRoad>> tiles;
  };

  AxisState& axis_(Axis axis) { return axis == Axis::vertical ? vertical_ : horizontal_; }

  const std::vector<LineRoad>& tile(Axis axis, std::int64_t k) {
    auto& a = axis_(axis);
    auto it = a.tiles.find(k);
    if (it != a.tiles.end()) return it->second;
    const double lo = std::max(static_cast<double>(k) * tile_, -window_.half_width);
    const double hi = std::min(static_cast<double>(k + 1) * tile_, window_.half_width);
    auto eng = make_stream(seed_, StreamPurpose::lines,
                           {stream_, static_cast<std::uint64_t>(axis),
                            static_cast<std::uint64_t>(k + (std::int64_t{1} << 40))});
    std::vector<LineRoad> lines;
    for (double c : sample_ppp(eng, lambda_, lo, hi)) {
      const bool charging = uniform01(eng) < eval_g_line(spec_, axis, c);
      const bool hidden = std::any_of(a.overrides.begin(), a.overrides.end(),
                                      [c](const OpenInterval& o) { return o.contains(c); });
      if (!hidden) lines.push_back({c, charging});
    }
    return a.tiles.emplace(k, std::move(lines)).first->second;
  }

  double lambda_;
  ThinningSpec spec_;
  SimWindow window_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double tile_;
  AxisState vertical_;
  AxisState horizontal_;
};

/// Graph of a line arrangement clipped to a box: intersections are vertices,
/// line pieces between neighbouring vertices are edges. Road ids are the
/// vertical line index, or vertical count + horizontal line index.
struct Arrangement {
  SearchGraph graph;
  std::uint32_t source = 0;
  std::uint32_t dest = 0;
};

namespace detail {

inline std::optional<std::size_t> find_line(const std::vector<LineRoad>& lines, double c) {
  auto it = std::lower_bound(lines.begin(), lines.end(), c,
                             [](const LineRoad& l, double v) { return l.coord < v; });
  if (it != lines.end() && it->coord == c) return static_cast<std::size_t>(it - lines.begin());
  return std::nullopt;
}

}  // namespace detail

inline Arrangement build_arrangement(const std::vector<LineRoad>& vertical,
                                     const std::vector<LineRoad>& horizontal, Point2 source,
                                     Point2 dest) {
  const std::size_t nv = vertical.size();
  const std::size_t nh = horizontal.size();
  Arrangement arr{SearchGraph(nv * nh)};
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nh; ++j)
      arr.graph.set_point(static_cast<std::uint32_t>(i * nh + j),
                          {vertical[i].coord, horizontal[j].coord});

  struct Extra {
    std::uint32_t id;
    double pos;
  };
  std::vector<std::vector<Extra>> on_vertical(nv), on_horizontal(nh);
  auto place = [&](Point2 p, const char* what) -> std::uint32_t {
    const auto vi = detail::find_line(vertical, p.x);
    const auto hj = detail::find_line(horizontal, p.y);
    if (vi && hj) return static_cast<std::uint32_t>(*vi * nh + *hj);
    if (!vi && !hj) throw InvalidParameter(std::string(what) + " point is not on any line");
    for (const auto& e : vi ? on_vertical[*vi] : on_horizontal[*hj])
      if (e.pos == (vi ? p.y : p.x)) return e.id;
    const auto id = arr.graph.add_vertex(p);
    if (vi) on_vertical[*vi].push_back({id, p.y});
    else on_horizontal[*hj].push_back({id, p.x});
    return id;
  };
  arr.source = place(source, "source");
  arr.dest = place(dest, "destination");

  std::vector<Extra> stops;
  auto connect = [&](std::int64_t road, bool charging, bool vertical_line) {
    std::sort(stops.begin(), stops.end(),
              [](const Extra& a, const Extra& b) { return a.pos < b.pos; });
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
      const double len = stops[k + 1].pos - stops[k].pos;
      if (len > 0.0) arr.graph.add_edge(stops[k].id, stops[k + 1].id, len, charging, road);
    }
    (void)vertical_line;
  };
  for (std::size_t i = 0; i < nv; ++i) {
    stops.clear();
    for (std::size_t j = 0; j < nh; ++j)
      stops.push_back({static_cast<std::uint32_t>(i * nh + j), horizontal[j].coord});
    for (const auto& e : on_vertical[i]) stops.push_back(e);
    connect(static_cast<std::int64_t>(i), vertical[i].charging, true);
  }
  for (std::size_t j = 0; j < nh; ++j) {
    stops.clear();
    for (std::size_t i = 0; i < nv; ++i)
      stops.push_back({static_cast<std::uint32_t>(i * nh + j), vertical[i].coord});
    for (const auto& e : on_horizontal[j]) stops.push_back(e);
    connect(static_cast<std::int64_t>(nv + j), horizontal[j].charging, false);
  }
  arr.graph.build();
  return arr;
}

/// Result of routing on a line arrangement, with the axis of each segment.
struct ArrangementRoute {
  RouteResult route;
  std::vector<Axis> segment_axes;
};

/// Routes between two points of a line process supplied by `lines_in(axis,
/// lo, hi)`. The search box starts as the trip's bounding box plus a margin
/// and doubles until the best route is provably shorter than any route that
/// could leave the box (Manhattan length + 2 * margin), or the box covers the
/// whole window.
template <class LinesIn>
ArrangementRoute route_on_lines(LinesIn&& lines_in, const SimWindow& window, double lambda,
                                Point2 source, Point2 dest,
                                std::optional<ChargingModel> charging = std::nullopt) {
  const double manhattan = std::abs(source.x - dest.x) + std::abs(source.y - dest.y);
  double margin = std::max(5.0 / lambda, 1e-6);
  const double W = window.half_width;
  for (;;) {
    const double x0 = std::max(std::min(source.x, dest.x) - margin, -W);
    const double x1 = std::min(std::max(source.x, dest.x) + margin, W);
    const double y0 = std::max(std::min(source.y, dest.y) - margin, -W);
    const double y1 = std::min(std::max(source.y, dest.y) + margin, W);
    const bool whole = x0 <= -W && x1 >= W && y0 <= -W && y1 >= W;
    const auto vertical = lines_in(Axis::vertical, x0, x1);
    const auto horizontal = lines_in(Axis::horizontal, y0, y1);
    const auto arr = build_arrangement(vertical, horizontal, source, dest);
    const auto path = lexicographic_shortest_path(arr.graph, arr.source, arr.dest);
    const double cutoff = manhattan + 2.0 * margin;
    if (path && (whole || path->shortest_length < cutoff * (1.0 - 1e-12))) {
      ArrangementRoute out;
      out.route = summarize_route(arr.graph, *path, charging);
      for (const auto& seg : out.route.segments)
        out.segment_axes.push_back(static_cast<std::size_t>(seg.road) < vertical.size()
                                       ? Axis::vertical
                                       : Axis::horizontal);
      return out;
    }
    if (whole) throw RoutingFailure("source and destination are disconnected in the window");
    margin *= 2.0;
  }
}

/// Lexicographic shortest route (length, then charged length) on a sampled city.
inline RouteResult route_on_realization(const CityRealization& city, const TripSample& trip,
                                        std::optional<ChargingModel> charging = std::nullopt) {
  auto lines_in = [&city](Axis axis, double lo, double hi) {
    std::vector<LineRoad> out;
    for (const auto& l : city.lines(axis))
      if (l.coord >= lo && l.coord <= hi) out.push_back(l);
    return out;
  };
  auto on_line = [&](Point2 p) {
    return detail::find_line(city.vertical_lines, p.x) ||
           detail::find_line(city.horizontal_lines, p.y);
  };
  if (!on_line(trip.source) || !on_line(trip.dest))
    throw InvalidParameter("trip endpoints must lie on lines of the realization");
  return route_on_lines(lines_in, city.window, city.lambda, trip.source, trip.dest, charging).route;
}

}  // namespace chargegrid
