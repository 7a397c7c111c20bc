#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "chargegrid/geometry.hpp"

namespace chargegrid {

struct RouteSegment {
  std::int64_t road = -1;  // line or road-group identifier
  Point2 from;
  Point2 to;
  double length = 0.0;
  bool charging = false;
};

/// A routed trip and its charging metrics. d_n is empty (censored) when the
/// route never touches a charging road; rho_c is a percentage.
struct RouteResult {
  std::vector<RouteSegment> segments;
  double total_length = 0.0;
  double charged_length = 0.0;
  std::optional<double> d_n;
  double rho_c = 0.0;
  std::optional<double> e_c;
};

/// Constant-speed, constant-power charging: energy = power * time on charging roads.
struct ChargingModel {
  double power_kw = 20.0;
  double speed_kmh = 20.0;

  double energy_kwh(double charged_m) const { return power_kw * (charged_m / 1000.0) / speed_kmh; }
};

/// Undirected weighted graph in compressed adjacency form for route search.
class SearchGraph {
 public:
  struct Arc {
    std::uint32_t to;
    double length;
    bool charging;
    std::int64_t road;
  };

  explicit SearchGraph(std::size_t vertices = 0) : points_(vertices) {}

  std::uint32_t add_vertex(Point2 p) {
    points_.push_back(p);
    return static_cast<std::uint32_t>(points_.size() - 1);
  }
  void set_point(std::uint32_t v, Point2 p) { points_[v] = p; }
  const Point2& point(std::uint32_t v) const { return points_[v]; }
  std::size_t vertex_count() const { return points_.size(); }

  void add_edge(std::uint32_t u, std::uint32_t v, double length, bool charging,
                std::int64_t road) {
    edges_.push_back({u, v, length, charging, road});
    built_ = false;
  }

  void build() {
    offsets_.assign(points_.size() + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    arcs_.resize(offsets_.back());
    auto cursor = offsets_;
    for (const auto& e : edges_) {
      arcs_[cursor[e.u]++] = {e.v, e.length, e.charging, e.road};
      arcs_[cursor[e.v]++] = {e.u, e.length, e.charging, e.road};
    }
    built_ = true;
  }

  template <class Fn>
  void for_each_arc(std::uint32_t u, Fn&& fn) const {
    for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) fn(arcs_[i]);
  }

  bool built() const { return built_; }

 private:
  struct EdgeRec {
    std::uint32_t u, v;
    double length;
    bool charging;
    std::int64_t road;
  };
  std::vector<Point2> points_;
  std::vector<EdgeRec> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
  bool built_ = false;
};

struct PathStep {
  std::uint32_t from;
  std::uint32_t to;
  double length;
  bool charging;
  std::int64_t road;
};

struct LexPath {
  std::vector<PathStep> steps;
  double shortest_length = 0.0;  // stage-one Dijkstra distance
};

namespace detail {

inline std::vector<double> dijkstra(const SearchGraph& g, std::uint32_t src, double bound) {
  std::vector<double> dist(g.vertex_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    if (du > bound) break;
    g.for_each_arc(u, [&](const SearchGraph::Arc& a) {
      const double nd = du + a.length;
      if (nd < dist[a.to]) {
        dist[a.to] = nd;
        pq.push({nd, a.to});
      }
    });
  }
  return dist;
}

}  // namespace detail

/// Lexicographic route search: minimum length first, then maximum length on
/// charging edges among all shortest paths. Stage one runs Dijkstra from both
/// ends; stage two maximizes charged length by dynamic programming over the
/// DAG of edges that lie on some shortest path. Returns nullopt when dst is
/// unreachable.
inline std::optional<LexPath> lexicographic_shortest_path(const SearchGraph& g, std::uint32_t src,
                                                          std::uint32_t dst,
                                                          double rel_tol = 1e-9) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto from_src = detail::dijkstra(g, src, inf);
  const double best = from_src[dst];
  if (best == inf) return std::nullopt;
  LexPath out;
  out.shortest_length = best;
  if (src == dst) return out;
  const double eps = rel_tol * std::max(1.0, best);
  const auto to_dst = detail::dijkstra(g, dst, best + eps);

  std::vector<std::uint32_t> order;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
    if (from_src[v] + to_dst[v] <= best + eps) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return from_src[a] < from_src[b] || (from_src[a] == from_src[b] && a < b);
  });

  std::vector<double> charged(g.vertex_count(), -inf);
  std::vector<PathStep> pred(g.vertex_count());
  charged[src] = 0.0;
  for (std::uint32_t u : order) {
    if (charged[u] == -inf) continue;
    g.for_each_arc(u, [&](const SearchGraph::Arc& a) {
      const std::uint32_t v = a.to;
      if (!(from_src[v] > from_src[u])) return;
      if (from_src[u] + a.length + to_dst[v] > best + eps) return;
      const double c = charged[u] + (a.charging ? a.length : 0.0);
      if (c > charged[v] + eps) {
        charged[v] = c;
        pred[v] = {u, v, a.length, a.charging, a.road};
      }
    });
  }
  if (charged[dst] == -inf) return std::nullopt;
  for (std::uint32_t v = dst; v != src; v = pred[v].from) out.steps.push_back(pred[v]);
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

/// Collapses a vertex path into per-road segments and derives the metrics.
inline RouteResult summarize_route(const SearchGraph& g, const LexPath& path,
                                   std::optional<ChargingModel> charging = std::nullopt) {
  RouteResult r;
  for (const auto& st : path.steps) {
    if (!r.segments.empty() && r.segments.back().road == st.road &&
        r.segments.back().charging == st.charging) {
      r.segments.back().to = g.point(st.to);
      r.segments.back().length += st.length;
    } else {
      r.segments.push_back({st.road, g.point(st.from), g.point(st.to), st.length, st.charging});
    }
  }
  double travelled = 0.0;
  for (const auto& s : r.segments) {
    if (s.charging) {
      r.charged_length += s.length;
      if (!r.d_n) r.d_n = travelled;
    }
    travelled += s.length;
  }
  r.total_length = travelled;
  r.rho_c = r.total_length > 0.0 ? std::min(100.0, 100.0 * r.charged_length / r.total_length) : 0.0;
  if (charging) r.e_c = charging->energy_kwh(r.charged_length);
  return r;
}

}  // namespace chargegrid
