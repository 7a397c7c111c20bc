#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "chargegrid/csv.hpp"
#include "chargegrid/error.hpp"
#include "chargegrid/geometry.hpp"

namespace chargegrid {

struct ZoneStats {
  std::int64_t zone_id = 0;
  Point2 centroid;
  double count = 0.0;
  double distance_to_center = 0.0;
};

struct PowerLawFit {
  double alpha_hat = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double ci_lo = 0.0;  // 95% interval for alpha_hat
  double ci_hi = 0.0;
  std::size_t n_points = 0;
};

/// Least squares of ln(count) on ln(distance) over zones farther than
/// r_min with positive counts; alpha_hat is minus the slope.
inline PowerLawFit fit_power_law(const std::vector<ZoneStats>& zones, double r_min,
                                 const std::set<std::int64_t>& exclude = {}) {
  std::vector<double> xs, ys;
  for (const auto& z : zones) {
    if (z.count < 0.0 || z.distance_to_center < 0.0)
      throw InvalidParameter("zone counts and distances must be non-negative");
    if (z.distance_to_center > r_min && z.count > 0.0 && !exclude.contains(z.zone_id)) {
      xs.push_back(std::log(z.distance_to_center));
      ys.push_back(std::log(z.count));
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) throw FitFailure("power-law fit needs at least 3 zones beyond r_min with positive counts");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw FitFailure("power-law fit needs distinct zone distances");
  const double slope = sxy / sxx;
  PowerLawFit fit;
  fit.n_points = n;
  fit.alpha_hat = -slope;
  fit.intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + slope * xs[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t t(static_cast<double>(n - 2));
  const double half = boost::math::quantile(boost::math::complement(t, 0.025)) * se;
  fit.ci_lo = fit.alpha_hat - half;
  fit.ci_hi = fit.alpha_hat + half;
  return fit;
}

/// Fills distance_to_center for every zone.
inline void set_zone_distances(std::vector<ZoneStats>& zones, Point2 center) {
  for (auto& z : zones) z.distance_to_center = distance(z.centroid, center);
}

/// Half the distance from the busiest zone to its nearest neighbouring zone,
/// a stand-in for the busiest zone's boundary radius.
inline double default_fit_r_min(const std::vector<ZoneStats>& zones) {
  if (zones.size() < 2) throw InvalidParameter("need at least two zones for a default r_min");
  std::size_t best = 0;
  for (std::size_t i = 1; i < zones.size(); ++i)
    if (zones[i].count > zones[best].count ||
        (zones[i].count == zones[best].count && zones[i].zone_id < zones[best].zone_id))
      best = i;
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < zones.size(); ++i)
    if (i != best) nearest = std::min(nearest, distance(zones[i].centroid, zones[best].centroid));
  return 0.5 * nearest;
}

/// Zone CSV with header zone_id,centroid_x,centroid_y,count.
inline std::vector<ZoneStats> read_zones_csv(const std::string& path) {
  const auto table = read_csv(path, {"zone_id", "centroid_x", "centroid_y", "count"});
  std::vector<ZoneStats> zones;
  std::set<std::int64_t> seen;
  for (const auto& row : table.rows) {
    ZoneStats z;
    z.zone_id = row.as_int("zone_id");
    z.centroid = {row.as_double("centroid_x"), row.as_double("centroid_y")};
    z.count = row.as_double("count");
    if (z.count < 0.0) throw IngestionError(row.where() + ": negative count");
    if (!seen.insert(z.zone_id).second)
      throw IngestionError(row.where() + ": duplicate zone id " + std::to_string(z.zone_id));
    zones.push_back(z);
  }
  return zones;
}

inline constexpr int dbscan_noise = -1;

struct DbscanResult {
  std::vector<int> labels;  // cluster id or dbscan_noise
  std::vector<bool> core;
  int cluster_count = 0;
};

/// Uniform grid of cell size `cell` for fixed-radius neighbour queries.
class GridIndex {
 public:
  GridIndex(const std::vector<Point2>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(cell_of(pts[i].x), cell_of(pts[i].y))].push_back(i);
  }

  /// Indices within distance r (r <= cell) of p, ascending.
  std::vector<std::size_t> within(Point2 p, double r) const {
    std::vector<std::size_t> out;
    const auto cx = cell_of(p.x);
    const auto cy = cell_of(p.y);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t j : it->second)
          if (distance(pts_[j], p) <= r) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
  using Cell = std::pair<std::int64_t, std::int64_t>;
  struct CellHash {
    std::size_t operator()(const Cell& c) const {
      return static_cast<std::size_t>((static_cast<std::uint64_t>(c.first) * 0x9E3779B97F4A7C15ull) ^
                                      static_cast<std::uint64_t>(c.second));
    }
  };
  static Cell key(std::int64_t x, std::int64_t y) { return {x, y}; }

  const std::vector<Point2>& pts_;
  double cell_;
  std::unordered_map<Cell, std::vector<std::size_t>, CellHash> cells_;
};

/// DBSCAN with closed eps-balls that include the point itself. Clusters are
/// numbered in order of their lowest-index core point; a border point joins
/// the lowest-numbered cluster among its core neighbours.
inline DbscanResult dbscan(const std::vector<Point2>& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw InvalidParameter("dbscan eps must be positive");
  if (min_pts < 1) throw InvalidParameter("dbscan min_pts must be at least 1");
  const std::size_t n = points.size();
  DbscanResult r;
  r.labels.assign(n, dbscan_noise);
  r.core.assign(n, false);
  const GridIndex index(points, eps);
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    nbrs[i] = index.within(points[i], eps);
    r.core[i] = nbrs[i].size() >= min_pts;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.core[i] || r.labels[i] != dbscan_noise) continue;
    const int c = r.cluster_count++;
    std::vector<std::size_t> stack{i};
    r.labels[i] = c;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : nbrs[u]) {
        if (r.labels[v] != dbscan_noise) continue;
        r.labels[v] = c;
        if (r.core[v]) stack.push_back(v);
      }
    }
  }
  return r;
}

struct ClusterCenters {
  std::vector<Point2> centers;
  std::optional<std::string> warning;
};

/// Centroids of the k largest clusters; count ties go to the smaller
/// centroid norm, then the lower cluster id.
inline ClusterCenters top_k_cluster_centers(const std::vector<Point2>& points,
                                            const DbscanResult& clusters, std::size_t k) {
  ClusterCenters out;
  if (clusters.cluster_count == 0) {
    out.warning = "no clusters found";
    return out;
  }
  struct Acc {
    int id;
    std::size_t count = 0;
    Point2 sum;
  };
  std::vector<Acc> acc(clusters.cluster_count);
  for (int c = 0; c < clusters.cluster_count; ++c) acc[c].id = c;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = clusters.labels[i];
    if (c == dbscan_noise) continue;
    ++acc[c].count;
    acc[c].sum.x += points[i].x;
    acc[c].sum.y += points[i].y;
  }
  std::vector<std::pair<Acc, Point2>> ranked;
  for (const auto& a : acc)
    ranked.push_back({a, {a.sum.x / a.count, a.sum.y / a.count}});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first.count != b.first.count) return a.first.count > b.first.count;
    const double na = norm(a.second), nb = norm(b.second);
    if (na != nb) return na < nb;
    return a.first.id < b.first.id;
  });
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.centers.push_back(ranked[i].second);
  return out;
}

}  // namespace chargegrid
