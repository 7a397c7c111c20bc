#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

#include "chargegrid/calibration.hpp"
#include "chargegrid/csv.hpp"
#include "chargegrid/error.hpp"
#include "chargegrid/mplp.hpp"
#include "chargegrid/rng.hpp"
#include "chargegrid/route.hpp"
#include "chargegrid/thinning.hpp"
#include "chargegrid/traffic_stats.hpp"

namespace chargegrid {

struct GraphNode {
  std::string id;
  Point2 p;
  std::string zone;  // empty when the input has no zones
};

struct GraphEdge {
  std::string id;
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double length = 0.0;
  std::uint32_t road = 0;
};

struct Road {
  std::string key;
  std::vector<std::uint32_t> edges;
  std::vector<std::uint32_t> nodes;
  double center_distance = 0.0;
  bool charging = false;
  double length = 0.0;
};

/// Undirected road network in planar meters. Edges sharing a road key form
/// one road, the unit that is marked charging or not.
class RoadGraph {
 public:
  struct EdgeInput {
    std::string id;
    std::string u;
    std::string v;
    std::optional<double> length;  // Euclidean when absent
    std::string road_key;          // the edge id when empty
    std::string where;             // record location for error messages
  };
  struct NodeInput {
    std::string id;
    Point2 p;
    std::string zone;
    std::string where;
  };

  static RoadGraph build(const std::vector<NodeInput>& nodes, const std::vector<EdgeInput>& edges) {
    RoadGraph g;
    for (const auto& n : nodes) {
      if (n.id.empty()) throw IngestionError(n.where + ": empty node id");
      if (!std::isfinite(n.p.x) || !std::isfinite(n.p.y))
        throw IngestionError(n.where + ": non-finite coordinates for node " + n.id);
      if (!g.node_index_.emplace(n.id, static_cast<std::uint32_t>(g.nodes_.size())).second)
        throw IngestionError(n.where + ": duplicate node id " + n.id);
      g.nodes_.push_back({n.id, n.p, n.zone});
      if (!n.zone.empty()) g.zones_[n.zone].push_back(static_cast<std::uint32_t>(g.nodes_.size() - 1));
    }
    std::unordered_map<std::string, std::uint32_t> road_index;
    std::unordered_map<std::string, bool> edge_ids;
    for (const auto& e : edges) {
      auto find = [&](const std::string& id) {
        auto it = g.node_index_.find(id);
        if (it == g.node_index_.end())
          throw IngestionError(e.where + ": edge " + e.id + " references missing node " + id);
        return it->second;
      };
      if (!edge_ids.emplace(e.id, true).second)
        throw IngestionError(e.where + ": duplicate edge id " + e.id);
      GraphEdge ge{e.id, find(e.u), find(e.v), 0.0, 0};
      ge.length = e.length.value_or(distance(g.nodes_[ge.u].p, g.nodes_[ge.v].p));
      if (!(ge.length > 0.0) || !std::isfinite(ge.length))
        throw IngestionError(e.where + ": edge " + e.id + " has non-positive length");
      const std::string key = e.road_key.empty() ? e.id : e.road_key;
      auto [it, fresh] = road_index.emplace(key, static_cast<std::uint32_t>(g.roads_.size()));
      if (fresh) g.roads_.push_back(Road{key, {}, {}, 0.0, false, 0.0});
      ge.road = it->second;
      auto& road = g.roads_[ge.road];
      road.edges.push_back(static_cast<std::uint32_t>(g.edges_.size()));
      road.nodes.push_back(ge.u);
      road.nodes.push_back(ge.v);
      road.length += ge.length;
      g.edges_.push_back(ge);
    }
    for (auto& r : g.roads_) {
      std::sort(r.nodes.begin(), r.nodes.end());
      r.nodes.erase(std::unique(r.nodes.begin(), r.nodes.end()), r.nodes.end());
    }
    return g;
  }

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<Road>& roads() const { return roads_; }
  std::vector<Road>& roads() { return roads_; }
  const std::map<std::string, std::vector<std::uint32_t>>& zones() const { return zones_; }

  std::optional<std::uint32_t> node_index(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Sets each road's center distance: the smallest distance from any of its
  /// nodes to the nearest center.
  void set_center_distances(const std::vector<Point2>& centers) {
    if (centers.empty()) throw InvalidParameter("at least one center is required");
    for (auto& r : roads_) {
      double best = std::numeric_limits<double>::infinity();
      for (auto v : r.nodes)
        for (const auto& c : centers) best = std::min(best, distance(nodes_[v].p, c));
      r.center_distance = best;
    }
  }

  std::vector<double> center_distances() const {
    std::vector<double> out;
    out.reserve(roads_.size());
    for (const auto& r : roads_) out.push_back(r.center_distance);
    return out;
  }

  double charging_fraction() const {
    if (roads_.empty()) return 0.0;
    return static_cast<double>(std::count_if(roads_.begin(), roads_.end(),
                                             [](const Road& r) { return r.charging; })) /
           static_cast<double>(roads_.size());
  }

  double charging_length_fraction() const {
    double all = 0.0, on = 0.0;
    for (const auto& r : roads_) {
      all += r.length;
      if (r.charging) on += r.length;
    }
    return all > 0.0 ? on / all : 0.0;
  }

  /// Routing graph with the current charging flags; road ids are road indices.
  SearchGraph search_graph() const {
    SearchGraph sg(nodes_.size());
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) sg.set_point(i, nodes_[i].p);
    for (const auto& e : edges_) sg.add_edge(e.u, e.v, e.length, roads_[e.road].charging, e.road);
    sg.build();
    return sg;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<Road> roads_;
  std::unordered_map<std::string, std::uint32_t> node_index_;
  std::map<std::string, std::vector<std::uint32_t>> zones_;
};

/// Spherical transverse Mercator about (lon0, lat0), meters.
inline Point2 project_geographic(double lon, double lat, double lon0, double lat0) {
  constexpr double R = 6371008.8;
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi = lat * deg;
  const double dl = (lon - lon0) * deg;
  const double b = std::cos(phi) * std::sin(dl);
  const double x = 0.5 * R * std::log((1.0 + b) / (1.0 - b));
  const double y = R * (std::atan2(std::tan(phi), std::cos(dl)) - lat0 * deg);
  return {x, y};
}

namespace detail {

inline void project_nodes(std::vector<RoadGraph::NodeInput>& nodes) {
  if (nodes.empty()) return;
  double lon0 = 0.0, lat0 = 0.0;
  for (const auto& n : nodes) {
    if (std::abs(n.p.y) > 90.0 || std::abs(n.p.x) > 180.0)
      throw IngestionError(n.where + ": geographic coordinates out of range");
    lon0 += n.p.x;
    lat0 += n.p.y;
  }
  lon0 /= static_cast<double>(nodes.size());
  lat0 /= static_cast<double>(nodes.size());
  for (auto& n : nodes) n.p = project_geographic(n.p.x, n.p.y, lon0, lat0);
}

}  // namespace detail

/// Node CSV (id,x,y[,zone] or id,lon,lat[,zone]) and edge CSV
/// (id,u,v[,length][,road_key]). Geographic inputs are projected.
inline RoadGraph load_graph_csv(const std::string& nodes_path, const std::string& edges_path) {
  const auto nt = read_csv(nodes_path, {"id"});
  const bool geographic =
      std::find(nt.header.begin(), nt.header.end(), "lon") != nt.header.end();
  std::vector<RoadGraph::NodeInput> nodes;
  for (const auto& row : nt.rows) {
    RoadGraph::NodeInput n{row.get("id"), {}, row.has("zone") ? row.get("zone") : "", row.where()};
    n.p = geographic ? Point2{row.as_double("lon"), row.as_double("lat")}
                     : Point2{row.as_double("x"), row.as_double("y")};
    nodes.push_back(std::move(n));
  }
  if (geographic) detail::project_nodes(nodes);
  const auto et = read_csv(edges_path, {"id", "u", "v"});
  std::vector<RoadGraph::EdgeInput> edges;
  for (const auto& row : et.rows) {
    RoadGraph::EdgeInput e{row.get("id"), row.get("u"), row.get("v"), std::nullopt,
                           row.has("road_key") ? row.get("road_key") : "", row.where()};
    if (row.has("length")) e.length = row.as_double("length");
    edges.push_back(std::move(e));
  }
  return RoadGraph::build(nodes, edges);
}

/// Single JSON document {"crs": "planar"|"geographic", "nodes": [{"id", "x",
/// "y" | "lon", "lat", "zone"?}], "edges": [{"id", "u", "v", "length"?,
/// "road_key"?}]}.
inline RoadGraph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(path + ": " + e.what());
  }
  auto id_of = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  try {
    const std::string crs = doc.value("crs", "planar");
    if (crs != "planar" && crs != "geographic") throw IngestionError(path + ": unknown crs " + crs);
    std::vector<RoadGraph::NodeInput> nodes;
    std::size_t k = 0;
    for (const auto& n : doc.at("nodes")) {
      const std::string where = path + ": nodes[" + std::to_string(k++) + "]";
      RoadGraph::NodeInput ni{id_of(n.at("id")), {}, n.contains("zone") ? id_of(n.at("zone")) : "",
                              where};
      ni.p = crs == "geographic" ? Point2{n.at("lon").get<double>(), n.at("lat").get<double>()}
                                 : Point2{n.at("x").get<double>(), n.at("y").get<double>()};
      nodes.push_back(std::move(ni));
    }
    if (crs == "geographic") detail::project_nodes(nodes);
    std::vector<RoadGraph::EdgeInput> edges;
    k = 0;
    for (const auto& e : doc.at("edges")) {
      const std::string where = path + ": edges[" + std::to_string(k++) + "]";
      RoadGraph::EdgeInput ei{id_of(e.at("id")), id_of(e.at("u")), id_of(e.at("v")), std::nullopt,
                              e.contains("road_key") ? id_of(e.at("road_key")) : "", where};
      if (e.contains("length")) ei.length = e.at("length").get<double>();
      edges.push_back(std::move(ei));
    }
    return RoadGraph::build(nodes, edges);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(path + ": " + e.what());
  }
}

/// Marks each road charging with probability g(center distance). Each road
/// draws from its own stream keyed by (seed, road key).
inline RoadGraph assign_charging(RoadGraph graph, const ThinningSpec& spec,
                                 const std::vector<Point2>& centers, std::uint64_t seed) {
  validate(spec);
  graph.set_center_distances(centers);
  for (auto& r : graph.roads()) {
    auto eng = make_stream(seed, StreamPurpose::assignment, {fnv1a64(r.key)});
    r.charging = uniform01(eng) < eval_g(spec, r.center_distance);
  }
  return graph;
}

/// Centers a strategy is measured from: its own centers for multi-center
/// specs, else the given city center.
inline std::vector<Point2> strategy_centers(const ThinningSpec& spec, Point2 city_center) {
  auto c = spec_centers(spec);
  if (c.empty()) c.push_back(city_center);
  return c;
}

struct NodeRef {
  std::string id;
};
struct ZoneRef {
  std::string zone;
};
using TripEnd = std::variant<NodeRef, Point2, ZoneRef>;

struct TripRecord {
  TripEnd pickup;
  TripEnd dropoff;
  std::optional<std::string> timestamp;
};

/// Trip CSV with header pickup_id,dropoff_id[,pickup_x,pickup_y,dropoff_x,
/// dropoff_y,timestamp]. Ids are node ids, or zone ids when `zone_ids`;
/// rows with empty ids use the coordinates.
inline std::vector<TripRecord> read_trips_csv(const std::string& path, bool zone_ids = false) {
  const auto t = read_csv(path, {"pickup_id", "dropoff_id"});
  std::vector<TripRecord> trips;
  for (const auto& row : t.rows) {
    auto end = [&](const std::string& which) -> TripEnd {
      if (row.has(which + "_id")) {
        const auto& id = row.get(which + "_id");
        if (zone_ids) return ZoneRef{id};
        return NodeRef{id};
      }
      return Point2{row.as_double(which + "_x"), row.as_double(which + "_y")};
    };
    TripRecord r{end("pickup"), end("dropoff"), std::nullopt};
    if (row.has("timestamp")) r.timestamp = row.get("timestamp");
    trips.push_back(std::move(r));
  }
  return trips;
}

struct RouteOptions {
  double snap_radius = 200.0;  // meters
  std::optional<ChargingModel> charging = ChargingModel{};
  std::uint64_t zone_seed = 0;  // stream for drawing nodes inside zones
};

/// Routes trips on one charging assignment. The search graph and the snap
/// index are built once.
class TripRouter {
 public:
  TripRouter(const RoadGraph& graph, RouteOptions opt = {})
      : graph_(graph), opt_(opt), search_(graph.search_graph()) {
    for (const auto& n : graph.nodes()) points_.push_back(n.p);
    if (!(opt_.snap_radius > 0.0)) throw InvalidParameter("snap radius must be positive");
    index_.emplace(points_, opt_.snap_radius);
  }

  std::uint32_t resolve(const TripEnd& end, std::uint64_t trip_index, int which) const {
    if (const auto* n = std::get_if<NodeRef>(&end)) {
      auto idx = graph_.node_index(n->id);
      if (!idx) throw SnapFailure("unknown node id " + n->id);
      return *idx;
    }
    if (const auto* z = std::get_if<ZoneRef>(&end)) {
      auto it = graph_.zones().find(z->zone);
      if (it == graph_.zones().end() || it->second.empty())
        throw SnapFailure("zone " + z->zone + " has no graph nodes");
      auto eng = make_stream(opt_.zone_seed, StreamPurpose::trips,
                             {trip_index, static_cast<std::uint64_t>(which)});
      const auto k = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(it->second.size()));
      return it->second[std::min(k, it->second.size() - 1)];
    }
    const Point2 p = std::get<Point2>(end);
    std::optional<std::uint32_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (auto j : index_->within(p, opt_.snap_radius)) {
      const double d = distance(points_[j], p);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(j);
      }
    }
    if (!best)
      throw SnapFailure("no node within " + std::to_string(opt_.snap_radius) + " m of (" +
                        std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    return *best;
  }

  RouteResult route(const TripRecord& trip, std::uint64_t trip_index = 0) const {
    return route_nodes(resolve(trip.pickup, trip_index, 0), resolve(trip.dropoff, trip_index, 1));
  }

  RouteResult route_nodes(std::uint32_t src, std::uint32_t dst) const {
    const auto path = lexicographic_shortest_path(search_, src, dst);
    if (!path)
      throw RoutingFailure("no path between nodes " + graph_.nodes()[src].id + " and " +
                           graph_.nodes()[dst].id);
    auto r = summarize_route(search_, *path, opt_.charging);
    return r;
  }

  const SearchGraph& search_graph() const { return search_; }

 private:
  const RoadGraph& graph_;
  RouteOptions opt_;
  SearchGraph search_;
  std::vector<Point2> points_;
  std::optional<GridIndex> index_;
};

/// Lexicographic shortest route of one trip: minimal length, then maximal
/// charged length. Zero-length trips report rho_c = 0.
inline RouteResult route_trip(const RoadGraph& graph, const TripRecord& trip,
                              const RouteOptions& opt = {}) {
  return TripRouter(graph, opt).route(trip);
}

/// City center from zone counts: the centroid of the busiest zone, ties to
/// the lowest zone id.
inline Point2 center_from_traffic(const std::vector<ZoneStats>& zones) {
  if (zones.empty()) throw InvalidParameter("center_from_traffic needs at least one zone");
  const ZoneStats* best = &zones.front();
  for (const auto& z : zones)
    if (z.count > best->count || (z.count == best->count && z.zone_id < best->zone_id)) best = &z;
  return best->centroid;
}

/// City center from raw trip points: the centroid of the largest DBSCAN
/// cluster, or of all points when no cluster forms.
inline Point2 center_from_traffic(const std::vector<Point2>& points, double eps = 200.0,
                                  std::size_t min_pts = 50) {
  if (points.empty()) throw InvalidParameter("center_from_traffic needs at least one point");
  const auto clusters = dbscan(points, eps, min_pts);
  const auto top = top_k_cluster_centers(points, clusters, 1);
  if (!top.centers.empty()) return top.centers.front();
  Point2 c;
  for (const auto& p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  return {c.x / points.size(), c.y / points.size()};
}

/// Assignment CSV: road_key,center_distance_m,charging.
inline void write_assignment_csv(std::ostream& os, const RoadGraph& g) {
  os << "road_key,center_distance_m,charging\n";
  const auto old = os.precision(12);
  for (const auto& r : g.roads()) os << r.key << ',' << r.center_distance << ',' << (r.charging ? 1 : 0) << '\n';
  os.precision(old);
}

/// Road graph of a line process realization: line intersections are nodes
/// and every line is one road ("v<i>" or "h<j>").
inline RoadGraph graph_from_realization(const CityRealization& city) {
  std::vector<RoadGraph::NodeInput> nodes;
  std::vector<RoadGraph::EdgeInput> edges;
  const auto& V = city.vertical_lines;
  const auto& H = city.horizontal_lines;
  auto nid = [&](std::size_t i, std::size_t j) { return std::to_string(i * H.size() + j); };
  for (std::size_t i = 0; i < V.size(); ++i)
    for (std::size_t j = 0; j < H.size(); ++j)
      nodes.push_back({nid(i, j), {V[i].coord, H[j].coord}, "", "grid"});
  for (std::size_t i = 0; i < V.size(); ++i)
    for (std::size_t j = 0; j + 1 < H.size(); ++j)
      edges.push_back({"v" + std::to_string(i) + "_" + std::to_string(j), nid(i, j), nid(i, j + 1),
                       H[j + 1].coord - H[j].coord, "v" + std::to_string(i), "grid"});
  for (std::size_t j = 0; j < H.size(); ++j)
    for (std::size_t i = 0; i + 1 < V.size(); ++i)
      edges.push_back({"h" + std::to_string(j) + "_" + std::to_string(i), nid(i, j), nid(i + 1, j),
                       V[i + 1].coord - V[i].coord, "h" + std::to_string(j), "grid"});
  return RoadGraph::build(nodes, edges);
}

/// Trip sequence between graph nodes drawn with weight proportional to a
/// plateau-plus-power-law profile of their distance from the center, the
/// traffic shape observed in taxi data.
inline std::vector<TripRecord> synthetic_power_law_trips(const RoadGraph& graph, Point2 center,
                                                         double alpha, double r_min,
                                                         std::size_t count, std::uint64_t seed) {
  if (graph.nodes().empty()) throw InvalidParameter("graph has no nodes");
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& n : graph.nodes()) {
    acc += detail::power_law_value(alpha, r_min, distance(n.p, center));
    cum.push_back(acc);
  }
  auto eng = make_stream(seed, StreamPurpose::trips, {});
  auto draw = [&] {
    const double u = uniform01(eng) * acc;
    const auto k = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
    return graph.nodes()[std::min<std::size_t>(k, cum.size() - 1)].id;
  };
  std::vector<TripRecord> trips;
  for (std::size_t i = 0; i < count; ++i) {
    auto a = draw();
    auto b = draw();
    trips.push_back({NodeRef{a}, NodeRef{b}, std::nullopt});
  }
  return trips;
}

}  // namespace chargegrid
