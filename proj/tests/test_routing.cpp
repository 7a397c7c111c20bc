#include <gtest/gtest.h>

#include "chargegrid/arrangement.hpp"
#include "chargegrid/roadnet.hpp"
#include "oracles.hpp"

using namespace chargegrid;

namespace {

std::string fixture(const std::string& name) { return std::string(CHARGEGRID_FIXTURES) + "/" + name; }

void set_charging(RoadGraph& g, std::uint32_t mask) {
  for (std::size_t k = 0; k < g.roads().size(); ++k) g.roads()[k].charging = (mask >> k) & 1u;
}

void check_all_pairs(RoadGraph g, int max_mask_bits) {
  const auto bits = std::min<std::size_t>(g.roads().size(), static_cast<std::size_t>(max_mask_bits));
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    set_charging(g, mask);
    const TripRouter router(g, {});
    for (std::uint32_t s = 0; s < g.nodes().size(); ++s)
      for (std::uint32_t t = 0; t < g.nodes().size(); ++t) {
        const auto r = router.route_nodes(s, t);
        const auto best = oracle::graph_route(g, s, t);
        ASSERT_TRUE(best.found);
        ASSERT_EQ(r.total_length, best.length) << "mask " << mask << ' ' << s << "->" << t;
        ASSERT_EQ(r.charged_length, best.charged) << "mask " << mask << ' ' << s << "->" << t;
      }
  }
}

}  // namespace

TEST(RouteOnRealization, SameChargingLine) {
  CityRealization city{{{0.0, true}, {50.0, false}}, {{-20.0, false}, {30.0, false}}, 0.01, SimWindow(200.0)};
  const auto r = route_on_realization(city, {{0.0, -100.0}, {0.0, 120.0}, 0});
  EXPECT_DOUBLE_EQ(r.total_length, 220.0);
  EXPECT_DOUBLE_EQ(r.rho_c, 100.0);
  ASSERT_TRUE(r.d_n);
  EXPECT_DOUBLE_EQ(*r.d_n, 0.0);
}

TEST(RouteOnRealization, SameNonChargingLineNoCrossings) {
  CityRealization city{{{0.0, false}, {50.0, true}}, {{-150.0, true}}, 0.01, SimWindow(200.0)};
  const auto r = route_on_realization(city, {{0.0, -100.0}, {0.0, 120.0}, 0});
  EXPECT_DOUBLE_EQ(r.rho_c, 0.0);
  EXPECT_FALSE(r.d_n.has_value());
  EXPECT_DOUBLE_EQ(r.charged_length, 0.0);
}

TEST(RouteOnRealization, DenseAllChargingGridIsManhattan) {
  auto city = thin(sample_mplp(0.05, SimWindow(1000.0), 8), Uniform{1.0}, 1);
  const Point2 a{city.vertical_lines[3].coord, 10.0};
  const Point2 b{city.vertical_lines[60].coord, 700.0};
  const auto r = route_on_realization(city, {a, b, 0});
  EXPECT_NEAR(r.total_length, std::abs(a.x - b.x) + std::abs(a.y - b.y), 1e-9);
  EXPECT_DOUBLE_EQ(r.rho_c, 100.0);
}

TEST(RouteOnRealization, EndpointsMustLieOnLines) {
  CityRealization city{{{0.0, false}}, {{0.0, false}}, 0.01, SimWindow(200.0)};
  EXPECT_THROW(route_on_realization(city, {{5.0, 5.0}, {0.0, 10.0}, 0}), InvalidParameter);
}

TEST(RouteOnRealization, DisconnectedReportsRoutingFailure) {
  CityRealization city{{{0.0, false}, {10.0, false}}, {}, 0.01, SimWindow(200.0)};
  EXPECT_THROW(route_on_realization(city, {{0.0, 5.0}, {10.0, 5.0}, 0}), RoutingFailure);
}

TEST(RouteOnRealization, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const auto rc = oracle::random_arrangement(rng);
    const auto best = oracle::arrangement_route(rc.city, rc.src, rc.dst);
    if (!best.found) {
      EXPECT_THROW(route_on_realization(rc.city, {rc.src, rc.dst, 0}), RoutingFailure);
      continue;
    }
    const auto r = route_on_realization(rc.city, {rc.src, rc.dst, 0});
    EXPECT_EQ(r.total_length, best.length) << "case " << k;
    EXPECT_EQ(r.charged_length, best.charged) << "case " << k;
    double sum = 0.0;
    for (const auto& s : r.segments) sum += s.length;
    EXPECT_EQ(sum, r.total_length);
  }
}

TEST(LexicographicPath, StageTwoKeepsShortestLength) {
  auto city = thin(sample_mplp(0.02, SimWindow(800.0), 99), PowerLaw{1.0, 200.0}, 5);
  const auto arr = build_arrangement(city.vertical_lines, city.horizontal_lines,
                                     {city.vertical_lines[1].coord, city.horizontal_lines[2].coord},
                                     {city.vertical_lines[20].coord, city.horizontal_lines[25].coord});
  const auto path = lexicographic_shortest_path(arr.graph, arr.source, arr.dest);
  ASSERT_TRUE(path);
  double len = 0.0;
  for (const auto& s : path->steps) len += s.length;
  EXPECT_NEAR(len, path->shortest_length, 1e-9 * len);
}

TEST(LineField, QueriesAreOrderIndependent) {
  const ThinningSpec spec = PowerLaw{1.0, 300.0};
  LineField a(0.01, spec, SimWindow(20000.0), 5, 1);
  LineField b(0.01, spec, SimWindow(20000.0), 5, 1);
  const auto wide = a.lines_in(Axis::vertical, -5000.0, 5000.0);
  b.lines_in(Axis::vertical, 1000.0, 1200.0);
  const auto again = b.lines_in(Axis::vertical, -5000.0, 5000.0);
  EXPECT_EQ(wide, again);
  EXPECT_NEAR(static_cast<double>(wide.size()), 100.0, 45.0);
}

TEST(LineField, OverrideReplacesLines) {
  LineField f(0.05, Uniform{0.5}, SimWindow(1000.0), 1, 2);
  f.set_override(Axis::horizontal, {0.0, 100.0}, {{50.0, true}});
  const auto lines = f.lines_in(Axis::horizontal, 0.0, 100.0);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].coord, 50.0);
}

TEST(GraphFixtures, Grid3x3OneChargingColumn) {
  auto g = load_graph_csv(fixture("grid3x3_nodes.csv"), fixture("grid3x3_edges.csv"));
  for (auto& r : g.roads()) r.charging = r.key == "col1";
  const TripRouter router(g, {});
  const auto r = router.route({NodeRef{"n00"}, NodeRef{"n22"}, {}});
  const auto best = oracle::graph_route(g, *g.node_index("n00"), *g.node_index("n22"));
  EXPECT_EQ(r.total_length, 400.0);
  EXPECT_EQ(r.total_length, best.length);
  EXPECT_EQ(r.charged_length, best.charged);
  EXPECT_EQ(r.charged_length, 200.0);
}

TEST(GraphFixtures, Grid3x3AllAssignmentsAllPairs) {
  check_all_pairs(load_graph_csv(fixture("grid3x3_nodes.csv"), fixture("grid3x3_edges.csv")), 6);
}

TEST(GraphFixtures, TownAllAssignmentsAllPairs) {
  check_all_pairs(load_graph_json(fixture("town.json")), 8);
}

TEST(GraphFixtures, DiamondAllAssignmentsAllPairs) {
  check_all_pairs(load_graph_csv(fixture("diamond_nodes.csv"), fixture("diamond_edges.csv")), 9);
}
