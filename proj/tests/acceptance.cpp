// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   acceptance --cli <chargegrid binary> --configs <configs dir> --work <scratch dir>
//              [--only AC5] [--known-red AC7,AC9]
//
// Criteria listed in --known-red still print FAIL when they fail; they just do
// not set the exit status. A known-red criterion that passes is reported too.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chargegrid/analytic.hpp"
#include "chargegrid/calibration.hpp"
#include "chargegrid/ev_sim.hpp"
#include "chargegrid/monte_carlo.hpp"
#include "chargegrid/roadnet.hpp"
#include "chargegrid/traffic_stats.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace chargegrid;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---- AC1: closed-form integral of g against Gauss-Kronrod ---------------------

Result ac1() {
  double worst = 0.0;
  std::size_t cases = 0;
  std::string where;
  for (double alpha : {0.5, 1.0, 1.5, 2.0, 3.5})
    for (double r_min : {50.0, 500.0, 2000.0})
      for (double s : {-3000.0, -700.0, -100.0, 0.0, 40.0, 450.0, 2500.0})
        for (double x : {10.0, 300.0, 1200.0, 6000.0}) {
          // Intervals inside the plateau, straddling it, and wholly in the tail on either side.
          const PowerLaw spec{alpha, r_min};
          const double closed = integral_g(spec, s, s + x);
          const double ref = oracle::profile_integral(spec, s, s + x);
          const double rel = std::abs(closed - ref) / std::abs(ref);
          if (rel > worst) {
            worst = rel;
            where = "alpha=" + fmt(alpha) + " r_min=" + fmt(r_min) + " s=" + fmt(s) + " x=" + fmt(x);
          }
          ++cases;
        }
  return {worst <= 1e-9 && cases >= 200, std::to_string(cases) + " cases, worst relative error " + fmt(worst, 3) +
                                             " (" + where + ")"};
}

// ---- AC2: exponential special case --------------------------------------------

Result ac2() {
  const double lambda = 0.01, p = 0.3;
  const auto sd = SourceDestPair::parallel(0.0, 5000.0, 4000.0);
  const auto mc = sample_nearest_distances(Uniform{p}, lambda, sd, Axis::horizontal, 100000, 2);
  const double ks = mc.charging.ks_distance([&](double x) { return 1.0 - std::exp(-lambda * p * x); });
  return {ks < 0.01, "KS " + fmt(ks, 3) + " at n=1e5 (threshold 0.01)"};
}

// ---- AC3: Props 2/5/7 against Monte Carlo ---------------------------------------

Result ac3() {
  const double lambda = 0.01;
  const auto sd = SourceDestPair::parallel(300.0, 4000.0, 2500.0);
  double worst = 0.0;
  std::string detail;
  for (double alpha : {0.5, 1.0, 2.0}) {
    const PowerLaw spec{alpha, 500.0};
    const auto near = sample_nearest_distances(spec, lambda, sd, Axis::vertical, 100000, 30 + alpha * 10);
    const double ks2 = near.charging.ks_distance(
        [&](double x) { return analytic::cdf_nearest_charging_given_sd(spec, lambda, sd, Axis::vertical, x); });
    const double ks5 = near.non_charging.ks_distance(
        [&](double x) { return analytic::cdf_nearest_noncharging_given_sd(spec, lambda, sd, Axis::vertical, x); });
    const auto gap = sample_gap(spec, lambda, sd, Axis::vertical, 100000, 60 + alpha * 10);
    const double ks7 = gap.ks_distance([&](double x) { return analytic::cdf_gap_X(spec, lambda, sd, Axis::vertical, x); });
    worst = std::max({worst, ks2, ks5, ks7});
    detail += " a=" + fmt(alpha) + ":" + fmt(ks2, 2) + "/" + fmt(ks5, 2) + "/" + fmt(ks7, 2);
  }
  return {worst < 0.02, "KS (P2/P5/P7)" + detail + ", worst " + fmt(worst, 3) + " (threshold 0.02)"};
}

// ---- AC4: leaf L3,5 ----------------------------------------------------------------

Result ac4() {
  const double lambda = 0.02;
  const PowerLaw spec{1.0, 500.0};
  const auto sd = SourceDestPair::parallel(600.0, 1600.0, 800.0);
  const auto r = sample_metric_conditioned(spec, lambda, sd, EventId{3, 5}, 50000, 4);
  // Sup-norm on a fine grid plus both sides of every jump of the empirical CDF.
  auto sup = [](const EmpiricalCdf& e, auto&& f, double lo, double hi) {
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double x = lo + (hi - lo) * i / 4000.0;
      worst = std::max(worst, std::abs(e(x) - f(x)));
    }
    for (double v : e.values()) worst = std::max({worst, std::abs(e(v) - f(v)), std::abs(e.below(v) - f(v))});
    return worst;
  };
  const double sup_dn = sup(r.cdfs.d_n, [&](double x) {
    return analytic::leaf_L35_metric_cdf(spec, lambda, sd, analytic::Metric::d_n, x);
  }, 0.0, sd.d_v);
  const double sup_rho = sup(r.cdfs.rho_c, [&](double pct) {
    return analytic::leaf_L35_metric_cdf(spec, lambda, sd, analytic::Metric::rho_c,
                                         analytic::rho_c_percent_to_distance(sd, pct));
  }, 0.0, 100.0);
  const auto& flags = r.stages.front();
  const double p_t3 = analytic::event_probs_T3(spec, lambda, sd).t3;
  const double sigma = std::sqrt(p_t3 * (1 - p_t3) / static_cast<double>(flags.proposals));
  const double z = (flags.rate() - p_t3) / sigma;
  const bool ok = r.samples.size() >= 50000 && sup_dn <= 0.03 && sup_rho <= 0.03 && std::abs(z) <= 3.0;
  return {ok, std::to_string(r.samples.size()) + " accepted; sup D_n " + fmt(sup_dn, 3) + ", sup rho_c " +
                  fmt(sup_rho, 3) + "; P(T3) " + fmt(p_t3, 5) + " vs MC " + fmt(flags.rate(), 5) + " (z=" +
                  fmt(z, 2) + ")"};
}

// ---- AC5: across-center trips on a synthetic city --------------------------------

Result ac5() {
  const double lambda = 0.01;  // 100 m mean road spacing
  const double city = 10000.0;  // half-width of the calibration city
  const auto spec = calibrate(PowerLaw{1.0, 1000.0}, 0.2, UniformDistances{0.0, city});
  bool ok = true;
  std::string detail = "alpha=" + fmt(std::get<PowerLaw>(spec).alpha, 3);
  for (double L : {4000.0, 7000.0, 10000.0}) {
    std::vector<double> rho;
    for (int o = 0; o < 2; ++o) {
      const double q = L / 4.0;  // from (-q, -q) to (q, q)
      const auto sd = o == 0 ? SourceDestPair::parallel(-q, q, 2 * q, -q)
                             : SourceDestPair::perpendicular(-q, q, 2 * q, -q);
      const auto s = sample_metric_samples(spec, lambda, sd, 2000, 500 + static_cast<std::uint64_t>(L) + o);
      rho.insert(rho.end(), s.rho_c.begin(), s.rho_c.end());
    }
    auto above = [&](double x) {
      return std::count_if(rho.begin(), rho.end(), [&](double v) { return v > x; }) / double(rho.size());
    };
    const double p40 = above(40), p80 = above(80), p90 = above(90);
    ok = ok && p40 >= 0.95 && p80 >= 0.7 && p90 >= 0.4;
    detail += "; " + fmt(L / 1000) + "km P>40 " + fmt(p40, 3) + " P>80 " + fmt(p80, 3) + " P>90 " + fmt(p90, 3);
  }
  return {ok, detail};
}

// ---- AC6: depletion arithmetic -------------------------------------------------------

Result ac6() {
  const std::vector<TripLeg> legs(20, TripLeg{10.0, 0.0});
  const auto tr = simulate_sequence(ev_preset("nissan_leaf"), ChargeConfig{}, legs);
  const double d = tr.depletion_km.value_or(-1.0);
  return {std::abs(d - 107.3) <= 0.5, "depletion at " + fmt(d, 6) + " km"};
}

// ---- AC7: strategy ordering ------------------------------------------------------------

Result ac7() {
  // Synthetic city and traffic; the power-law strategy uses the traffic's plateau.
  const double lambda = 0.01, half_width = 7000.0;
  const double traffic_alpha = 3.0, traffic_r_min = 200.0;
  const std::size_t trips_per_run = 50;
  // Leaf consumption with an effectively unbounded pack: at 20 kW the real pack
  // pins at 100% for every strategy, which would hide the ordering.
  const EvModel leaf{"leaf_unbounded", ev_preset("nissan_leaf").consumption_kwh_per_km, 1e6};
  struct Arm {
    double target;
    int better, worse;  // strategy indices: final soc of `better` should be >= `worse`
    int wins = 0, ties = 0;
  };
  std::vector<Arm> arms{{0.20, 1, 0}, {0.25, 1, 2}, {0.05, 2, 1}};
  const char* names[] = {"uniform", "power_law", "gaussian"};
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto g = graph_from_realization(sample_mplp(lambda, SimWindow{half_width}, 7000 + rep));
    const auto trips = synthetic_power_law_trips(g, {0, 0}, traffic_alpha, traffic_r_min, trips_per_run, 7100 + rep);
    for (auto& arm : arms) {
      const auto st = calibrate_strategies(
          g, {0, 0},
          {{"uniform", Uniform{0.5}}, {"power_law", PowerLaw{1.0, traffic_r_min}}, {"gaussian", Gaussian{1000.0, 1.0}}},
          arm.target);
      const auto out = compare_strategies(g, trips, st, {0, 0}, leaf, ChargeConfig{}, 7200 + rep);
      const auto& a = out[arm.better].trace;
      const auto& b = out[arm.worse].trace;
      // Both pinned at full charge (or both empty) says nothing about the ordering.
      if (a.final_soc() == b.final_soc()) {
        ++arm.ties;
        continue;
      }
      arm.wins += a.final_soc() > b.final_soc();
    }
  }
  bool ok = true;
  std::string detail;
  for (const auto& arm : arms) {
    ok = ok && arm.wins >= 9;
    detail += std::string(detail.empty() ? "" : "; ") + names[arm.better] + " > " + names[arm.worse] + " at " +
              fmt(arm.target * 100) + "%: " + std::to_string(arm.wins) + "/10 (ties " + std::to_string(arm.ties) + ")";
  }
  return {ok, detail};
}

// ---- AC8: routing against exhaustive enumeration -------------------------------------------

Result ac8(const fs::path& fixtures) {
  std::size_t checked = 0, mismatches = 0;
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const auto rc = oracle::random_arrangement(rng);
    const auto best = oracle::arrangement_route(rc.city, rc.src, rc.dst);
    ++checked;
    try {
      const auto r = route_on_realization(rc.city, {rc.src, rc.dst, 0});
      mismatches += !best.found || r.total_length != best.length || r.charged_length != best.charged;
    } catch (const RoutingFailure&) {
      mismatches += best.found;
    }
  }
  const std::vector<RoadGraph> graphs{
      load_graph_csv((fixtures / "grid3x3_nodes.csv").string(), (fixtures / "grid3x3_edges.csv").string()),
      load_graph_json((fixtures / "town.json").string()),
      load_graph_csv((fixtures / "diamond_nodes.csv").string(), (fixtures / "diamond_edges.csv").string())};
  for (RoadGraph g : graphs) {
    const auto bits = std::min<std::size_t>(g.roads().size(), 9);
    for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
      for (std::size_t k = 0; k < g.roads().size(); ++k) g.roads()[k].charging = (mask >> k) & 1u;
      const TripRouter router(g, {});
      for (std::uint32_t s = 0; s < g.nodes().size(); ++s)
        for (std::uint32_t t = 0; t < g.nodes().size(); ++t) {
          const auto r = router.route_nodes(s, t);
          const auto best = oracle::graph_route(g, s, t);
          ++checked;
          mismatches += r.total_length != best.length || r.charged_length != best.charged;
        }
    }
  }
  return {mismatches == 0, std::to_string(checked) + " routes compared, " + std::to_string(mismatches) + " mismatches"};
}

// ---- AC9: power-law fit coverage and DBSCAN -----------------------------------------------

Result ac9(const fs::path& configs) {
  const double alpha = 1.5;
  int covered = 0;
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    auto eng = make_stream(9, StreamPurpose::trips, {rep});
    std::vector<ZoneStats> zones;
    for (int i = 1; i <= 60; ++i) {
      const double r = 150.0 * i;
      zones.push_back({i, {r, 0.0}, 1e6 * std::pow(r, -alpha) * std::exp(noise(eng)), r});
    }
    const auto f = fit_power_law(zones, 0.0);
    covered += f.ci_lo <= alpha && alpha <= f.ci_hi;
  }
  // DBSCAN fixtures: the bundled pickup sample and random integer point sets with many exact ties.
  std::vector<std::vector<Point2>> sets;
  {
    const auto t = read_csv((configs / "data" / "pickups.csv").string(), {"x", "y"});
    std::vector<Point2> pts;
    for (const auto& row : t.rows) pts.push_back({row.as_double("x"), row.as_double("y")});
    sets.push_back(pts);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto eng = make_stream(seed, StreamPurpose::trips, {99});
    std::vector<Point2> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({std::floor(uniform01(eng) * 50), std::floor(uniform01(eng) * 50)});
    sets.push_back(pts);
  }
  int dbscan_bad = 0, dbscan_runs = 0;
  for (const auto& pts : sets)
    for (double eps : {2.0, 3.0, 60.0})
      for (std::size_t min_pts : {1u, 4u, 10u}) {
        ++dbscan_runs;
        dbscan_bad += dbscan(pts, eps, min_pts).labels != oracle::dbscan_labels(pts, eps, min_pts);
      }
  return {covered >= 950 && dbscan_bad == 0,
          "fit coverage " + std::to_string(covered) + "/1000 (need 950); DBSCAN " +
              std::to_string(dbscan_runs - dbscan_bad) + "/" + std::to_string(dbscan_runs) + " match the oracle"};
}

// ---- AC10: end-to-end determinism ---------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result ac10(const fs::path& cli, const fs::path& configs, const fs::path& work) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  std::string detail;
  bool ok = true;
  for (const auto& [cmd, cfg] : {std::pair{"mc", "mc.json"}, std::pair{"compare", "compare_synthetic.json"}}) {
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = work / (std::string(cmd) + "_" + std::to_string(run));
      fs::remove_all(out);
      const std::string line = "\"" + cli.string() + "\" " + cmd + " --config \"" + (configs / cfg).string() +
                               "\" --out \"" + out.string() + "\"";
      if (std::system(line.c_str()) != 0) return {false, std::string(cmd) + " exited nonzero"};
      dirs.push_back(out);
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        ok = false;
        detail += " " + e.path().filename().string() + " differs;";
      }
    }
    ok = ok && files == static_cast<std::size_t>(std::distance(fs::directory_iterator(dirs[1]), {}));
    detail += std::string(" ") + cmd + ": " + std::to_string(files) + " files identical;";
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chargegrid acceptance criteria"};
  std::string cli, configs, work = "acceptance_work", only;
  app.add_option("--cli", cli, "chargegrid binary")->required();
  app.add_option("--configs", configs, "configs directory")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run a single criterion, e.g. AC5");
  std::vector<std::string> known_red;
  app.add_option("--known-red", known_red, "criteria whose failure is documented and expected")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  const fs::path fixtures = CHARGEGRID_FIXTURES;

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"AC1", ac1},
      {"AC2", ac2},
      {"AC3", ac3},
      {"AC4", ac4},
      {"AC5", ac5},
      {"AC6", ac6},
      {"AC7", ac7},
      {"AC8", [&] { return ac8(fixtures); }},
      {"AC9", [&] { return ac9(configs); }},
      {"AC10", [&] { return ac10(cli, configs, work); }},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && name != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = std::find(known_red.begin(), known_red.end(), name) != known_red.end();
    failed += !r.pass && !known;
    std::cout << name << ' ' << (r.pass ? "PASS" : "FAIL") << " [" << fmt(secs, 3) << " s] " << r.detail
              << (known ? (r.pass ? " (listed as known-red, now passing)" : " (known-red)") : "") << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
