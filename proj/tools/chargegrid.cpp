// chargegrid command-line tool. Every command reads one JSON config, writes
// its outputs plus manifest.json into --out, and exits with a code that
// names the failure class (see exit_code below).

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chargegrid/analytic.hpp"
#include "chargegrid/calibration.hpp"
#include "chargegrid/ev_sim.hpp"
#include "chargegrid/json_io.hpp"
#include "chargegrid/monte_carlo.hpp"
#include "chargegrid/mplp.hpp"
#include "chargegrid/parallel.hpp"
#include "chargegrid/roadnet.hpp"
#include "chargegrid/traffic_stats.hpp"

#ifndef CHARGEGRID_VERSION
#define CHARGEGRID_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace chargegrid;

namespace {

enum Exit : int {
  ok = 0,
  other = 1,
  config = 2,
  ingestion = 3,
  calibration = 4,
  routing = 5,
  numeric = 6,
  fit = 7,
  degenerate = 8,
  not_implemented = 9,
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_parameter: return Exit::config;
    case ErrorKind::ingestion: return Exit::ingestion;
    case ErrorKind::calibration_failure: return Exit::calibration;
    case ErrorKind::routing_failure:
    case ErrorKind::snap_failure: return Exit::routing;
    case ErrorKind::numeric_failure: return Exit::numeric;
    case ErrorKind::fit_failure: return Exit::fit;
    case ErrorKind::conditioning_degenerate: return Exit::degenerate;
    case ErrorKind::not_implemented_by_paper: return Exit::not_implemented;
  }
  return Exit::other;
}

// Shortest round-trip decimal form, independent of locale.
std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  std::string command;
  fs::path config_path;
  std::string config_text;
  Json cfg;
  std::uint64_t seed = 1;
  fs::path out;
  unsigned threads = 1;
  std::map<std::string, std::string> inputs;  // path as written in the config -> digest
  std::vector<std::string> outputs;

  // Config-relative input path; records its digest for the manifest.
  fs::path input(const std::string& rel) {
    fs::path p = rel;
    if (p.is_relative()) p = config_path.parent_path() / p;
    inputs[rel] = hex64(fnv1a64(read_file(p)));
    return p;
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(out);
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw IngestionError("cannot write " + (out / name).string());
    f << content;
    outputs.push_back(name);
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  void manifest() {
    Json m;
    m["command"] = command;
    m["config_hash"] = hex64(fnv1a64(config_text));
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["version"] = CHARGEGRID_VERSION;
    m["timestamp"] = timestamp();
    write_json("manifest.json", m);
  }

  static std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::stoll(e));
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }
};

// ---- config pieces ---------------------------------------------------------

double get_num(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidParameter(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw InvalidParameter(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

double get_num(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? get_num(j, key, where) : fallback;
}

std::string get_str(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw InvalidParameter(where + ": missing string '" + key + "'");
  return j.at(key).get<std::string>();
}

SourceDestPair pair_from_json(const Json& j) {
  const std::string w = "pair";
  const auto o = get_str(j, "orientation", w);
  if (o == "parallel") {
    require_keys(j, {"orientation", "s", "d", "d_v", "along", "y_dir"}, w);
    return SourceDestPair::parallel(get_num(j, "s", w), get_num(j, "d", w), get_num(j, "d_v", w),
                                    j.contains("along") ? std::optional(get_num(j, "along", w)) : std::nullopt,
                                    static_cast<int>(get_num(j, "y_dir", 1.0, w)));
  }
  if (o == "perpendicular") {
    require_keys(j, {"orientation", "s", "d", "d_h", "along", "x_dir"}, w);
    return SourceDestPair::perpendicular(
        get_num(j, "s", w), get_num(j, "d", w), get_num(j, "d_h", w),
        j.contains("along") ? std::optional(get_num(j, "along", w)) : std::nullopt,
        static_cast<int>(get_num(j, "x_dir", 1.0, w)));
  }
  throw InvalidParameter("pair.orientation: expected 'parallel' or 'perpendicular'");
}

Density density_from_json(const Json& j, const std::string& w) {
  const auto kind = get_str(j, "kind", w);
  if (kind == "uniform") {
    require_keys(j, {"kind", "lo", "hi"}, w);
    return UniformDensity{get_num(j, "lo", w), get_num(j, "hi", w)};
  }
  if (kind == "power_law") {
    require_keys(j, {"kind", "alpha", "r_min", "lo", "hi"}, w);
    return PowerLawDensity{get_num(j, "alpha", w), get_num(j, "r_min", w), get_num(j, "lo", w),
                           get_num(j, "hi", w)};
  }
  throw InvalidParameter(w + ".kind: expected 'uniform' or 'power_law'");
}

Placement placement_from_json(const Json& cfg) {
  if (cfg.contains("pair") == cfg.contains("distribution"))
    throw InvalidParameter("config: give exactly one of 'pair' and 'distribution'");
  if (cfg.contains("pair")) return pair_from_json(cfg.at("pair"));
  const auto& j = cfg.at("distribution");
  require_keys(j, {"source", "dest", "along", "parallel_fraction"}, "distribution");
  return DistributionPlacement{
      {density_from_json(j.at("source"), "distribution.source"), density_from_json(j.at("dest"), "distribution.dest")},
      density_from_json(j.at("along"), "distribution.along"),
      get_num(j, "parallel_fraction", 0.5, "distribution")};
}

ChargingModel charging_from_json(const Json& cfg) {
  ChargingModel m;
  if (!cfg.contains("charging")) return m;
  const auto& j = cfg.at("charging");
  require_keys(j, {"system_power_kw", "speed_kmh"}, "charging");
  m.power_kw = get_num(j, "system_power_kw", m.power_kw, "charging");
  m.speed_kmh = get_num(j, "speed_kmh", m.speed_kmh, "charging");
  if (!(m.power_kw > 0.0 && m.speed_kmh > 0.0))
    throw InvalidParameter("charging: power and speed must be positive");
  return m;
}

EvModel ev_from_json(const Json& cfg) {
  if (!cfg.contains("ev")) return ev_preset("nissan_leaf");
  const auto& j = cfg.at("ev");
  if (j.is_string()) return ev_preset(j.get<std::string>());
  require_keys(j, {"name", "consumption_kwh_per_km", "capacity_kwh"}, "ev");
  EvModel m{j.value("name", std::string("custom")), get_num(j, "consumption_kwh_per_km", "ev"),
            get_num(j, "capacity_kwh", "ev")};
  m.validate();
  return m;
}

ChargeConfig charge_from_json(const Json& cfg) {
  ChargeConfig c;
  if (cfg.contains("charge")) {
    const auto& j = cfg.at("charge");
    require_keys(j, {"system_power_kw", "speed_kmh", "initial_soc"}, "charge");
    c.system_power_kw = get_num(j, "system_power_kw", c.system_power_kw, "charge");
    c.speed_kmh = get_num(j, "speed_kmh", c.speed_kmh, "charge");
    c.initial_soc = get_num(j, "initial_soc", c.initial_soc, "charge");
  }
  c.validate();
  return c;
}

RoadGraph graph_from_json(Run& run, const Json& j) {
  require_keys(j, {"nodes", "edges", "json", "synthetic"}, "graph");
  if (j.contains("json")) return load_graph_json(run.input(get_str(j, "json", "graph")).string());
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    require_keys(s, {"lambda", "half_width"}, "graph.synthetic");
    return graph_from_realization(sample_mplp(get_num(s, "lambda", "graph.synthetic"),
                                              SimWindow{get_num(s, "half_width", "graph.synthetic")}, run.seed));
  }
  return load_graph_csv(run.input(get_str(j, "nodes", "graph")).string(),
                        run.input(get_str(j, "edges", "graph")).string());
}

std::vector<Point2> read_points_csv(const fs::path& p) {
  const auto t = read_csv(p.string(), {"x", "y"});
  std::vector<Point2> pts;
  for (const auto& row : t.rows) pts.push_back({row.as_double("x"), row.as_double("y")});
  return pts;
}

// "center": [x, y], or "center_from": {"zones": path} | {"points": path, "eps", "min_pts"}.
Point2 center_from_json(Run& run, const Json& cfg) {
  if (cfg.contains("center") && cfg.contains("center_from"))
    throw InvalidParameter("config: give at most one of 'center' and 'center_from'");
  if (cfg.contains("center")) return point_from_json(cfg.at("center"), "center");
  if (!cfg.contains("center_from")) return {0.0, 0.0};
  const auto& j = cfg.at("center_from");
  require_keys(j, {"zones", "points", "eps", "min_pts"}, "center_from");
  if (j.contains("zones")) return center_from_traffic(read_zones_csv(run.input(get_str(j, "zones", "center_from")).string()));
  return center_from_traffic(read_points_csv(run.input(get_str(j, "points", "center_from"))),
                             get_num(j, "eps", 200.0, "center_from"),
                             static_cast<std::size_t>(get_num(j, "min_pts", 50.0, "center_from")));
}

// Full spec, or a family completed by calibration to "calibrate_to".
ThinningSpec spec_for_graph(const Json& cfg, const RoadGraph& g, Point2 center) {
  const bool cal = cfg.contains("calibrate_to");
  const auto family = thinning_from_json(cfg.at("spec"), "spec", cal);
  if (!cal) return family;
  RoadGraph copy = g;
  copy.set_center_distances(strategy_centers(family, center));
  return calibrate(family, get_num(cfg, "calibrate_to", "config"), EmpiricalDistances{copy.center_distances(), {}});
}

std::vector<double> x_grid(const Json& j) {
  std::vector<double> xs;
  if (j.is_array()) {
    for (const auto& v : j) xs.push_back(v.get<double>());
  } else {
    require_keys(j, {"from", "to", "points"}, "x");
    const double a = get_num(j, "from", "x"), b = get_num(j, "to", "x");
    const auto n = static_cast<std::size_t>(get_num(j, "points", "x"));
    if (n == 0) throw InvalidParameter("x.points must be at least 1");
    for (std::size_t i = 0; i < n; ++i) xs.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  }
  if (xs.empty()) throw InvalidParameter("x: empty grid");
  return xs;
}

std::string cdf_csv(const EmpiricalCdf& e) {
  std::ostringstream os;
  e.write_csv(os);
  return os.str();
}

// ---- commands ----------------------------------------------------------------

void cmd_generate(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"lambda", "half_width", "spec", "seed"}, "config");
  const auto spec = thinning_from_json(c.at("spec"));
  auto city = sample_mplp(get_num(c, "lambda", "config"), SimWindow{get_num(c, "half_width", "config")}, run.seed);
  city = thin(std::move(city), spec, run.seed);
  std::ostringstream os;
  write_city_csv(os, city);
  run.write("city.csv", os.str());
  run.write_json("city_summary.json", {{"vertical_lines", city.vertical_lines.size()},
                                       {"horizontal_lines", city.horizontal_lines.size()},
                                       {"charging_lines", city.charging_count()},
                                       {"spec", to_json(spec)}});
}

void cmd_analyze(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"lambda", "spec", "pair", "x", "curves", "seed"}, "config");
  const double lambda = get_num(c, "lambda", "config");
  const auto spec = thinning_from_json(c.at("spec"));
  const auto sd = pair_from_json(c.at("pair"));
  const auto xs = x_grid(c.at("x"));
  std::vector<std::string> curves;
  for (const auto& v : c.at("curves")) curves.push_back(v.get<std::string>());
  if (curves.empty()) throw InvalidParameter("curves: empty list");
  auto eval = [&](const std::string& name, double x) -> double {
    auto axis_of = [&](const std::string& suffix) {
      if (suffix == "vertical") return Axis::vertical;
      if (suffix == "horizontal") return Axis::horizontal;
      throw InvalidParameter("curves: unknown curve '" + name + "'");
    };
    if (name.starts_with("nearest_charging_"))
      return analytic::cdf_nearest_charging_given_sd(spec, lambda, sd, axis_of(name.substr(17)), x);
    if (name.starts_with("nearest_noncharging_"))
      return analytic::cdf_nearest_noncharging_given_sd(spec, lambda, sd, axis_of(name.substr(20)), x);
    if (name.starts_with("gap_")) return analytic::cdf_gap_X(spec, lambda, sd, axis_of(name.substr(4)), x);
    if (name == "leaf_L35_d_n") return analytic::leaf_L35_metric_cdf(spec, lambda, sd, analytic::Metric::d_n, x);
    if (name == "leaf_L35_rho_c") {
      MetricCdfRequest req;
      req.method = CdfMethod::analytic_t3;
      req.event = EventId{3, 5};
      return metric_cdf_given_sd(spec, lambda, sd, analytic::Metric::rho_c, {x}, req)[0];
    }
    throw InvalidParameter("curves: unknown curve '" + name + "'");
  };
  std::string csv = "x";
  for (const auto& n : curves) csv += "," + n;
  csv += "\n";
  for (double x : xs) {
    csv += num(x);
    for (const auto& n : curves) csv += "," + num(eval(n, x));
    csv += "\n";
  }
  run.write("analytic.csv", csv);
  Json ev;
  ev["event_probabilities"] = analytic::event_probabilities(spec, sd);
  if (sd.orientation == Orientation::parallel) ev["t3_leaf_probabilities"] = analytic::t3_leaf_probabilities(spec, lambda, sd);
  run.write_json("events.json", ev);
}

void cmd_mc(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"lambda", "spec", "pair", "distribution", "n", "event", "half_width", "charging", "mode",
                   "axis", "max_distance", "seed"},
               "config");
  const double lambda = get_num(c, "lambda", "config");
  const auto spec = thinning_from_json(c.at("spec"));
  const auto placement = placement_from_json(c);
  const auto n = static_cast<std::size_t>(get_num(c, "n", "config"));
  const std::string mode = c.value("mode", "metrics");
  Json summary{{"n", n}, {"mode", mode}};
  if (mode == "nearest") {
    const std::string ax = c.value("axis", "horizontal");
    if (ax != "vertical" && ax != "horizontal") throw InvalidParameter("axis: expected 'vertical' or 'horizontal'");
    const auto r = sample_nearest_distances(spec, lambda, placement, ax == "vertical" ? Axis::vertical : Axis::horizontal,
                                            n, run.seed,
                                            c.contains("max_distance") ? std::optional(get_num(c, "max_distance", "config"))
                                                                       : std::nullopt);
    run.write("nearest_charging.csv", cdf_csv(r.charging));
    run.write("nearest_noncharging.csv", cdf_csv(r.non_charging));
    summary["censored_charging"] = r.charging.censored();
    summary["censored_noncharging"] = r.non_charging.censored();
    run.write_json("mc_summary.json", summary);
    return;
  }
  if (mode != "metrics") throw InvalidParameter("mode: expected 'metrics' or 'nearest'");
  McOptions opt;
  opt.threads = run.threads;
  opt.charging = charging_from_json(c);
  if (c.contains("half_width")) opt.half_width = get_num(c, "half_width", "config");
  MetricCdfs cdfs;
  if (c.contains("event")) {
    const auto* sd = std::get_if<SourceDestPair>(&placement);
    if (!sd) throw InvalidParameter("event conditioning needs a fixed 'pair'");
    const auto ev = EventId::parse(get_str(c, "event", "config"));
    const auto r = sample_metric_conditioned(spec, lambda, *sd, ev, n, run.seed, opt);
    cdfs = r.cdfs;
    summary["event"] = ev.name();
    summary["acceptance_rate"] = r.acceptance_rate;
    for (const auto& s : r.stages)
      summary["stages"].push_back({{"name", s.name}, {"proposals", s.proposals}, {"accepts", s.accepts}});
  } else {
    cdfs = sample_metric(spec, lambda, placement, n, run.seed, opt);
  }
  run.write("d_n.csv", cdf_csv(cdfs.d_n));
  run.write("rho_c.csv", cdf_csv(cdfs.rho_c));
  run.write("e_c.csv", cdf_csv(cdfs.e_c));
  run.write("charged.csv", cdf_csv(cdfs.charged));
  summary["censored_d_n"] = cdfs.d_n.censored();
  summary["zero_length_trips"] = n - cdfs.rho_c.n();
  run.write_json("mc_summary.json", summary);
}

struct AssignedGraph {
  RoadGraph graph;
  ThinningSpec spec;
  Point2 center;
};

AssignedGraph assigned_graph(Run& run) {
  const auto& c = run.cfg;
  auto g = graph_from_json(run, c.at("graph"));
  const Point2 center = center_from_json(run, c);
  const auto spec = spec_for_graph(c, g, center);
  return {assign_charging(std::move(g), spec, strategy_centers(spec, center), run.seed), spec, center};
}

void cmd_assign(Run& run) {
  require_keys(run.cfg, {"graph", "spec", "calibrate_to", "center", "center_from", "seed"}, "config");
  const auto a = assigned_graph(run);
  std::ostringstream os;
  write_assignment_csv(os, a.graph);
  run.write("assignment.csv", os.str());
  run.write_json("assign_summary.json",
                 {{"spec", to_json(a.spec)},
                  {"center", to_json(a.center)},
                  {"roads", a.graph.roads().size()},
                  {"expected_fraction", avg_charging_fraction(a.spec, EmpiricalDistances{a.graph.center_distances(), {}})},
                  {"charging_fraction", a.graph.charging_fraction()},
                  {"charging_length_fraction", a.graph.charging_length_fraction()}});
}

void cmd_route(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"graph", "spec", "calibrate_to", "center", "center_from", "trips", "zone_ids", "snap_radius",
                   "charging", "on_error", "seed"},
               "config");
  const auto a = assigned_graph(run);
  const auto trips = read_trips_csv(run.input(get_str(c, "trips", "config")).string(), c.value("zone_ids", false));
  const std::string on_error = c.value("on_error", "fail");
  if (on_error != "fail" && on_error != "skip") throw InvalidParameter("on_error: expected 'fail' or 'skip'");
  RouteOptions opt;
  opt.snap_radius = get_num(c, "snap_radius", opt.snap_radius, "config");
  opt.charging = charging_from_json(c);
  opt.zone_seed = run.seed;
  const TripRouter router(a.graph, opt);
  std::vector<std::string> rows(trips.size());
  parallel_for(trips.size(), run.threads, [&](std::size_t i) {
    std::string status = "ok";
    RouteResult r;
    try {
      r = router.route(trips[i], i);
    } catch (const Error& e) {
      if (on_error == "fail") throw;
      status = e.kind() == ErrorKind::snap_failure ? "snap_failure" : "routing_failure";
    }
    rows[i] = std::to_string(i) + "," + status + "," + num(r.total_length / 1000.0) + "," +
              num(r.charged_length / 1000.0) + "," + num(r.rho_c) + "," + (r.d_n ? num(*r.d_n) : "") + "," +
              num(r.e_c.value_or(0.0)) + "\n";
  });
  std::string csv = "trip,status,length_km,charged_km,rho_c_percent,d_n_m,e_c_kwh\n";
  for (const auto& r : rows) csv += r;
  run.write("routes.csv", csv);
}

void cmd_battery(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"trips", "ev", "charge", "seed"}, "config");
  const auto t = read_csv(run.input(get_str(c, "trips", "config")).string(), {"length_km", "rho_c_percent"});
  std::vector<TripLeg> legs;
  for (const auto& row : t.rows) {
    if (row.has("status") && row.get("status") != "ok") continue;
    const double rho = row.as_double("rho_c_percent");
    if (!(rho >= 0.0 && rho <= 100.0)) throw IngestionError(row.where() + ": rho_c_percent outside [0, 100]");
    legs.push_back({row.as_double("length_km"), rho / 100.0});
  }
  const auto model = ev_from_json(c);
  const auto tr = simulate_sequence(model, charge_from_json(c), legs);
  std::ostringstream os;
  write_trace_csv(os, tr);
  run.write("trace.csv", os.str());
  run.write_json("battery_summary.json",
                 {{"ev", model.name},
                  {"trips", legs.size()},
                  {"final_soc", tr.final_soc()},
                  {"depletion_km", tr.depletion_km ? Json(*tr.depletion_km) : Json(nullptr)},
                  {"clamp_loss_kwh", tr.clamp_loss_kwh}});
}

void cmd_fit(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"zones", "center", "r_min", "exclude", "points", "dbscan", "top_k", "seed"}, "config");
  auto zones = read_zones_csv(run.input(get_str(c, "zones", "config")).string());
  const Point2 center = c.contains("center") ? point_from_json(c.at("center"), "center") : center_from_traffic(zones);
  set_zone_distances(zones, center);
  const double r_min = c.contains("r_min") ? get_num(c, "r_min", "config") : default_fit_r_min(zones);
  std::set<std::int64_t> exclude;
  if (c.contains("exclude"))
    for (const auto& v : c.at("exclude")) exclude.insert(v.get<std::int64_t>());
  const auto f = fit_power_law(zones, r_min, exclude);
  Json out{{"alpha_hat", f.alpha_hat}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
           {"ci_lo", f.ci_lo},         {"ci_hi", f.ci_hi},         {"n_points", f.n_points},
           {"r_min", r_min},           {"center", to_json(center)}};
  if (c.contains("points")) {
    double eps = 200.0;
    std::size_t min_pts = 50;
    if (c.contains("dbscan")) {
      const auto& d = c.at("dbscan");
      require_keys(d, {"eps", "min_pts"}, "dbscan");
      eps = get_num(d, "eps", eps, "dbscan");
      min_pts = static_cast<std::size_t>(get_num(d, "min_pts", 50.0, "dbscan"));
    }
    const auto pts = read_points_csv(run.input(get_str(c, "points", "config")));
    const auto clusters = dbscan(pts, eps, min_pts);
    const auto top = top_k_cluster_centers(pts, clusters, static_cast<std::size_t>(get_num(c, "top_k", 5.0, "config")));
    Json centers = Json::array();
    for (const auto& p : top.centers) centers.push_back(to_json(p));
    out["clusters"] = clusters.cluster_count;
    out["cluster_centers"] = centers;
    if (top.warning) {
      out["warning"] = *top.warning;
      std::cerr << "chargegrid: warning: " << *top.warning << "\n";
    }
  }
  run.write_json("fit.json", out);
}

void cmd_compare(Run& run) {
  const auto& c = run.cfg;
  require_keys(c, {"graph", "center", "center_from", "trips", "zone_ids", "synthetic_trips", "target", "strategies",
                   "ev", "charge", "snap_radius", "seed"},
               "config");
  const auto graph = graph_from_json(run, c.at("graph"));
  const Point2 center = center_from_json(run, c);
  std::vector<TripRecord> trips;
  if (c.contains("trips") == c.contains("synthetic_trips"))
    throw InvalidParameter("config: give exactly one of 'trips' and 'synthetic_trips'");
  if (c.contains("trips")) {
    trips = read_trips_csv(run.input(get_str(c, "trips", "config")).string(), c.value("zone_ids", false));
  } else {
    const auto& s = c.at("synthetic_trips");
    require_keys(s, {"alpha", "r_min", "count"}, "synthetic_trips");
    trips = synthetic_power_law_trips(graph, center, get_num(s, "alpha", "synthetic_trips"),
                                      get_num(s, "r_min", "synthetic_trips"),
                                      static_cast<std::size_t>(get_num(s, "count", "synthetic_trips")), run.seed);
  }
  std::vector<Strategy> families;
  for (const auto& s : c.at("strategies")) {
    require_keys(s, {"name", "spec"}, "strategies[]");
    families.push_back({get_str(s, "name", "strategies[]"), thinning_from_json(s.at("spec"), "strategies[].spec", true)});
  }
  if (families.empty()) throw InvalidParameter("strategies: empty list");
  const auto strategies = calibrate_strategies(graph, center, families, get_num(c, "target", "config"));
  RouteOptions opt;
  opt.snap_radius = get_num(c, "snap_radius", opt.snap_radius, "config");
  opt.zone_seed = run.seed;
  const auto outcomes =
      compare_strategies(graph, trips, strategies, center, ev_from_json(c), charge_from_json(c), run.seed, opt);
  Json summary = Json::array();
  for (const auto& o : outcomes) {
    std::ostringstream os;
    write_trace_csv(os, o.trace);
    run.write("trace_" + o.name + ".csv", os.str());
    summary.push_back({{"strategy", o.name},
                       {"spec", to_json(o.spec)},
                       {"avg_fraction", o.avg_fraction},
                       {"realized_fraction", o.realized_fraction},
                       {"realized_length_fraction", o.realized_length_fraction},
                       {"final_soc", o.trace.final_soc()},
                       {"depletion_km", o.trace.depletion_km ? Json(*o.trace.depletion_km) : Json(nullptr)}});
  }
  run.write_json("compare_summary.json", {{"center", to_json(center)}, {"trips", trips.size()}, {"strategies", summary}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic EV charging road deployment on Manhattan line processes and road graphs"};
  app.set_version_flag("--version", std::string(CHARGEGRID_VERSION));
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  const std::vector<std::pair<const char*, void (*)(Run&)>> commands{
      {"generate", cmd_generate}, {"analyze", cmd_analyze}, {"mc", cmd_mc},   {"assign", cmd_assign},
      {"route", cmd_route},       {"battery", cmd_battery}, {"fit", cmd_fit}, {"compare", cmd_compare},
  };
  const std::map<std::string, std::string> help{
      {"generate", "sample and thin a Manhattan line process city"},
      {"analyze", "analytic distance and metric CDFs"},
      {"mc", "Monte Carlo metric CDFs with confidence bands"},
      {"assign", "charging assignment on a road graph"},
      {"route", "per-trip route metrics on a road graph"},
      {"battery", "battery trace over a trip sequence"},
      {"fit", "power-law traffic fit and cluster centers"},
      {"compare", "calibrated deployment strategy comparison"},
  };
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--seed", seed, "seed, overrides the config's 'seed'");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (default: CHARGEGRID_THREADS or 1)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Exit::ok : Exit::config;
  }

  Run run;
  try {
    run.command = app.get_subcommands().front()->get_name();
    run.config_path = config_path;
    run.config_text = read_file(config_path);
    try {
      run.cfg = Json::parse(run.config_text);
    } catch (const Json::parse_error& e) {
      throw InvalidParameter(config_path + ": " + e.what());
    }
    if (!run.cfg.is_object()) throw InvalidParameter(config_path + ": expected a JSON object");
    run.seed = seed ? *seed : run.cfg.value("seed", std::uint64_t{1});
    run.out = out_dir;
    run.threads = resolve_threads(threads);
    for (const auto& [name, fn] : commands)
      if (run.command == name) fn(run);
    run.manifest();
  } catch (const Error& e) {
    std::cerr << "chargegrid: error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const Json::exception& e) {
    std::cerr << "chargegrid: error: config: " << e.what() << "\n";
    return Exit::config;
  } catch (const std::exception& e) {
    std::cerr << "chargegrid: error: " << e.what() << "\n";
    return Exit::other;
  }
  return Exit::ok;
}
