#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chargegrid/calibration.hpp"
#include "chargegrid/error.hpp"
#include "chargegrid/roadnet.hpp"

namespace chargegrid {

struct EvModel {
  std::string name;
  double consumption_kwh_per_km = 0.0;
  double capacity_kwh = 0.0;

  void validate() const {
    if (!(consumption_kwh_per_km > 0.0) || !(capacity_kwh > 0.0))
      throw InvalidParameter("EV consumption rate and capacity must be positive");
  }
};

inline const std::array<EvModel, 3>& ev_presets() {
  static const std::array<EvModel, 3> presets{{
      {"tesla_model_3_range_plus", 0.149129, 50.0},
      {"chevrolet_bolt", 0.180197, 60.0},
      {"nissan_leaf", 0.186411, 40.0},
  }};
  return presets;
}

inline EvModel ev_preset(const std::string& name) {
  for (const auto& m : ev_presets())
    if (m.name == name) return m;
  throw InvalidParameter("unknown EV model " + name);
}

struct ChargeConfig {
  double system_power_kw = 20.0;
  double speed_kmh = 20.0;
  double initial_soc = 0.5;

  void validate() const {
    if (!(system_power_kw > 0.0) || !(speed_kmh > 0.0))
      throw InvalidParameter("charging power and speed must be positive");
    if (!(initial_soc >= 0.0 && initial_soc <= 1.0))
      throw InvalidParameter("initial state of charge must lie in [0, 1]");
  }
};

struct TripLeg {
  double length_km = 0.0;
  double rho_c = 0.0;  // charged fraction of the trip, in [0, 1]
};

/// Energy gained on charging roads minus energy consumed, kWh.
inline double trip_energy_delta(const EvModel& model, const ChargeConfig& cfg, double length_km,
                                double rho_c) {
  if (length_km < 0.0) throw InvalidParameter("trip length must be non-negative");
  if (!(rho_c >= 0.0 && rho_c <= 1.0)) throw InvalidParameter("rho_c fraction must lie in [0, 1]");
  return cfg.system_power_kw * (length_km / cfg.speed_kmh) * rho_c -
         model.consumption_kwh_per_km * length_km;
}

struct TracePoint {
  double cumulative_km = 0.0;
  double soc = 0.0;
  bool depleted = false;
};

struct BatteryTrace {
  std::vector<TracePoint> points;
  std::optional<double> depletion_km;
  double clamp_loss_kwh = 0.0;  // energy discarded at full charge

  double final_soc() const { return points.back().soc; }
};

/// Folds trips into a state-of-charge trace: one point per trip end, plus
/// the depletion point when the battery runs empty mid-trip. Charge above
/// capacity is discarded at the end of each trip; after depletion the
/// state stays at zero.
inline BatteryTrace simulate_sequence(const EvModel& model, const ChargeConfig& cfg,
                                      const std::vector<TripLeg>& trips) {
  model.validate();
  cfg.validate();
  BatteryTrace tr;
  double energy = cfg.initial_soc * model.capacity_kwh;
  double km = 0.0;
  tr.points.push_back({0.0, cfg.initial_soc, false});
  for (const auto& t : trips) {
    const double delta = trip_energy_delta(model, cfg, t.length_km, t.rho_c);
    if (tr.depletion_km) {
      km += t.length_km;
      tr.points.push_back({km, 0.0, true});
      continue;
    }
    if (energy + delta < 0.0) {
      tr.depletion_km = km + t.length_km * energy / -delta;
      tr.points.push_back({*tr.depletion_km, 0.0, true});
      km += t.length_km;
      energy = 0.0;
      tr.points.push_back({km, 0.0, true});
      continue;
    }
    energy += delta;
    if (energy > model.capacity_kwh) {
      tr.clamp_loss_kwh += energy - model.capacity_kwh;
      energy = model.capacity_kwh;
    }
    km += t.length_km;
    tr.points.push_back({km, energy / model.capacity_kwh, false});
  }
  return tr;
}

/// CSV rows cumulative_km,soc_percent,depleted.
inline void write_trace_csv(std::ostream& os, const BatteryTrace& tr) {
  os << "cumulative_km,soc_percent,depleted\n";
  const auto old = os.precision(12);
  for (const auto& p : tr.points) os << p.cumulative_km << ',' << 100.0 * p.soc << ',' << (p.depleted ? 1 : 0) << '\n';
  os.precision(old);
}

struct Strategy {
  std::string name;
  ThinningSpec spec;
};

struct StrategyOutcome {
  std::string name;
  ThinningSpec spec;
  double avg_fraction = 0.0;       // expected, over the graph's road distances
  double realized_fraction = 0.0;  // share of roads actually charging
  double realized_length_fraction = 0.0;
  BatteryTrace trace;
};

/// Calibrates each family to the same average charging fraction under the
/// graph's empirical road center distances.
inline std::vector<Strategy> calibrate_strategies(const RoadGraph& graph, Point2 city_center,
                                                  const std::vector<Strategy>& families,
                                                  double target) {
  std::vector<Strategy> out;
  for (const auto& f : families) {
    RoadGraph g = graph;
    g.set_center_distances(strategy_centers(f.spec, city_center));
    out.push_back({f.name, calibrate(f.spec, target, EmpiricalDistances{g.center_distances(), {}})});
  }
  return out;
}

/// Battery traces of one vehicle driving the same trip sequence under each
/// strategy's charging assignment.
inline std::vector<StrategyOutcome> compare_strategies(const RoadGraph& graph,
                                                       const std::vector<TripRecord>& trips,
                                                       const std::vector<Strategy>& strategies,
                                                       Point2 city_center, const EvModel& model,
                                                       const ChargeConfig& cfg, std::uint64_t seed,
                                                       RouteOptions route_opt = {}) {
  route_opt.charging = ChargingModel{cfg.system_power_kw, cfg.speed_kmh};
  std::vector<StrategyOutcome> out;
  for (const auto& s : strategies) {
    const auto centers = strategy_centers(s.spec, city_center);
    const RoadGraph g = assign_charging(graph, s.spec, centers, seed);
    const TripRouter router(g, route_opt);
    std::vector<TripLeg> legs;
    for (std::size_t i = 0; i < trips.size(); ++i) {
      const auto r = router.route(trips[i], i);
      legs.push_back({r.total_length / 1000.0, r.total_length > 0.0 ? r.rho_c / 100.0 : 0.0});
    }
    StrategyOutcome o{s.name, s.spec, 0.0, g.charging_fraction(), g.charging_length_fraction(),
                      simulate_sequence(model, cfg, legs)};
    o.avg_fraction = avg_charging_fraction(s.spec, EmpiricalDistances{g.center_distances(), {}});
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace chargegrid
