#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "chargegrid/analytic.hpp"
#include "chargegrid/arrangement.hpp"
#include "chargegrid/empirical_cdf.hpp"
#include "chargegrid/parallel.hpp"
#include "chargegrid/source_dest.hpp"

namespace chargegrid {

/// Charging-status event: tree 1..4 are parallel trips, 5..8 perpendicular,
/// ordered (both charging, source only, destination only, neither). Leaf
/// 1..10 refines tree 3; leaf 0 means the whole tree.
struct EventId {
  int tree = 3;
  int leaf = 0;

  void validate() const {
    if (tree < 1 || tree > 8) throw InvalidParameter("event tree must be in 1..8");
    if (leaf < 0 || leaf > 10 || (leaf != 0 && tree != 3))
      throw InvalidParameter("leaf labels exist only for tree 3 (1..10)");
  }

  std::string name() const {
    return leaf == 0 ? "T" + std::to_string(tree)
                     : "L" + std::to_string(tree) + "," + std::to_string(leaf);
  }

  /// Parses "T3", "L3,5" or "L3_5".
  static EventId parse(std::string_view text) {
    EventId e;
    auto num = [&](std::string_view s) {
      if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
        throw InvalidParameter("bad event label: " + std::string(text));
      return std::stoi(std::string(s));
    };
    if (text.size() >= 2 && text[0] == 'T') {
      e.tree = num(text.substr(1));
    } else if (text.size() >= 4 && text[0] == 'L') {
      const auto sep = text.find_first_of(",_");
      if (sep == std::string_view::npos) throw InvalidParameter("bad event label: " + std::string(text));
      e.tree = num(text.substr(1, sep - 1));
      e.leaf = num(text.substr(sep + 1));
    } else {
      throw InvalidParameter("bad event label: " + std::string(text));
    }
    e.validate();
    return e;
  }

  friend bool operator==(const EventId&, const EventId&) = default;
};

inline int event_tree(Orientation o, bool source_charging, bool dest_charging) {
  const int base = o == Orientation::parallel ? 1 : 5;
  if (source_charging && dest_charging) return base;
  if (source_charging) return base + 1;
  if (dest_charging) return base + 2;
  return base + 3;
}

/// Leaf of tree 3 from the crossing roads met on the source road (distances
/// from the source, ascending, with charging flags), whether a charging
/// vertical road lies between the trip roads, and the axis of the route's
/// first charging segment (needed only to split leaves 8 and 9).
inline int classify_t3_leaf(const std::vector<std::pair<double, bool>>& crossing,
                            bool charging_between, double d_h,
                            std::optional<Axis> first_charging_axis) {
  const auto first_c = std::find_if(crossing.begin(), crossing.end(),
                                    [](const auto& c) { return c.second; });
  if (crossing.empty()) return 1;
  if (first_c == crossing.end()) {
    if (crossing.size() == 1) return 2;
    return charging_between ? 4 : 3;
  }
  const bool nearest_non_charging = !crossing.front().second;
  if (!charging_between) {
    if (!nearest_non_charging) return 7;
    return first_c->first - crossing.front().first < d_h ? 5 : 6;
  }
  if (!nearest_non_charging) return 10;
  return first_charging_axis == Axis::vertical ? 8 : 9;
}

/// Trip ends drawn at random: road coordinates from f_S and f_D, positions
/// along the roads from `along`, orientation parallel with the given chance.
struct DistributionPlacement {
  SourceDestDistribution roads;
  Density along;
  double parallel_fraction = 0.5;
};

using Placement = std::variant<SourceDestPair, DistributionPlacement>;

inline SourceDestPair draw_pair(const Placement& placement, Engine& eng) {
  if (const auto* sd = std::get_if<SourceDestPair>(&placement)) return *sd;
  const auto& p = std::get<DistributionPlacement>(placement);
  const double s = p.roads.source.sample(eng);
  const double d = p.roads.dest.sample(eng);
  const double a1 = p.along.sample(eng);
  const double a2 = p.along.sample(eng);
  if (uniform01(eng) < p.parallel_fraction)
    return SourceDestPair::parallel(s, d, std::abs(a2 - a1), a1, a2 >= a1 ? 1 : -1);
  return SourceDestPair::perpendicular(s, d, std::abs(a2 - s), a1, a2 >= s ? 1 : -1);
}

struct McOptions {
  std::optional<double> half_width;  // default: see default_half_width
  unsigned threads = 0;              // 0: CHARGEGRID_THREADS or 1
  ChargingModel charging;
};

/// Window large enough that routed trips stay well inside it: three times
/// the largest coordinate a trip touches, and at least 50 line spacings.
inline double default_half_width(const Placement& placement, double lambda) {
  double extent = 0.0;
  if (const auto* sd = std::get_if<SourceDestPair>(&placement)) {
    const auto a = sd->source_point();
    const auto b = sd->dest_point();
    extent = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y), std::abs(sd->d)});
  } else {
    const auto& p = std::get<DistributionPlacement>(placement);
    for (double v : {p.roads.source.lo(), p.roads.source.hi(), p.roads.dest.lo(),
                     p.roads.dest.hi(), p.along.lo(), p.along.hi()})
      extent = std::max(extent, std::abs(v));
  }
  return std::max(3.0 * extent, 50.0 / lambda);
}

/// Per-trip outputs of a Monte Carlo run, indexed by sample.
struct MetricSamples {
  std::vector<std::optional<double>> d_n;
  std::vector<double> rho_c;
  std::vector<double> e_c;
  std::vector<double> charged;
  std::vector<double> total;
  std::vector<int> tree;
  std::vector<int> leaf;  // 0 outside tree 3

  std::size_t size() const { return rho_c.size(); }
  void resize(std::size_t n) {
    d_n.resize(n);
    rho_c.resize(n);
    e_c.resize(n);
    charged.resize(n);
    total.resize(n);
    tree.resize(n);
    leaf.resize(n);
  }
};

struct MetricCdfs {
  EmpiricalCdf d_n;      // meters, censored trips count in n
  EmpiricalCdf rho_c;    // percent, zero-length trips excluded
  EmpiricalCdf e_c;      // kWh
  EmpiricalCdf charged;  // meters
};

inline MetricCdfs to_cdfs(const MetricSamples& s) {
  std::vector<double> dn, rho, ec, ch;
  std::size_t moving = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.d_n[i]) dn.push_back(*s.d_n[i]);
    if (s.total[i] > 0.0) {
      rho.push_back(s.rho_c[i]);
      ++moving;
    }
    ec.push_back(s.e_c[i]);
    ch.push_back(s.charged[i]);
  }
  return {EmpiricalCdf(std::move(dn), s.size()), EmpiricalCdf(std::move(rho), moving),
          EmpiricalCdf(std::move(ec)), EmpiricalCdf(std::move(ch))};
}

namespace detail {

inline LineField make_trip_field(const ThinningSpec& spec, double lambda, const SimWindow& window,
                                 std::uint64_t seed, std::uint64_t stream,
                                 const SourceDestPair& sd, bool fs, bool fd) {
  LineField field(lambda, spec, window, seed, stream);
  field.add_line(Axis::vertical, {sd.s, fs});
  if (!(sd.orientation == Orientation::parallel && sd.d == sd.s))
    field.add_line(sd.dest_axis(), {sd.d, fd});
  return field;
}

inline OpenInterval between_vertical(const SourceDestPair& sd) {
  return {std::min(sd.s, sd.d), std::max(sd.s, sd.d)};
}
inline OpenInterval between_crossing(const SourceDestPair& sd) {
  const double end = sd.along + sd.y_dir * sd.d_v;
  return {std::min(sd.along, end), std::max(sd.along, end)};
}

inline std::vector<LineRoad> strictly_inside(std::vector<LineRoad> lines, OpenInterval iv) {
  std::erase_if(lines, [&](const LineRoad& l) { return !iv.contains(l.coord); });
  return lines;
}

inline std::vector<std::pair<double, bool>> by_distance(const std::vector<LineRoad>& lines,
                                                        double from) {
  std::vector<std::pair<double, bool>> out;
  for (const auto& l : lines) out.emplace_back(std::abs(l.coord - from), l.charging);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::optional<Axis> first_charging_axis(const ArrangementRoute& r) {
  for (std::size_t k = 0; k < r.route.segments.size(); ++k)
    if (r.route.segments[k].charging) return r.segment_axes[k];
  return std::nullopt;
}

struct TripOutcome {
  RouteResult route;
  int tree = 0;
  int leaf = 0;
  std::optional<Axis> first_charging;
};

inline TripOutcome run_trip(LineField& field, const SourceDestPair& sd, bool fs, bool fd,
                            const ChargingModel& charging) {
  auto lines_in = [&field](Axis a, double lo, double hi) { return field.lines_in(a, lo, hi); };
  auto ar = route_on_lines(lines_in, field.window(), field.lambda(), sd.source_point(),
                           sd.dest_point(), charging);
  TripOutcome out;
  out.first_charging = first_charging_axis(ar);
  out.tree = event_tree(sd.orientation, fs, fd);
  if (out.tree == 3) {
    const auto cv = between_crossing(sd);
    const auto vv = between_vertical(sd);
    const auto crossing = strictly_inside(field.lines_in(Axis::horizontal, cv.lo, cv.hi), cv);
    const auto verticals = strictly_inside(field.lines_in(Axis::vertical, vv.lo, vv.hi), vv);
    const bool charging_between = std::any_of(verticals.begin(), verticals.end(),
                                              [](const LineRoad& l) { return l.charging; });
    out.leaf = classify_t3_leaf(by_distance(crossing, sd.along), charging_between, sd.d_h,
                                out.first_charging);
  }
  out.route = std::move(ar.route);
  return out;
}

inline void store(MetricSamples& s, std::size_t i, const TripOutcome& t) {
  s.d_n[i] = t.route.d_n;
  s.rho_c[i] = t.route.rho_c;
  s.e_c[i] = t.route.e_c.value_or(0.0);
  s.charged[i] = t.route.charged_length;
  s.total[i] = t.route.total_length;
  s.tree[i] = t.tree;
  s.leaf[i] = t.leaf;
}

inline std::pair<bool, bool> draw_flags(const ThinningSpec& spec, const SourceDestPair& sd,
                                        Engine& eng) {
  const bool fs = uniform01(eng) < eval_g_line(spec, Axis::vertical, sd.s);
  if (sd.orientation == Orientation::parallel && sd.d == sd.s) return {fs, fs};
  const bool fd = uniform01(eng) < eval_g_line(spec, sd.dest_axis(), sd.d);
  return {fs, fd};
}

}  // namespace detail

/// Monte Carlo estimate of the trip metrics: n independent (realization,
/// trip) pairs, each routed with the lexicographic driver model.
inline MetricSamples sample_metric_samples(const ThinningSpec& spec, double lambda,
                                           const Placement& placement, std::size_t n,
                                           std::uint64_t seed, const McOptions& opt = {}) {
  validate(spec);
  if (!(lambda > 0.0)) throw InvalidParameter("line density lambda must be positive");
  if (n == 0) throw InvalidParameter("sample count must be at least 1");
  const SimWindow window(opt.half_width.value_or(default_half_width(placement, lambda)));
  MetricSamples out;
  out.resize(n);
  parallel_for(n, resolve_threads(opt.threads), [&](std::size_t i) {
    auto eng = make_stream(seed, StreamPurpose::placement, {i});
    const auto sd = draw_pair(placement, eng);
    const auto [fs, fd] = detail::draw_flags(spec, sd, eng);
    auto field = detail::make_trip_field(spec, lambda, window, seed, i, sd, fs, fd);
    detail::store(out, i, detail::run_trip(field, sd, fs, fd, opt.charging));
  });
  return out;
}

inline MetricCdfs sample_metric(const ThinningSpec& spec, double lambda, const Placement& placement,
                                std::size_t n, std::uint64_t seed, const McOptions& opt = {}) {
  return to_cdfs(sample_metric_samples(spec, lambda, placement, n, seed, opt));
}

/// Distances from the source, along one axis, to the nearest charging and
/// nearest non-charging road of the thinned process (walking toward the
/// destination). Roads beyond max_distance are not searched; such trials
/// are censored.
struct NearestDistanceSamples {
  EmpiricalCdf charging;
  EmpiricalCdf non_charging;
};

inline NearestDistanceSamples sample_nearest_distances(const ThinningSpec& spec, double lambda,
                                                       const Placement& placement, Axis axis,
                                                       std::size_t n, std::uint64_t seed,
                                                       std::optional<double> max_distance = {}) {
  validate(spec);
  if (!(lambda > 0.0)) throw InvalidParameter("line density lambda must be positive");
  const double reach = max_distance.value_or(200.0 / lambda);
  std::vector<double> dc, dnc;
  std::exponential_distribution<double> gap(lambda);
  for (std::size_t i = 0; i < n; ++i) {
    auto eng = make_stream(seed, StreamPurpose::placement, {i});
    const auto sd = draw_pair(placement, eng);
    const double start = sd.start(axis);
    const int dir = sd.direction(axis);
    std::optional<double> c, nc;
    for (double t = gap(eng); t <= reach && !(c && nc); t += gap(eng)) {
      const bool charging = uniform01(eng) < eval_g_line(spec, axis, start + dir * t);
      auto& slot = charging ? c : nc;
      if (!slot) slot = t;
    }
    if (c) dc.push_back(*c);
    if (nc) dnc.push_back(*nc);
  }
  return {EmpiricalCdf(std::move(dc), n), EmpiricalCdf(std::move(dnc), n)};
}

namespace detail {

inline constexpr std::uint64_t pilot_max_proposals = 1'000'000;
inline constexpr std::uint64_t pilot_accepts = 100;
inline constexpr double degenerate_rate = 1e-4;

/// Pilot for one rejection stage: stops at 100 accepts or 10^6 proposals and
/// reports the stage degenerate when its rate is below 10^-4.
template <class Propose>
std::pair<std::uint64_t, std::uint64_t> pilot_stage(const std::string& name, Propose&& propose) {
  std::uint64_t tried = 0, ok = 0;
  while (tried < pilot_max_proposals && ok < pilot_accepts) {
    ++tried;
    if (propose()) ++ok;
  }
  if (static_cast<double>(ok) < degenerate_rate * static_cast<double>(tried))
    throw ConditioningDegenerate("stage '" + name + "' accepted " + std::to_string(ok) + " of " +
                                 std::to_string(tried) + " proposals");
  return {tried, ok};
}

}  // namespace detail

/// Proposal counts of one conditioning stage.
struct StageStats {
  std::string name;
  std::uint64_t proposals = 0;
  std::uint64_t accepts = 0;
  double rate() const {
    return proposals ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
  }
};

struct ConditionedResult {
  MetricSamples samples;
  MetricCdfs cdfs;
  double acceptance_rate = 0.0;  // estimate of P(event | S, D)
  std::vector<StageStats> stages;
};

/// Samples trips conditioned on an event. The event factors into
/// independent components, each handled by its own stage: the two road
/// flags (rejection), the charging state of the vertical roads between the
/// trip roads (direct sampling of the non-charging process when no charging
/// road may appear, rejection otherwise), the crossing roads on the source
/// road (rejection) and, for leaves 8/9, the routed driver choice
/// (rejection of the whole configuration). The acceptance rate is the
/// product of the stage rates.
inline ConditionedResult sample_metric_conditioned(const ThinningSpec& spec, double lambda,
                                                   const SourceDestPair& sd, EventId event,
                                                   std::size_t n, std::uint64_t seed,
                                                   const McOptions& opt = {}) {
  validate(spec);
  event.validate();
  sd.validate();
  if (!(lambda > 0.0)) throw InvalidParameter("line density lambda must be positive");
  if (n == 0) throw InvalidParameter("sample count must be at least 1");
  const SimWindow window(opt.half_width.value_or(default_half_width(sd, lambda)));

  enum class Between { any, empty, nonempty };
  Between between = Between::any;
  std::function<bool(const std::vector<std::pair<double, bool>>&)> crossing_ok;
  std::optional<Axis> route_axis;
  if (event.leaf != 0) {
    const int L = event.leaf;
    if (L == 3 || L == 5 || L == 6 || L == 7) between = Between::empty;
    if (L == 4 || L == 8 || L == 9 || L == 10) between = Between::nonempty;
    if (L == 8) route_axis = Axis::vertical;
    if (L == 9) route_axis = Axis::horizontal;
    crossing_ok = [L, d_h = sd.d_h](const std::vector<std::pair<double, bool>>& c) {
      const int leaf = classify_t3_leaf(c, L == 4 || L >= 8, d_h, std::nullopt);
      if (L == 8 || L == 9) return leaf == 9;
      return leaf == L;
    };
  }

  const auto vb = detail::between_vertical(sd);
  const auto cb = detail::between_crossing(sd);
  auto sample_between = [&](Engine& eng, OpenInterval iv, Axis axis, bool drop_charging) {
    std::vector<LineRoad> lines;
    for (double c : sample_ppp(eng, lambda, iv.lo, iv.hi)) {
      if (!iv.contains(c)) continue;
      const bool charging = uniform01(eng) < eval_g_line(spec, axis, c);
      if (charging && drop_charging) continue;
      lines.push_back({c, charging});
    }
    return lines;
  };
  auto flags_ok = [&](Engine& eng) {
    const auto [fs, fd] = detail::draw_flags(spec, sd, eng);
    return event_tree(sd.orientation, fs, fd) == event.tree;
  };
  auto verticals_ok = [&](const std::vector<LineRoad>& v) {
    return std::any_of(v.begin(), v.end(), [](const LineRoad& l) { return l.charging; });
  };

  std::vector<StageStats> stages;
  auto pilot_eng = make_stream(seed, StreamPurpose::rejection, {~std::uint64_t{0}});
  {
    auto [t, a] = detail::pilot_stage("flags", [&] { return flags_ok(pilot_eng); });
    stages.push_back({"flags", t, a});
  }
  double void_rate = 1.0;
  if (between == Between::empty) {
    // Direct sampling needs no rejection; its probability is estimated by
    // counting empty draws of the charging roads alone.
    std::uint64_t trials = 0, empty = 0;
    const std::uint64_t max_trials = 10'000'000;
    std::exponential_distribution<double> gap(lambda);
    while (trials < max_trials && (empty < 200 || trials - empty < 200)) {
      ++trials;
      bool hit = false;
      for (double t = vb.lo + gap(pilot_eng); t < vb.hi; t += gap(pilot_eng))
        if (uniform01(pilot_eng) < eval_g_line(spec, Axis::vertical, t)) {
          hit = true;
          break;
        }
      if (!hit) ++empty;
    }
    if (empty == 0)
      throw ConditioningDegenerate("no draw left the roads between source and destination "
                                   "free of charging roads");
    stages.push_back({"between_empty", trials, empty});
    void_rate = static_cast<double>(empty) / static_cast<double>(trials);
  } else if (between == Between::nonempty) {
    auto [t, a] = detail::pilot_stage("between_nonempty", [&] {
      return verticals_ok(sample_between(pilot_eng, vb, Axis::vertical, false));
    });
    stages.push_back({"between_nonempty", t, a});
  }
  if (crossing_ok) {
    auto [t, a] = detail::pilot_stage("crossing", [&] {
      return crossing_ok(detail::by_distance(sample_between(pilot_eng, cb, Axis::horizontal, false),
                                             sd.along));
    });
    stages.push_back({"crossing", t, a});
  }

  // Per-sample proposal counts for flags, between_nonempty, crossing, route.
  std::vector<std::array<std::uint64_t, 8>> counts(n);
  ConditionedResult result;
  result.samples.resize(n);
  parallel_for(n, resolve_threads(opt.threads), [&](std::size_t i) {
    auto eng = make_stream(seed, StreamPurpose::rejection, {i});
    auto& cnt = counts[i];
    bool fs = false, fd = false;
    for (;;) {
      ++cnt[0];
      auto [a, b] = detail::draw_flags(spec, sd, eng);
      if (event_tree(sd.orientation, a, b) == event.tree) {
        ++cnt[1];
        fs = a;
        fd = b;
        break;
      }
    }
    for (std::uint64_t attempt = 0;; ++attempt) {
      std::vector<LineRoad> verticals, crossing;
      if (between == Between::empty) {
        verticals = sample_between(eng, vb, Axis::vertical, true);
      } else if (between == Between::nonempty) {
        for (;;) {
          ++cnt[2];
          verticals = sample_between(eng, vb, Axis::vertical, false);
          if (verticals_ok(verticals)) {
            ++cnt[3];
            break;
          }
        }
      }
      if (crossing_ok) {
        for (;;) {
          ++cnt[4];
          crossing = sample_between(eng, cb, Axis::horizontal, false);
          if (crossing_ok(detail::by_distance(crossing, sd.along))) {
            ++cnt[5];
            break;
          }
        }
      }
      auto field = detail::make_trip_field(spec, lambda, window, seed,
                                           stream_key(i, {attempt}), sd, fs, fd);
      if (between != Between::any) field.set_override(Axis::vertical, vb, verticals);
      if (crossing_ok) field.set_override(Axis::horizontal, cb, crossing);
      auto trip = detail::run_trip(field, sd, fs, fd, opt.charging);
      if (route_axis) {
        ++cnt[6];
        if (trip.first_charging != route_axis) {
          if (cnt[6] >= detail::pilot_max_proposals && cnt[7] == 0)
            throw ConditioningDegenerate("stage 'route' never accepted");
          continue;
        }
        ++cnt[7];
      }
      detail::store(result.samples, i, trip);
      break;
    }
  });

  auto add = [&](const std::string& name, std::size_t k) {
    for (auto& s : stages)
      if (s.name == name) {
        for (const auto& c : counts) {
          s.proposals += c[k];
          s.accepts += c[k + 1];
        }
        return;
      }
    StageStats s{name, 0, 0};
    for (const auto& c : counts) {
      s.proposals += c[k];
      s.accepts += c[k + 1];
    }
    stages.push_back(s);
  };
  add("flags", 0);
  if (between == Between::nonempty) add("between_nonempty", 2);
  if (crossing_ok) add("crossing", 4);
  if (route_axis) {
    add("route", 6);
  }
  double rate = void_rate;
  for (const auto& s : stages)
    if (s.name != "between_empty") rate *= s.rate();
  result.acceptance_rate = rate;
  result.stages = std::move(stages);
  result.cdfs = to_cdfs(result.samples);
  return result;
}

/// Monte Carlo gap between the nearest non-charging road and the next
/// charging road along an axis, conditioned on both lying within the
/// separation (non-charging first).
inline EmpiricalCdf sample_gap(const ThinningSpec& spec, double lambda, const SourceDestPair& sd,
                               Axis axis, std::size_t n, std::uint64_t seed,
                               double* acceptance_rate = nullptr) {
  validate(spec);
  const double sep = sd.separation(axis);
  const double start = sd.start(axis);
  const int dir = sd.direction(axis);
  auto eng = make_stream(seed, StreamPurpose::rejection, {static_cast<std::uint64_t>(axis)});
  std::exponential_distribution<double> gap(lambda);
  std::vector<double> xs;
  std::uint64_t tried = 0;
  while (xs.size() < n) {
    ++tried;
    std::optional<double> c, nc;
    for (double t = gap(eng); t < sep && !c; t += gap(eng)) {
      const bool charging = uniform01(eng) < eval_g_line(spec, axis, start + dir * t);
      if (charging) c = t;
      else if (!nc) nc = t;
    }
    if (c && nc) xs.push_back(*c - *nc);
    if (tried >= detail::pilot_max_proposals &&
        static_cast<double>(xs.size()) < detail::degenerate_rate * static_cast<double>(tried))
      throw ConditioningDegenerate("gap conditioning event is too rare");
  }
  if (acceptance_rate) *acceptance_rate = static_cast<double>(n) / static_cast<double>(tried);
  return EmpiricalCdf(std::move(xs));
}

enum class CdfMethod { analytic_t3, monte_carlo, hybrid };

struct MetricCdfRequest {
  CdfMethod method = CdfMethod::hybrid;
  std::optional<EventId> event;  // analytic-T3 needs leaf L3,5
  std::size_t n = 20'000;
  std::uint64_t seed = 1;
  McOptions mc;
};

/// CDF of D_n (meters) or rho_c (percent) on a grid of x values.
///  - analytic_t3: only the leaf L3,5 terms the closed forms cover;
///  - monte_carlo: the unconditioned empirical CDF;
///  - hybrid: P(L3,5) * Psi(x) from the closed forms plus the Monte Carlo
///    mass of every other outcome.
inline std::vector<double> metric_cdf_given_sd(const ThinningSpec& spec, double lambda,
                                               const SourceDestPair& sd, analytic::Metric metric,
                                               const std::vector<double>& xs,
                                               const MetricCdfRequest& req = {}) {
  auto psi = [&](double x) {
    const double arg =
        metric == analytic::Metric::d_n ? x : analytic::rho_c_percent_to_distance(sd, x);
    return analytic::leaf_L35_metric_cdf(spec, lambda, sd, metric, arg);
  };
  std::vector<double> out;
  out.reserve(xs.size());
  if (req.method == CdfMethod::analytic_t3) {
    if (!req.event || *req.event != EventId{3, 5})
      throw NotImplementedByPaper("closed forms exist only for leaf L3,5 of tree T3");
    for (double x : xs) out.push_back(psi(x));
    return out;
  }
  const auto samples = sample_metric_samples(spec, lambda, sd, req.n, req.seed, req.mc);
  const bool use_leaf = req.method == CdfMethod::hybrid && sd.orientation == Orientation::parallel;
  double weight = 0.0;
  if (use_leaf) weight = analytic::t3_leaf_probabilities(spec, lambda, sd)[4];
  std::vector<double> rest;
  std::size_t total = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const bool leaf35 = use_leaf && samples.tree[i] == 3 && samples.leaf[i] == 5;
    if (metric == analytic::Metric::rho_c && samples.total[i] <= 0.0) continue;
    ++total;
    if (leaf35) continue;
    if (metric == analytic::Metric::d_n) {
      if (samples.d_n[i]) rest.push_back(*samples.d_n[i]);
    } else {
      rest.push_back(samples.rho_c[i]);
    }
  }
  const EmpiricalCdf mc(std::move(rest), std::max<std::size_t>(total, 1));
  for (double x : xs) {
    double v = mc(x);
    if (use_leaf && weight > 0.0) v += weight * psi(x);
    out.push_back(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace chargegrid
