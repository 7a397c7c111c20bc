#pragma once

#include <initializer_list>
#include <set>
#include <string>

#include "json.hpp"

#include "chargegrid/error.hpp"
#include "chargegrid/thinning.hpp"

namespace chargegrid {

using Json = nlohmann::json;

/// Rejects keys of `obj` outside `allowed`, naming the first offender.
inline void require_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw InvalidParameter(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.contains(k)) throw InvalidParameter(where + ": unknown key '" + k + "'");
}

inline Json to_json(Point2 p) { return Json::array({p.x, p.y}); }

inline Point2 point_from_json(const Json& j, const std::string& where) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) {
    require_keys(j, {"x", "y"}, where);
    return {j.at("x").get<double>(), j.at("y").get<double>()};
  }
  throw InvalidParameter(where + ": expected [x, y] or {\"x\", \"y\"}");
}

inline Json to_json(const ThinningSpec& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return {{"kind", "uniform"}, {"p", s.p}};
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return {{"kind", "power_law"}, {"alpha", s.alpha}, {"r_min", s.r_min}};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"kind", "gaussian"}, {"sigma", s.sigma}, {"peak", s.peak}};
        } else {
          Json centers = Json::array();
          for (const auto& c : s.centers) centers.push_back(to_json(c));
          return {{"kind", "multi_center_power_law"},
                  {"alpha", s.alpha},
                  {"r_min", s.r_min},
                  {"centers", centers}};
        }
      },
      spec);
}

/// Tagged thinning spec, e.g. {"kind":"power_law","alpha":1.0,"r_min":500.0}.
/// With `partial`, the free calibration parameter may be omitted.
inline ThinningSpec thinning_from_json(const Json& j, const std::string& where = "spec",
                                       bool partial = false) {
  try {
    if (!j.is_object() || !j.contains("kind")) throw InvalidParameter(where + ": missing 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    auto num = [&](const char* key, double fallback) {
      if (j.contains(key)) return j.at(key).get<double>();
      if (partial) return fallback;
      throw InvalidParameter(where + ": missing '" + std::string(key) + "'");
    };
    ThinningSpec spec;
    if (kind == "uniform") {
      require_keys(j, {"kind", "p"}, where);
      spec = Uniform{num("p", 0.5)};
    } else if (kind == "power_law") {
      require_keys(j, {"kind", "alpha", "r_min"}, where);
      spec = PowerLaw{num("alpha", 1.0), j.at("r_min").get<double>()};
    } else if (kind == "gaussian") {
      require_keys(j, {"kind", "sigma", "peak"}, where);
      spec = Gaussian{num("sigma", 1000.0), j.value("peak", 1.0)};
    } else if (kind == "multi_center_power_law") {
      require_keys(j, {"kind", "alpha", "r_min", "centers"}, where);
      MultiCenterPowerLaw m{num("alpha", 1.0), j.at("r_min").get<double>(), {}};
      std::size_t k = 0;
      for (const auto& c : j.at("centers"))
        m.centers.push_back(point_from_json(c, where + ".centers[" + std::to_string(k++) + "]"));
      spec = m;
    } else {
      throw InvalidParameter(where + ": unknown kind '" + kind + "'");
    }
    validate(spec);
    return spec;
  } catch (const Json::exception& e) {
    throw InvalidParameter(where + ": " + e.what());
  }
}

}  // namespace chargegrid
