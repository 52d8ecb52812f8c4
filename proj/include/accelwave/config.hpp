#pragma once

// JSON configuration: material model, optional analysis/sim/sweep blocks.
//
//   {"kind": "solid",
//    "solid": {"rho_star": 929, "E1": 2.12e6, "E2": 3e6, "tau0": 0.1,
//              "elastic": {"kind": "quadratic_cubic", "R": 1.63}},
//    "analysis": {"pi0": 100},
//    "sim": {"x_min": 0, "x_max": 80, "n_cells": 2000, "cfl": 0.8,
//            "x_front": 20, "pi0_over_pi_cr": 0.1, "t_end": 0.68},
//    "sweep": {"parameter": "solid.tau0", "from": 0.01, "to": 1,
//              "count": 9, "spacing": "log"}}

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "accelwave/constitutive.hpp"
#include "accelwave/errors.hpp"

namespace accelwave {

using Json = nlohmann::json;

struct SimConfig {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 1000;
  double cfl = 0.8;
  double x_front = 0.5;
  std::optional<double> pi0;             // absolute [m/s^2]
  std::optional<double> pi0_over_pi_cr;  // relative to the critical amplitude
  std::optional<double> ramp_width;      // default: 10% of the domain
  double t_end = 0.0;
  std::optional<double> output_every;    // default: t_end / 20
};

enum class Spacing { Linear, Log };

struct SweepConfig {
  std::string parameter;  // dotted path into the material block, e.g. "solid.tau0"
  double from = 0.0;
  double to = 0.0;
  std::size_t count = 0;
  Spacing spacing = Spacing::Linear;

  std::vector<double> values() const {
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) return {from};
    for (std::size_t i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back(spacing == Spacing::Log
                        ? std::exp(std::log(from) + f * (std::log(to) - std::log(from)))
                        : from + f * (to - from));
    }
    // pin the end points exactly
    out.front() = from;
    out.back() = to;
    return out;
  }
};

struct ScenarioConfig {
  MaterialModel material;
  std::optional<double> analysis_pi0;
  std::optional<SimConfig> sim;
  std::optional<SweepConfig> sweep;
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline const Json& require_object(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(where + "." + key + ": expected an object");
  return v;
}

inline double require_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::optional<double> optional_number(const Json& obj, const char* key,
                                             const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return require_number(obj, key, where);
}

inline std::string require_string(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline SolidParams parse_solid(const Json& j) {
  const std::string w = "solid";
  reject_unknown(j, w, {"rho_star", "E1", "E2", "tau0", "elastic"});
  SolidParams s;
  s.rho_star = require_number(j, "rho_star", w);
  s.E2 = require_number(j, "E2", w);
  s.tau0 = require_number(j, "tau0", w);
  const Json& e = require_object(j, "elastic", w);
  const std::string kind = require_string(e, "kind", w + ".elastic");
  const std::optional<double> E1 = optional_number(j, "E1", w);
  if (kind == "quadratic_cubic") {
    reject_unknown(e, w + ".elastic", {"kind", "R", "nu_bar"});
    if (!E1) throw ConfigError("solid: missing 'E1'");
    s.E1 = *E1;
    QuadraticCubic q;
    q.R = require_number(e, "R", w + ".elastic");
    q.nu_bar = optional_number(e, "nu_bar", w + ".elastic").value_or(0.5);
    s.elastic = q;
  } else if (kind == "mooney_rivlin") {
    reject_unknown(e, w + ".elastic", {"kind", "C1", "C2", "k_bulk", "nu_bar"});
    MooneyRivlin mr;
    mr.C1 = require_number(e, "C1", w + ".elastic");
    mr.C2 = require_number(e, "C2", w + ".elastic");
    mr.k_bulk = require_number(e, "k_bulk", w + ".elastic");
    mr.nu_bar = require_number(e, "nu_bar", w + ".elastic");
    s.elastic = mr;
    if (E1) {
      s.E1 = *E1;
    } else {
      try {
        validate(MaterialModel{SolidParams{s.rho_star, 1.0, s.E2, s.tau0, mr}});
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("non-physical constants: ") + ex.what());
      }
      s.E1 = elastic_derivs(MaterialModel{s}, 1.0).W2;
    }
  } else {
    throw ConfigError("solid.elastic.kind: expected 'quadratic_cubic' or 'mooney_rivlin', got '" +
                      kind + "'");
  }
  return s;
}

inline FluidParams parse_fluid(const Json& j) {
  const std::string w = "fluid";
  reject_unknown(j, w, {"rho_star", "R_gas", "tau0", "mu0", "production"});
  FluidParams f;
  f.rho_star = require_number(j, "rho_star", w);
  f.R_gas = require_number(j, "R_gas", w);
  f.tau0 = require_number(j, "tau0", w);
  f.mu0 = require_number(j, "mu0", w);
  const Json& p = require_object(j, "production", w);
  const std::string pw = w + ".production";
  const std::string kind = require_string(p, "kind", pw);
  if (kind == "newtonian") {
    reject_unknown(p, pw, {"kind"});
    f.production = Newtonian{};
  } else if (kind == "power_law") {
    reject_unknown(p, pw, {"kind", "k_cons", "m"});
    f.production = PowerLaw{require_number(p, "k_cons", pw), require_number(p, "m", pw)};
  } else if (kind == "regularized") {
    reject_unknown(p, pw, {"kind", "k_cons", "m", "eps"});
    f.production = RegularizedPowerLaw{require_number(p, "k_cons", pw), require_number(p, "m", pw),
                                        require_number(p, "eps", pw)};
  } else {
    throw ConfigError(pw + ".kind: expected 'newtonian', 'power_law' or 'regularized', got '" +
                      kind + "'");
  }
  return f;
}

}  // namespace detail

/// Material model from the top-level config object (keys "kind" and
/// "solid"/"fluid"; other top-level keys are ignored here).
inline MaterialModel parse_material(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  const std::string kind = detail::require_string(j, "kind", "config");
  MaterialModel model;
  if (kind == "solid") {
    model = detail::parse_solid(detail::require_object(j, "solid", "config"));
  } else if (kind == "fluid") {
    model = detail::parse_fluid(detail::require_object(j, "fluid", "config"));
  } else {
    throw ConfigError("config.kind: expected 'solid' or 'fluid', got '" + kind + "'");
  }
  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("non-physical constants: ") + e.what());
  }
  return model;
}

inline Json to_json(const MaterialModel& model) {
  return std::visit(
      Overloaded{
          [](const SolidParams& s) {
            Json elastic = std::visit(
                Overloaded{[](const QuadraticCubic& q) {
                             return Json{{"kind", "quadratic_cubic"}, {"R", q.R}, {"nu_bar", q.nu_bar}};
                           },
                           [](const MooneyRivlin& mr) {
                             return Json{{"kind", "mooney_rivlin"}, {"C1", mr.C1},   {"C2", mr.C2},
                                         {"k_bulk", mr.k_bulk},     {"nu_bar", mr.nu_bar}};
                           }},
                s.elastic);
            return Json{{"kind", "solid"},
                        {"solid",
                         {{"rho_star", s.rho_star},
                          {"E1", s.E1},
                          {"E2", s.E2},
                          {"tau0", s.tau0},
                          {"elastic", elastic}}}};
          },
          [](const FluidParams& f) {
            Json production = std::visit(
                Overloaded{[](const Newtonian&) { return Json{{"kind", "newtonian"}}; },
                           [](const PowerLaw& p) {
                             return Json{{"kind", "power_law"}, {"k_cons", p.k_cons}, {"m", p.m}};
                           },
                           [](const RegularizedPowerLaw& p) {
                             return Json{{"kind", "regularized"}, {"k_cons", p.k_cons}, {"m", p.m},
                                         {"eps", p.eps}};
                           }},
                f.production);
            return Json{{"kind", "fluid"},
                        {"fluid",
                         {{"rho_star", f.rho_star},
                          {"R_gas", f.R_gas},
                          {"tau0", f.tau0},
                          {"mu0", f.mu0},
                          {"production", production}}}};
          }},
      model);
}

inline SimConfig parse_sim(const Json& j) {
  const std::string w = "sim";
  if (!j.is_object()) throw ConfigError("sim: expected an object");
  detail::reject_unknown(j, w,
                         {"x_min", "x_max", "n_cells", "cfl", "x_front", "pi0", "pi0_over_pi_cr",
                          "ramp_width", "t_end", "output_every"});
  SimConfig s;
  s.x_min = detail::require_number(j, "x_min", w);
  s.x_max = detail::require_number(j, "x_max", w);
  if (!j.contains("n_cells") || !j.at("n_cells").is_number_unsigned()) {
    throw ConfigError("sim.n_cells: expected a non-negative integer");
  }
  s.n_cells = j.at("n_cells").get<std::size_t>();
  s.cfl = detail::optional_number(j, "cfl", w).value_or(0.8);
  s.x_front = detail::require_number(j, "x_front", w);
  s.pi0 = detail::optional_number(j, "pi0", w);
  s.pi0_over_pi_cr = detail::optional_number(j, "pi0_over_pi_cr", w);
  if (s.pi0.has_value() == s.pi0_over_pi_cr.has_value()) {
    throw ConfigError("sim: exactly one of 'pi0' and 'pi0_over_pi_cr' is required");
  }
  s.ramp_width = detail::optional_number(j, "ramp_width", w);
  s.t_end = detail::require_number(j, "t_end", w);
  s.output_every = detail::optional_number(j, "output_every", w);

  if (!(s.x_max > s.x_min)) throw ConfigError("sim: x_max must exceed x_min");
  if (s.n_cells < 16) throw ConfigError("sim: n_cells must be >= 16");
  if (!(s.cfl > 0.0 && s.cfl < 1.0)) throw ConfigError("sim: cfl must lie in (0, 1)");
  if (!(s.t_end >= 0.0)) throw ConfigError("sim: t_end must be >= 0");
  if (s.ramp_width && !(*s.ramp_width > 0.0)) throw ConfigError("sim: ramp_width must be positive");
  if (s.output_every && !(*s.output_every > 0.0)) throw ConfigError("sim: output_every must be positive");
  return s;
}

inline Json to_json(const SimConfig& s) {
  Json j{{"x_min", s.x_min}, {"x_max", s.x_max}, {"n_cells", s.n_cells}, {"cfl", s.cfl},
         {"x_front", s.x_front}, {"t_end", s.t_end}};
  if (s.pi0) j["pi0"] = *s.pi0;
  if (s.pi0_over_pi_cr) j["pi0_over_pi_cr"] = *s.pi0_over_pi_cr;
  if (s.ramp_width) j["ramp_width"] = *s.ramp_width;
  if (s.output_every) j["output_every"] = *s.output_every;
  return j;
}

/// "solid.tau0" -> "/solid/tau0".
inline Json::json_pointer parameter_pointer(const std::string& dotted) {
  std::string p = "/";
  for (char c : dotted) p += (c == '.') ? '/' : c;
  return Json::json_pointer(p);
}

inline SweepConfig parse_sweep(const Json& j, const Json& material_json) {
  const std::string w = "sweep";
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  detail::reject_unknown(j, w, {"parameter", "from", "to", "count", "spacing"});
  SweepConfig s;
  s.parameter = detail::require_string(j, "parameter", w);
  s.from = detail::require_number(j, "from", w);
  s.to = detail::require_number(j, "to", w);
  if (!j.contains("count") || !j.at("count").is_number_unsigned()) {
    throw ConfigError("sweep.count: expected a non-negative integer");
  }
  s.count = j.at("count").get<std::size_t>();
  const std::string spacing = j.contains("spacing") ? detail::require_string(j, "spacing", w) : "linear";
  if (spacing == "linear") {
    s.spacing = Spacing::Linear;
  } else if (spacing == "log") {
    s.spacing = Spacing::Log;
  } else {
    throw ConfigError("sweep.spacing: expected 'linear' or 'log'");
  }
  if (s.count == 0) throw ConfigError("sweep: empty range (count = 0)");
  if (s.spacing == Spacing::Log && !(s.from > 0.0 && s.to > 0.0)) {
    throw ConfigError("sweep: log spacing needs positive end points");
  }
  Json::json_pointer ptr;
  try {
    ptr = parameter_pointer(s.parameter);
  } catch (const Json::exception&) {
    throw ConfigError("sweep.parameter: malformed name '" + s.parameter + "'");
  }
  if (!material_json.contains(ptr) || !material_json.at(ptr).is_number()) {
    throw ConfigError("sweep.parameter: '" + s.parameter + "' is not a numeric material parameter");
  }
  return s;
}

inline Json to_json(const SweepConfig& s) {
  return Json{{"parameter", s.parameter}, {"from", s.from}, {"to", s.to}, {"count", s.count},
              {"spacing", s.spacing == Spacing::Log ? "log" : "linear"}};
}

inline ScenarioConfig parse_scenario(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::reject_unknown(j, "config", {"kind", "solid", "fluid", "analysis", "sim", "sweep"});
  ScenarioConfig c;
  c.material = parse_material(j);
  if (j.contains("analysis")) {
    const Json& a = j.at("analysis");
    if (!a.is_object()) throw ConfigError("analysis: expected an object");
    detail::reject_unknown(a, "analysis", {"pi0"});
    c.analysis_pi0 = detail::optional_number(a, "pi0", "analysis");
  }
  if (j.contains("sim")) c.sim = parse_sim(j.at("sim"));
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"), to_json(c.material));
  return c;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j = to_json(c.material);
  if (c.analysis_pi0) j["analysis"] = Json{{"pi0", *c.analysis_pi0}};
  if (c.sim) j["sim"] = to_json(*c.sim);
  if (c.sweep) j["sweep"] = to_json(*c.sweep);
  return j;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(parse_json_text(buf.str()));
}

/// Copy of the material with one parameter (dotted path) replaced.
inline MaterialModel with_parameter(const MaterialModel& model, const std::string& dotted,
                                    double value) {
  Json j = to_json(model);
  const auto ptr = parameter_pointer(dotted);
  if (!j.contains(ptr) || !j.at(ptr).is_number()) {
    throw ConfigError("'" + dotted + "' is not a numeric material parameter");
  }
  j[ptr] = value;
  return parse_material(j);
}

}  // namespace accelwave
