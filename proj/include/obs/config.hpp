#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "obs/control.hpp"
#include "obs/grid.hpp"
#include "obs/instances.hpp"

namespace obs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InlineInstance {
  int dimension = 1;
  std::vector<int> nodes;
  std::vector<double> extent;
  // obstacle/boundary/profile are either full arrays or a constant
  std::vector<double> obstacle;
  std::vector<double> boundary;
  std::vector<double> profile;
};

struct RunConfig {
  std::string command;                  // solve-obstacle | optimal-control | converge | oracle-check
  std::vector<std::string> instances;   // built-in names; empty if inline
  std::optional<InlineInstance> inline_instance;
  double p = 2.0;                       // may be kInfExponent
  std::vector<double> p_schedule = {2, 4, 8, 16, 32};
  SolverOptions solver;
  ControlOptions control;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::size_t max_threads = 1;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path,
                                     const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline double parse_exponent(const nlohmann::json& j, const std::string& path) {
  double v;
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfExponent;
    config_fail(path, "expected a number or \"inf\"");
  } else if (j.is_number()) {
    v = j.get<double>();
  } else {
    config_fail(path, "expected a number or \"inf\"");
  }
  if (!(v > 1.0)) config_fail(path, "exponent must satisfy p > 1");
  return v;
}

inline std::vector<double> parse_values(const nlohmann::json& j,
                                        std::size_t expected,
                                        const std::string& path) {
  std::vector<double> out;
  if (j.is_number()) {
    out.assign(expected, j.get<double>());
    return out;
  }
  if (!j.is_array()) config_fail(path, "expected an array or a constant");
  for (const auto& e : j) {
    if (!e.is_number()) config_fail(path, "array entries must be numbers");
    out.push_back(e.get<double>());
  }
  if (out.size() != expected)
    config_fail(path, "expected " + std::to_string(expected) +
                          " values, got " + std::to_string(out.size()));
  return out;
}

}  // namespace detail

// Materialize the configured instance(s) as solvable data.
struct ResolvedInstance {
  std::string id;
  GridFunction psi;
  BoundaryData g;
  GridFunction z;
};

inline ResolvedInstance resolve_inline(const InlineInstance& in) {
  Grid grid = make_grid(in.dimension, in.nodes, in.extent);
  return ResolvedInstance{"inline", GridFunction(grid, in.obstacle),
                          BoundaryData(grid, in.boundary),
                          GridFunction(grid, in.profile)};
}

inline std::vector<ResolvedInstance> resolve_instances(const RunConfig& cfg) {
  std::vector<ResolvedInstance> out;
  if (cfg.inline_instance) {
    out.push_back(resolve_inline(*cfg.inline_instance));
    return out;
  }
  for (const auto& name : cfg.instances) {
    BuiltinInstance b = builtin_instance(name);
    out.push_back(ResolvedInstance{b.name, b.psi, b.g, b.z});
  }
  return out;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("/: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) detail::config_fail("/", "top level must be an object");

  static const std::vector<std::string> known = {
      "command", "instance", "instances", "p",       "p_schedule",
      "tolerances", "seed",  "output_dir", "max_threads"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      detail::config_fail("/" + it.key(), "unknown field");
  }

  RunConfig cfg;
  if (!j.contains("command") || !j["command"].is_string())
    detail::config_fail("/command", "required string field");
  cfg.command = j["command"].get<std::string>();
  static const std::vector<std::string> commands = {
      "solve-obstacle", "optimal-control", "converge", "oracle-check"};
  if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
    detail::config_fail("/command", "unknown command '" + cfg.command + "'");

  if (j.contains("instance") && j.contains("instances"))
    detail::config_fail("/instances", "give either 'instance' or 'instances', not both");

  if (j.contains("instance")) {
    const auto& inst = j["instance"];
    if (inst.is_string()) {
      std::string name = inst.get<std::string>();
      auto names = builtin_names();
      if (std::find(names.begin(), names.end(), name) == names.end())
        detail::config_fail("/instance", "unknown built-in instance '" + name + "'");
      cfg.instances = {name};
    } else if (inst.is_object()) {
      InlineInstance in;
      if (!inst.contains("grid") || !inst["grid"].is_object())
        detail::config_fail("/instance/grid", "required object");
      const auto& grid = inst["grid"];
      if (!grid.contains("dimension") || !grid["dimension"].is_number_integer())
        detail::config_fail("/instance/grid/dimension", "required integer");
      in.dimension = grid["dimension"].get<int>();
      if (in.dimension != 1 && in.dimension != 2)
        detail::config_fail("/instance/grid/dimension", "must be 1 or 2");
      if (!grid.contains("nodes") || !grid["nodes"].is_array())
        detail::config_fail("/instance/grid/nodes", "required array");
      for (const auto& e : grid["nodes"]) in.nodes.push_back(e.get<int>());
      if (!grid.contains("extent") || !grid["extent"].is_array())
        detail::config_fail("/instance/grid/extent", "required array");
      for (const auto& e : grid["extent"]) in.extent.push_back(e.get<double>());
      if (static_cast<int>(in.nodes.size()) != in.dimension)
        detail::config_fail("/instance/grid/nodes", "size must equal dimension");
      if (static_cast<int>(in.extent.size()) != in.dimension)
        detail::config_fail("/instance/grid/extent", "size must equal dimension");
      Grid probe = [&] {
        try {
          return make_grid(in.dimension, in.nodes, in.extent);
        } catch (const GridError& e) {
          detail::config_fail("/instance/grid", e.what());
        }
      }();
      if (!inst.contains("obstacle"))
        detail::config_fail("/instance/obstacle", "required field");
      in.obstacle = detail::parse_values(inst["obstacle"], probe.node_count(),
                                         "/instance/obstacle");
      if (!inst.contains("boundary"))
        detail::config_fail("/instance/boundary", "required field");
      in.boundary = detail::parse_values(inst["boundary"], probe.boundary_count(),
                                         "/instance/boundary");
      in.profile = inst.contains("profile")
                       ? detail::parse_values(inst["profile"], probe.node_count(),
                                              "/instance/profile")
                       : std::vector<double>(probe.node_count(), 0.0);
      for (auto it = inst.begin(); it != inst.end(); ++it) {
        static const std::vector<std::string> fields = {"grid", "obstacle",
                                                        "boundary", "profile"};
        if (std::find(fields.begin(), fields.end(), it.key()) == fields.end())
          detail::config_fail("/instance/" + it.key(), "unknown field");
      }
      cfg.inline_instance = std::move(in);
    } else {
      detail::config_fail("/instance", "expected a built-in name or an object");
    }
  } else if (j.contains("instances")) {
    if (!j["instances"].is_array())
      detail::config_fail("/instances", "expected an array of built-in names");
    auto names = builtin_names();
    for (const auto& e : j["instances"]) {
      if (!e.is_string())
        detail::config_fail("/instances", "entries must be built-in names");
      std::string name = e.get<std::string>();
      if (std::find(names.begin(), names.end(), name) == names.end())
        detail::config_fail("/instances", "unknown built-in instance '" + name + "'");
      cfg.instances.push_back(name);
    }
    if (cfg.instances.empty())
      detail::config_fail("/instances", "must not be empty");
  } else if (cfg.command != "oracle-check") {
    detail::config_fail("/instance", "required for command '" + cfg.command + "'");
  }

  if (j.contains("p")) cfg.p = detail::parse_exponent(j["p"], "/p");
  if (j.contains("p_schedule")) {
    if (!j["p_schedule"].is_array() || j["p_schedule"].empty())
      detail::config_fail("/p_schedule", "expected a nonempty array");
    cfg.p_schedule.clear();
    for (std::size_t i = 0; i < j["p_schedule"].size(); ++i) {
      double v = detail::parse_exponent(j["p_schedule"][i],
                                        "/p_schedule/" + std::to_string(i));
      if (is_inf_exponent(v))
        detail::config_fail("/p_schedule/" + std::to_string(i),
                            "schedule entries must be finite");
      if (i > 0 && !(v > cfg.p_schedule.back()))
        detail::config_fail("/p_schedule", "must be strictly increasing");
      cfg.p_schedule.push_back(v);
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) detail::config_fail("/tolerances", "expected an object");
    auto positive = [&](const char* key) -> std::optional<double> {
      if (!t.contains(key)) return std::nullopt;
      if (!t[key].is_number() || !(t[key].get<double>() > 0.0))
        detail::config_fail(std::string("/tolerances/") + key, "must be a positive number");
      return t[key].get<double>();
    };
    if (auto v = positive("step")) {
      cfg.solver.step_tol = *v;
      cfg.control.solver.step_tol = *v;
    }
    if (auto v = positive("polish")) {
      cfg.solver.polish_tol = *v;
      cfg.control.solver.polish_tol = *v;
    }
    if (auto v = positive("certificate")) cfg.control.certificate_tol = *v;
    for (auto it = t.begin(); it != t.end(); ++it) {
      static const std::vector<std::string> fields = {"step", "polish", "certificate"};
      if (std::find(fields.begin(), fields.end(), it.key()) == fields.end())
        detail::config_fail("/tolerances/" + it.key(), "unknown field");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      detail::config_fail("/seed", "expected an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      detail::config_fail("/output_dir", "expected a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("max_threads")) {
    if (!j["max_threads"].is_number_integer() || j["max_threads"].get<int>() < 1)
      detail::config_fail("/max_threads", "expected a positive integer");
    cfg.max_threads = j["max_threads"].get<std::size_t>();
  }
  return cfg;
}

}  // namespace obs
