#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "obs/grid.hpp"

namespace obs {

// Built-in desk-scale instances. 1D control studies run on 65-node unit
// grids (where the exact oracles live), 2D obstacle studies on 17x17.
struct BuiltinInstance {
  std::string name;
  std::string description;
  GridFunction psi;
  BoundaryData g;
  GridFunction z;
  const Grid& grid() const { return psi.grid(); }
};

inline std::vector<std::string> builtin_names() {
  return {"tent1d",          "twopeak1d", "constant-profile-1d",
          "below-boundary",  "bump2d",    "constant-profile-2d"};
}

inline BuiltinInstance builtin_instance(const std::string& name) {
  if (name == "tent1d") {
    Grid g = make_grid(1, {65}, {1.0});
    return BuiltinInstance{
        name,
        "concave tent obstacle 1-2|x-1/2|, zero boundary; the obstacle is its "
        "own solution for every p including inf",
        GridFunction::sample(g, [](double x, double) {
          return 1.0 - 2.0 * std::abs(x - 0.5);
        }),
        BoundaryData::constant(g, 0.0), GridFunction::constant(g, 0.0)};
  }
  if (name == "twopeak1d") {
    Grid g = make_grid(1, {65}, {1.0});
    auto two = GridFunction::sample(g, [](double x, double) {
      return std::max({0.0, 0.5 - 4.0 * std::abs(x - 0.25),
                       0.5 - 4.0 * std::abs(x - 0.75)});
    });
    return BuiltinInstance{
        name,
        "two tent peaks of height 1/2; the solution is the concave hull "
        "through (0,0),(1/4,1/2),(3/4,1/2),(1,0) with sup-gradient 2; "
        "the profile equals the obstacle for control runs",
        two, BoundaryData::constant(g, 0.0), two};
  }
  if (name == "constant-profile-1d") {
    Grid g = make_grid(1, {65}, {1.0});
    return BuiltinInstance{
        name,
        "control instance z=1 with zero boundary: boundary nodes pin "
        "||T(psi)-z||_inf >= 1, so C_inf = 1 exactly and C_p -> 1",
        GridFunction::constant(g, 0.0), BoundaryData::constant(g, 0.0),
        GridFunction::constant(g, 1.0)};
  }
  if (name == "below-boundary") {
    Grid g = make_grid(2, {17, 17}, {1.0, 1.0});
    return BuiltinInstance{
        name,
        "obstacle -1 under zero boundary data: the state is identically the "
        "boundary interpolation (zero) for every p",
        GridFunction::constant(g, -1.0), BoundaryData::constant(g, 0.0),
        GridFunction::constant(g, 0.0)};
  }
  if (name == "bump2d") {
    Grid g = make_grid(2, {17, 17}, {1.0, 1.0});
    return BuiltinInstance{
        name,
        "cone obstacle max(0, 1/2 - 2 dist((x,y),(1/2,1/2))) with zero "
        "boundary; contact concentrates near the apex",
        GridFunction::sample(g, [](double x, double y) {
          return std::max(0.0, 0.5 - 2.0 * std::hypot(x - 0.5, y - 0.5));
        }),
        BoundaryData::constant(g, 0.0), GridFunction::constant(g, 0.0)};
  }
  if (name == "constant-profile-2d") {
    Grid g = make_grid(2, {17, 17}, {1.0, 1.0});
    return BuiltinInstance{
        name,
        "2D control instance z=1, zero boundary: C_inf = 1 as in 1D",
        GridFunction::constant(g, 0.0), BoundaryData::constant(g, 0.0),
        GridFunction::constant(g, 1.0)};
  }
  throw GridError("unknown built-in instance: " + name);
}

}  // namespace obs
