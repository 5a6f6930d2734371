#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "obs/grid.hpp"
#include "obs/operators.hpp"
#include "obs/rng.hpp"

namespace testutil {

// Independent oracle: centered finite differences of a scalar functional of
// the nodal values, taken at interior nodes only.
inline std::vector<double> fd_gradient(
    const obs::GridFunction& u,
    const std::function<double(const obs::GridFunction&)>& f,
    double step = 1e-6) {
  const obs::Grid& g = u.grid();
  std::vector<double> out(g.node_count(), 0.0);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (g.is_boundary(k)) continue;
    std::vector<double> vp = u.values(), vm = u.values();
    vp[k] += step;
    vm[k] -= step;
    out[k] = (f(obs::GridFunction(g, vp)) - f(obs::GridFunction(g, vm))) /
             (2.0 * step);
  }
  return out;
}

inline obs::GridFunction random_function(const obs::Grid& g, obs::Rng& rng,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(g.node_count());
  for (auto& x : v) x = rng.uniform(lo, hi);
  return obs::GridFunction(g, std::move(v));
}

// Random piecewise-smooth obstacle lying below zero boundary data: a few
// tents of moderate slope, forced nonpositive at the boundary.
inline obs::GridFunction random_obstacle_1d(const obs::Grid& g, obs::Rng& rng) {
  const double L = g.extent(0);
  const int bumps = 2 + rng.uniform_int(0, 2);
  std::vector<double> c(bumps), h(bumps), w(bumps);
  for (int b = 0; b < bumps; ++b) {
    c[b] = rng.uniform(0.15, 0.85) * L;
    h[b] = rng.uniform(0.2, 1.0);
    w[b] = rng.uniform(0.15, 0.4) * L;
  }
  std::vector<double> v(g.node_count(), -0.2);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double x = g.position(k, 0);
    for (int b = 0; b < bumps; ++b)
      v[k] = std::max(v[k], h[b] * (1.0 - std::abs(x - c[b]) / w[b]));
    if (g.is_boundary(k)) v[k] = std::min(v[k], -0.05);
  }
  return obs::GridFunction(g, std::move(v));
}

inline obs::GridFunction random_obstacle_2d(const obs::Grid& g, obs::Rng& rng) {
  const double Lx = g.extent(0), Ly = g.extent(1);
  const int bumps = 1 + rng.uniform_int(0, 2);
  std::vector<double> cx(bumps), cy(bumps), h(bumps), w(bumps);
  for (int b = 0; b < bumps; ++b) {
    cx[b] = rng.uniform(0.25, 0.75) * Lx;
    cy[b] = rng.uniform(0.25, 0.75) * Ly;
    h[b] = rng.uniform(0.2, 0.8);
    w[b] = rng.uniform(0.15, 0.3) * std::min(Lx, Ly);
  }
  std::vector<double> v(g.node_count(), -0.2);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double x = g.position(k, 0), y = g.position(k, 1);
    for (int b = 0; b < bumps; ++b) {
      double d = std::hypot(x - cx[b], y - cy[b]);
      v[k] = std::max(v[k], h[b] * (1.0 - d / w[b]));
    }
    if (g.is_boundary(k)) v[k] = std::min(v[k], -0.05);
  }
  return obs::GridFunction(g, std::move(v));
}

}  // namespace testutil
