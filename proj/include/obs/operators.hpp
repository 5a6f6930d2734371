#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "obs/grid.hpp"

namespace obs {

// Cells with |gradient| below this are treated as exactly degenerate when a
// negative power of |gradient| would otherwise appear (p < 2, p < 4 for the
// Hessian). Clamping the weight to zero matches the limit value and never
// perturbs the energy itself. p = 2 is never clamped so the operator stays
// exactly linear.
inline constexpr double kDegenerateGradient = 1e-12;

namespace detail {

// Forward-difference gradient of u on cell c (one vector per cell,
// piecewise constant). Returns the node indices whose values enter it and
// the per-node sensitivity d(gx,gy)/du.
struct CellGradient {
  double gx = 0.0, gy = 0.0;
  // corner nodes: a = lower-left, bx = +x neighbor, by = +y neighbor (2D)
  std::size_t a = 0, bx = 0, by = 0;
};

inline CellGradient cell_gradient(const Grid& g, const std::vector<double>& u,
                                  std::size_t cell) {
  CellGradient out;
  if (g.dimension() == 1) {
    out.a = cell;
    out.bx = cell + 1;
    out.gx = (u[out.bx] - u[out.a]) / g.spacing(0);
    return out;
  }
  const int ncx = g.nodes(0) - 1;
  const int i = static_cast<int>(cell % static_cast<std::size_t>(ncx));
  const int j = static_cast<int>(cell / static_cast<std::size_t>(ncx));
  out.a = g.index(i, j);
  out.bx = g.index(i + 1, j);
  out.by = g.index(i, j + 1);
  out.gx = (u[out.bx] - u[out.a]) / g.spacing(0);
  out.gy = (u[out.by] - u[out.a]) / g.spacing(1);
  return out;
}

inline double cell_gradient_norm(const CellGradient& c, int dim) {
  return dim == 1 ? std::abs(c.gx) : std::hypot(c.gx, c.gy);
}

}  // namespace detail

struct EnergyEvaluation {
  double value = 0.0;
  GridFunction gradient;  // zero at boundary nodes (constrained data)
};

// Discrete p-Dirichlet energy: sum over cells of |D_h u|^p * cell volume,
// with the exact derivative w.r.t. interior nodal values.
inline EnergyEvaluation p_energy(const GridFunction& u, double p) {
  if (!(p > 1.0) || is_inf_exponent(p))
    throw GridError("p_energy: exponent must satisfy 1 < p < inf");
  const Grid& g = u.grid();
  const auto& v = u.values();
  const double vol = g.cell_volume();
  const int dim = g.dimension();
  double value = 0.0;
  std::vector<double> grad(g.node_count(), 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto cg = detail::cell_gradient(g, v, c);
    double s = detail::cell_gradient_norm(cg, dim);
    value += std::pow(s, p) * vol;
    if (p < 2.0 && s < kDegenerateGradient) continue;
    double w = p * std::pow(s, p - 2.0) * vol;
    double fx = w * cg.gx / g.spacing(0);
    grad[cg.a] -= fx;
    grad[cg.bx] += fx;
    if (dim == 2) {
      double fy = w * cg.gy / g.spacing(1);
      grad[cg.a] -= fy;
      grad[cg.by] += fy;
    }
  }
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (g.is_boundary(k)) grad[k] = 0.0;
  return EnergyEvaluation{value, GridFunction(g, std::move(grad))};
}

// Directional second derivative of p_energy: H(u) d, zero at boundary nodes.
// Used by the penalty machinery in the control solver.
inline GridFunction p_energy_hessian_product(const GridFunction& u, double p,
                                             const GridFunction& d) {
  if (!(p > 1.0) || is_inf_exponent(p))
    throw GridError("p_energy_hessian_product: exponent must satisfy 1 < p < inf");
  require_same_grid(u, d);
  const Grid& g = u.grid();
  const auto& uv = u.values();
  const auto& dv = d.values();
  const double vol = g.cell_volume();
  const int dim = g.dimension();
  std::vector<double> out(g.node_count(), 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto cg = detail::cell_gradient(g, uv, c);
    auto cd = detail::cell_gradient(g, dv, c);
    double s = detail::cell_gradient_norm(cg, dim);
    double hx = 0.0, hy = 0.0;
    if (p != 2.0 && s < kDegenerateGradient) continue;
    if (p == 2.0) {
      hx = 2.0 * cd.gx;
      hy = 2.0 * cd.gy;
    } else {
      double w1 = p * std::pow(s, p - 2.0);
      double dot = cg.gx * cd.gx + (dim == 2 ? cg.gy * cd.gy : 0.0);
      double w2 = p * (p - 2.0) * std::pow(s, p - 4.0) * dot;
      hx = w1 * cd.gx + w2 * cg.gx;
      hy = w1 * cd.gy + w2 * cg.gy;
    }
    double fx = hx * vol / g.spacing(0);
    out[cg.a] -= fx;
    out[cg.bx] += fx;
    if (dim == 2) {
      double fy = hy * vol / g.spacing(1);
      out[cg.a] -= fy;
      out[cg.by] += fy;
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k)
    if (g.is_boundary(k)) out[k] = 0.0;
  return GridFunction(g, std::move(out));
}

namespace detail {

inline std::vector<double> p_residual_raw(const Grid& g,
                                          const std::vector<double>& u,
                                          double p) {
  GridFunction uf(g, u);
  auto e = p_energy(uf, p);
  std::vector<double> r(g.node_count(), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k)
    if (!g.is_boundary(k))
      r[k] = e.gradient[k] / (p * g.node_volume(k));
  return r;
}

// Axis-neighbor min/max at an interior node.
inline void neighbor_min_max(const Grid& g, const std::vector<double>& u,
                             std::size_t k, double& mn, double& mx) {
  mn = std::min(u[k - 1], u[k + 1]);
  mx = std::max(u[k - 1], u[k + 1]);
  if (g.dimension() == 2) {
    const std::size_t nx = static_cast<std::size_t>(g.nodes(0));
    mn = std::min(mn, std::min(u[k - nx], u[k + nx]));
    mx = std::max(mx, std::max(u[k - nx], u[k + nx]));
  }
}

inline std::vector<double> inf_residual_raw(const Grid& g,
                                            const std::vector<double>& u) {
  std::vector<double> r(g.node_count(), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (g.is_boundary(k)) continue;
    double mn, mx;
    neighbor_min_max(g, u, k, mn, mx);
    r[k] = u[k] - 0.5 * (mn + mx);
  }
  return r;
}

}  // namespace detail

// Nodal values of -Delta_p u (variational form: energy gradient of
// (1/p) p_energy divided by the nodal volume), zero at boundary nodes.
// Positive residual = discretely p-superharmonic at that node.
inline GridFunction p_laplacian_residual(const GridFunction& u, double p) {
  if (!(p > 1.0) || is_inf_exponent(p))
    throw GridError("p_laplacian_residual: exponent must satisfy 1 < p < inf");
  return GridFunction(u.grid(),
                      detail::p_residual_raw(u.grid(), u.values(), p));
}

// Monotone two-point scheme: -Delta_inf u at node x is
// u(x) - (max_N u + min_N u)/2 over the axis-neighbor stencil.
inline GridFunction inf_laplacian_residual(const GridFunction& u) {
  return GridFunction(u.grid(), detail::inf_residual_raw(u.grid(), u.values()));
}

inline GridFunction operator_residual(const GridFunction& u, double p) {
  return is_inf_exponent(p) ? inf_laplacian_residual(u)
                            : p_laplacian_residual(u, p);
}

// (sum |u|^q * nodal volume)^(1/q), max |u| for q = inf. The sum is
// evaluated with the max factored out so large q never overflows.
inline double lq_norm(const GridFunction& u, double q) {
  const auto& v = u.values();
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (is_inf_exponent(q)) return m;
  if (!(q >= 1.0)) throw GridError("lq_norm: q must satisfy q >= 1");
  if (m == 0.0) return 0.0;
  const Grid& g = u.grid();
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k)
    sum += std::pow(std::abs(v[k]) / m, q) * g.node_volume(k);
  return m * std::pow(sum, 1.0 / q);
}

// Max over cells of the Euclidean norm of the forward-difference gradient.
inline double sup_gradient_norm(const GridFunction& u) {
  const Grid& g = u.grid();
  const auto& v = u.values();
  double m = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto cg = detail::cell_gradient(g, v, c);
    m = std::max(m, detail::cell_gradient_norm(cg, g.dimension()));
  }
  return m;
}

}  // namespace obs
