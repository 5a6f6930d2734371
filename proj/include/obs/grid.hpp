#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace obs {

// Exponent value standing for p = infinity.
inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

inline bool is_inf_exponent(double p) { return std::isinf(p) && p > 0; }

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleObstacle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform tensor grid on an interval (1D) or an axis-aligned rectangle (2D).
// Node order is row-major with axis 0 fastest: node = j*nx + i.
class Grid {
 public:
  Grid(int dimension, std::array<int, 2> nodes_per_axis,
       std::array<double, 2> extent)
      : dim_(dimension), n_(nodes_per_axis), extent_(extent) {
    if (dim_ != 1 && dim_ != 2) throw GridError("grid dimension must be 1 or 2");
    if (dim_ == 1) {
      n_[1] = 1;
      extent_[1] = 0.0;
    }
    for (int a = 0; a < dim_; ++a) {
      if (n_[a] < 3)
        throw GridError("nodes_per_axis must be >= 3 (no interior node otherwise)");
      if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
        throw GridError("grid extent must be positive and finite");
      h_[a] = extent_[a] / static_cast<double>(n_[a] - 1);
    }
    if (dim_ == 1) h_[1] = 0.0;
  }

  static Grid line(int nodes, double extent) {
    return Grid(1, {nodes, 1}, {extent, 0.0});
  }
  static Grid rectangle(int nx, int ny, double ex, double ey) {
    return Grid(2, {nx, ny}, {ex, ey});
  }

  int dimension() const { return dim_; }
  int nodes(int axis) const { return n_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double spacing(int axis) const { return h_[axis]; }

  std::size_t node_count() const {
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
  }
  std::size_t cell_count() const {
    std::size_t c = static_cast<std::size_t>(n_[0] - 1);
    if (dim_ == 2) c *= static_cast<std::size_t>(n_[1] - 1);
    return c;
  }
  std::size_t boundary_count() const {
    if (dim_ == 1) return 2;
    return 2 * static_cast<std::size_t>(n_[0] + n_[1]) - 4;
  }
  std::size_t interior_count() const { return node_count() - boundary_count(); }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_[0]) +
           static_cast<std::size_t>(i);
  }
  int coord(std::size_t node, int axis) const {
    int i = static_cast<int>(node % static_cast<std::size_t>(n_[0]));
    int j = static_cast<int>(node / static_cast<std::size_t>(n_[0]));
    return axis == 0 ? i : j;
  }
  bool is_boundary(std::size_t node) const {
    int i = coord(node, 0);
    if (i == 0 || i == n_[0] - 1) return true;
    if (dim_ == 2) {
      int j = coord(node, 1);
      if (j == 0 || j == n_[1] - 1) return true;
    }
    return false;
  }
  double position(std::size_t node, int axis) const {
    return h_[axis] * static_cast<double>(coord(node, axis));
  }

  // Trapezoidal quadrature weight: full cells interior, half on faces,
  // quarter at 2D corners. Constants integrate exactly to the domain volume.
  double node_volume(std::size_t node) const {
    auto axis_weight = [&](int axis) {
      int c = coord(node, axis);
      double w = h_[axis];
      if (c == 0 || c == n_[axis] - 1) w *= 0.5;
      return w;
    };
    double w = axis_weight(0);
    if (dim_ == 2) w *= axis_weight(1);
    return w;
  }
  double cell_volume() const { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
  double domain_volume() const {
    return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1];
  }

  std::vector<std::size_t> boundary_node_list() const {
    std::vector<std::size_t> out;
    out.reserve(boundary_count());
    for (std::size_t k = 0; k < node_count(); ++k)
      if (is_boundary(k)) out.push_back(k);
    return out;
  }
  std::vector<std::size_t> interior_node_list() const {
    std::vector<std::size_t> out;
    out.reserve(interior_count());
    for (std::size_t k = 0; k < node_count(); ++k)
      if (!is_boundary(k)) out.push_back(k);
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.extent_ == b.extent_;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  int dim_;
  std::array<int, 2> n_;
  std::array<double, 2> extent_;
  std::array<double, 2> h_{{0.0, 0.0}};
};

inline Grid make_grid(int dimension, const std::vector<int>& nodes_per_axis,
                      const std::vector<double>& extent) {
  if (dimension != 1 && dimension != 2)
    throw GridError("grid dimension must be 1 or 2");
  if (static_cast<int>(nodes_per_axis.size()) != dimension ||
      static_cast<int>(extent.size()) != dimension)
    throw GridError("nodes_per_axis/extent size must match dimension");
  std::array<int, 2> n{nodes_per_axis[0], dimension == 2 ? nodes_per_axis[1] : 1};
  std::array<double, 2> e{extent[0], dimension == 2 ? extent[1] : 0.0};
  return Grid(dimension, n, e);
}

// Nodal real values on a Grid. Immutable after construction; values are
// checked finite so NaN/inf never propagate silently.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values)
      : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_.node_count())
      throw GridError("GridFunction: value count does not match grid");
    for (double x : v_)
      if (!std::isfinite(x))
        throw GridError("GridFunction: values must be finite");
  }

  static GridFunction constant(const Grid& g, double c) {
    return GridFunction(g, std::vector<double>(g.node_count(), c));
  }
  // f receives the physical coordinates (x) in 1D or (x, y) in 2D.
  static GridFunction sample(const Grid& g,
                             const std::function<double(double, double)>& f) {
    std::vector<double> v(g.node_count());
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = f(g.position(k, 0), g.dimension() == 2 ? g.position(k, 1) : 0.0);
    return GridFunction(g, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return v_; }
  double operator[](std::size_t k) const { return v_[k]; }
  std::size_t size() const { return v_.size(); }

 private:
  Grid grid_;
  std::vector<double> v_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid() != b.grid())
    throw GridError("grid mismatch between grid functions");
}

inline GridFunction pointwise_max(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = std::max(a[k], b[k]);
  return GridFunction(a.grid(), std::move(v));
}

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Values on the boundary node set, stored in ascending global node order.
class BoundaryData {
 public:
  BoundaryData(Grid grid, std::vector<double> values)
      : grid_(std::move(grid)), nodes_(grid_.boundary_node_list()),
        v_(std::move(values)) {
    if (v_.size() != nodes_.size())
      throw GridError("BoundaryData: value count does not match boundary size");
    for (double x : v_)
      if (!std::isfinite(x))
        throw GridError("BoundaryData: values must be finite");
  }

  static BoundaryData constant(const Grid& g, double c) {
    return BoundaryData(g, std::vector<double>(g.boundary_count(), c));
  }
  static BoundaryData sample(const Grid& g,
                             const std::function<double(double, double)>& f) {
    auto nodes = g.boundary_node_list();
    std::vector<double> v(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k)
      v[k] = f(g.position(nodes[k], 0),
               g.dimension() == 2 ? g.position(nodes[k], 1) : 0.0);
    return BoundaryData(g, std::move(v));
  }
  // Restriction of a grid function to the boundary node set.
  static BoundaryData restrict_to_boundary(const GridFunction& u) {
    auto nodes = u.grid().boundary_node_list();
    std::vector<double> v(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = u[nodes[k]];
    return BoundaryData(u.grid(), std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  std::size_t node(std::size_t k) const { return nodes_[k]; }
  double value(std::size_t k) const { return v_[k]; }
  const std::vector<double>& values() const { return v_; }

  double value_at_node(std::size_t global_node) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), global_node);
    if (it == nodes_.end() || *it != global_node)
      throw GridError("value_at_node: node is not a boundary node");
    return v_[static_cast<std::size_t>(it - nodes_.begin())];
  }

  // Max slope between lattice-adjacent boundary nodes (the two endpoints in
  // 1D). Finite by construction of the stored values.
  double lipschitz_estimate() const {
    if (grid_.dimension() == 1)
      return std::abs(v_[1] - v_[0]) / grid_.extent(0);
    double lip = 0.0;
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
      int ia = grid_.coord(nodes_[a], 0), ja = grid_.coord(nodes_[a], 1);
      for (std::size_t b = a + 1; b < nodes_.size(); ++b) {
        int ib = grid_.coord(nodes_[b], 0), jb = grid_.coord(nodes_[b], 1);
        int di = std::abs(ia - ib), dj = std::abs(ja - jb);
        if (di + dj != 1) continue;
        double dist = di == 1 ? grid_.spacing(0) : grid_.spacing(1);
        lip = std::max(lip, std::abs(v_[a] - v_[b]) / dist);
      }
    }
    return lip;
  }

 private:
  Grid grid_;
  std::vector<std::size_t> nodes_;
  std::vector<double> v_;
};

inline GridFunction embed_boundary(const BoundaryData& g, double fill) {
  std::vector<double> v(g.grid().node_count(), fill);
  for (std::size_t k = 0; k < g.size(); ++k) v[g.node(k)] = g.value(k);
  return GridFunction(g.grid(), std::move(v));
}

// Affine interpolation of the boundary data in 1D, transfinite (Coons)
// interpolation in 2D. Agrees with g exactly on the boundary.
inline GridFunction boundary_interpolant(const BoundaryData& g) {
  const Grid& grid = g.grid();
  if (grid.dimension() == 1) {
    double g0 = g.value(0), g1 = g.value(1);
    double L = grid.extent(0);
    std::vector<double> v(grid.node_count());
    for (std::size_t k = 0; k < v.size(); ++k) {
      double t = grid.position(k, 0) / L;
      v[k] = (1.0 - t) * g0 + t * g1;
    }
    return GridFunction(grid, std::move(v));
  }
  const int nx = grid.nodes(0), ny = grid.nodes(1);
  auto at = [&](int i, int j) { return g.value_at_node(grid.index(i, j)); };
  std::vector<double> v(grid.node_count());
  for (int j = 0; j < ny; ++j) {
    double t = static_cast<double>(j) / (ny - 1);
    for (int i = 0; i < nx; ++i) {
      double s = static_cast<double>(i) / (nx - 1);
      double edges = (1.0 - s) * at(0, j) + s * at(nx - 1, j) +
                     (1.0 - t) * at(i, 0) + t * at(i, ny - 1);
      double corners = (1.0 - s) * (1.0 - t) * at(0, 0) +
                       s * (1.0 - t) * at(nx - 1, 0) +
                       (1.0 - s) * t * at(0, ny - 1) +
                       s * t * at(nx - 1, ny - 1);
      v[grid.index(i, j)] = edges - corners;
    }
  }
  return GridFunction(grid, std::move(v));
}

// Data bundle for one obstacle (or control) solve: obstacle psi, boundary
// data g, optional profile z, exponent p in (1, inf]. Feasibility psi <= g
// on the boundary is an invariant; without it the constraint set is empty.
class ObstacleInstance {
 public:
  ObstacleInstance(GridFunction psi, BoundaryData g, double p,
                   std::optional<GridFunction> z = std::nullopt)
      : psi_(std::move(psi)), g_(std::move(g)), z_(std::move(z)), p_(p) {
    if (psi_.grid() != g_.grid())
      throw GridError("ObstacleInstance: obstacle and boundary grids differ");
    if (z_ && z_->grid() != psi_.grid())
      throw GridError("ObstacleInstance: profile grid differs");
    if (!(p_ > 1.0))
      throw GridError("ObstacleInstance: exponent p must satisfy p > 1");
    for (std::size_t k = 0; k < g_.size(); ++k) {
      if (psi_[g_.node(k)] > g_.value(k))
        throw InfeasibleObstacle(
            "obstacle exceeds boundary data at a boundary node (node " +
            std::to_string(g_.node(k)) + ")");
    }
  }

  const Grid& grid() const { return psi_.grid(); }
  const GridFunction& psi() const { return psi_; }
  const BoundaryData& g() const { return g_; }
  bool has_profile() const { return z_.has_value(); }
  const GridFunction& z() const {
    if (!z_) throw GridError("ObstacleInstance: no profile z present");
    return *z_;
  }
  double p() const { return p_; }
  bool is_inf() const { return is_inf_exponent(p_); }

  ObstacleInstance with_p(double p) const {
    return ObstacleInstance(psi_, g_, p, z_);
  }
  ObstacleInstance with_obstacle(GridFunction psi) const {
    return ObstacleInstance(std::move(psi), g_, p_, z_);
  }

 private:
  GridFunction psi_;
  BoundaryData g_;
  std::optional<GridFunction> z_;
  double p_;
};

}  // namespace obs
