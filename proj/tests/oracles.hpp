#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "obs/control.hpp"
#include "obs/grid.hpp"
#include "obs/operators.hpp"

namespace testutil {

// Independent dense solve of the p = 2 cone-constrained program
//   min  sum (psi - z)^2 w + E_2(psi)   s.t.  -L psi >= 0, psi = F on boundary
// by a log-barrier interior-point Newton method. Used to cross-check the
// production dual-PSOR route; shares only the problem statement with it.
inline double dense_cone_qp_c2(const obs::GridFunction& z,
                               const obs::BoundaryData& F) {
  using obs::GridFunction;
  const obs::Grid& g = z.grid();
  auto interior = g.interior_node_list();
  const Eigen::Index m = static_cast<Eigen::Index>(interior.size());
  auto at = [&](Eigen::Index a) { return interior[static_cast<std::size_t>(a)]; };

  auto assemble = [&](const Eigen::VectorXd& x) {
    std::vector<double> v(g.node_count(), 0.0);
    for (Eigen::Index a = 0; a < m; ++a) v[at(a)] = x[a];
    for (std::size_t k = 0; k < F.size(); ++k) v[F.node(k)] = F.value(k);
    return GridFunction(g, v);
  };

  GridFunction base = assemble(Eigen::VectorXd::Zero(m));
  auto grad0 = obs::p_energy(base, 2.0).gradient;
  Eigen::VectorXd kb(m), w(m), zi(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    kb[a] = grad0[at(a)];
    w[a] = g.node_volume(at(a));
    zi[a] = z[at(a)];
  }
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index col = 0; col < m; ++col) {
    std::vector<double> e(g.node_count(), 0.0);
    e[at(col)] = 1.0;
    auto hcol = obs::p_energy_hessian_product(base, 2.0, GridFunction(g, e));
    for (Eigen::Index row = 0; row < m; ++row) K(row, col) = hcol[at(row)];
  }
  Eigen::MatrixXd H = K;
  H.diagonal() += 2.0 * w;
  Eigen::VectorXd b = 2.0 * w.cwiseProduct(zi) - kb;

  auto barrier_val = [&](const Eigen::VectorXd& xv, double tau) {
    Eigen::VectorXd r = K * xv + kb;
    if (r.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    double f = 0.5 * xv.dot(H * xv) - b.dot(xv);
    for (Eigen::Index i = 0; i < m; ++i) f -= tau * std::log(r[i]);
    return f;
  };

  // strictly feasible start: a strongly concave bump dominates kb
  Eigen::VectorXd bump(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    double s = 1.0;
    for (int axis = 0; axis < g.dimension(); ++axis) {
      double t = g.position(at(a), axis) / g.extent(axis);
      s *= t * (1.0 - t);
    }
    bump[a] = s;
  }
  Eigen::VectorXd rb = K * bump;
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (kb[i] < 0.0) alpha = std::max(alpha, (1.0 - kb[i]) / std::max(rb[i], 1e-12));
  Eigen::VectorXd x = alpha * bump;

  for (double tau = 1.0; tau >= 1e-12; tau *= 0.1) {
    for (int newton = 0; newton < 100; ++newton) {
      Eigen::VectorXd r = K * x + kb;
      Eigen::VectorXd rinv = r.cwiseInverse();
      Eigen::VectorXd grad = H * x - b - tau * (K.transpose() * rinv);
      Eigen::MatrixXd hess =
          H + tau * K.transpose() * rinv.cwiseAbs2().asDiagonal() * K;
      Eigen::VectorXd dx = hess.ldlt().solve(-grad);
      double decrement = -grad.dot(dx);
      if (!(decrement > 1e-15 * (1.0 + tau))) break;
      double f0 = barrier_val(x, tau);
      double step = 1.0;
      for (int bt = 0; bt < 80; ++bt) {
        Eigen::VectorXd xn = x + step * dx;
        if (barrier_val(xn, tau) <= f0 - 1e-4 * step * decrement) {
          x = xn;
          break;
        }
        step *= 0.5;
      }
    }
  }

  GridFunction psi = assemble(x);
  double G = obs::p_energy(psi, 2.0).value;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double d = psi[k] - z[k];
    G += d * d * g.node_volume(k);
  }
  return std::sqrt(G);
}

}  // namespace testutil
