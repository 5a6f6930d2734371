#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "obs/grid.hpp"
#include "obs/operators.hpp"
#include "obs/rng.hpp"

namespace obs {

struct SolverOptions {
  // Sup-norm step tolerance for the projected relaxation / value iteration.
  double step_tol = 1e-8;
  // Target for the free-set residual polish; the achievable floor scales
  // with |Du|^(p-1)/h rounding, so the polish also stops on stagnation.
  double polish_tol = 1e-9;
  double over_relaxation = 1.5;
  std::size_t max_iter_factor = 200;   // max sweeps = factor * node count
  double contact_threshold_factor = 10.0;
};

struct SolverReport {
  bool converged = false;
  std::size_t iterations = 0;
  double final_residual = 0.0;       // last sup-norm sweep step
  double complementarity_gap = 0.0;  // max over nodes of min(residual, u-psi)
  double tolerance_used = 0.0;
  double wall_time_s = 0.0;
};

struct ObstacleSolution {
  GridFunction state;
  SolverReport report;
  std::vector<char> contact;  // one flag per node: u - psi <= 10*tol
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, SolverReport report,
                 std::vector<double> state)
      : std::runtime_error(what), report(std::move(report)),
        state(std::move(state)) {}
  SolverReport report;
  std::vector<double> state;
};

struct SuperharmonicCheck {
  bool ok = false;
  std::size_t worst_node = 0;
  double worst_residual = 0.0;
};

// True iff the (p or inf) operator residual is >= -tol at every interior
// node; reports the most violating node either way.
inline SuperharmonicCheck is_p_superharmonic(const GridFunction& u, double p,
                                             double tol) {
  GridFunction r = operator_residual(u, p);
  SuperharmonicCheck out;
  out.ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (u.grid().is_boundary(k)) continue;
    if (r[k] < worst) {
      worst = r[k];
      out.worst_node = k;
      out.worst_residual = r[k];
    }
  }
  if (std::isfinite(worst) && worst < -tol) out.ok = false;
  return out;
}

// ---------------------------------------------------------------------------
// Exact 1D oracle: least concave majorant of the obstacle points, pinned to
// the boundary data at the endpoints. In 1D the p-harmonic functions are
// affine for every p (and the monotone inf-scheme enforces discrete
// concavity), so this is the exact solution of both the p- and inf-obstacle
// problems on the grid.
// ---------------------------------------------------------------------------
inline GridFunction lcm_1d(const GridFunction& psi, const BoundaryData& g) {
  const Grid& grid = psi.grid();
  if (grid.dimension() != 1) throw GridError("lcm_1d: 1D grids only");
  if (psi.grid() != g.grid()) throw GridError("lcm_1d: grid mismatch");
  const std::size_t n = grid.node_count();
  const double g0 = g.value(0), g1 = g.value(1);
  if (psi[0] > g0 || psi[n - 1] > g1)
    throw InfeasibleObstacle("lcm_1d: obstacle exceeds boundary data at an endpoint");

  std::vector<double> y(psi.values());
  y[0] = g0;
  y[n - 1] = g1;

  // Upper concave hull (Graham scan); x spacing is uniform so node indices
  // serve as abscissae.
  std::vector<std::size_t> hull;
  hull.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      // pop b when it lies on or below chord a->i
      double lhs = (y[b] - y[a]) * static_cast<double>(i - b);
      double rhs = (y[i] - y[b]) * static_cast<double>(b - a);
      if (lhs <= rhs)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }

  std::vector<double> out(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    std::size_t a = hull[s], b = hull[s + 1];
    out[a] = y[a];
    for (std::size_t k = a + 1; k < b; ++k) {
      double t = static_cast<double>(k - a) / static_cast<double>(b - a);
      out[k] = y[a] + t * (y[b] - y[a]);
    }
  }
  out[n - 1] = y[n - 1];
  return GridFunction(grid, std::move(out));
}

namespace detail {

// Unconstrained single-node minimizer of the p-energy restricted to node k
// (all other nodes fixed). In 1D the optimality condition equates the two
// adjacent slopes for every p, so the minimizer is the neighbor midpoint.
inline double node_minimizer_p(const Grid& g, const std::vector<double>& u,
                               std::size_t k, double p) {
  if (g.dimension() == 1) return 0.5 * (u[k - 1] + u[k + 1]);
  const std::size_t nx = static_cast<std::size_t>(g.nodes(0));
  const double hx = g.spacing(0), hy = g.spacing(1);
  const double uL = u[k - 1], uR = u[k + 1], uD = u[k - nx], uU = u[k + nx];
  if (p == 2.0) {
    double wx = 1.0 / (hx * hx), wy = 1.0 / (hy * hy);
    return ((uL + uR) * wx + (uD + uU) * wy) / (2.0 * wx + 2.0 * wy);
  }
  // Three cells see node k: as lower-left corner, as +x corner, as +y corner.
  const double gyB = (u[k - 1 + nx] - uL) / hy;  // fixed component, cell left of k
  const double gxC = (u[k + 1 - nx] - uD) / hx;  // fixed component, cell below k
  auto weight = [p](double s) {
    if (p < 2.0 && s < kDegenerateGradient) return 0.0;
    return std::pow(s, p - 2.0);
  };
  auto deriv = [&](double t) {
    double gxA = (uR - t) / hx, gyA = (uU - t) / hy;
    double gxB = (t - uL) / hx;
    double gyC = (t - uD) / hy;
    double wA = weight(std::hypot(gxA, gyA));
    double wB = weight(std::hypot(gxB, gyB));
    double wC = weight(std::hypot(gxC, gyC));
    return wA * (-gxA / hx - gyA / hy) + wB * gxB / hx + wC * gyC / hy;
  };
  double lo = std::min(std::min(uL, uR), std::min(uD, uU));
  double hi = std::max(std::max(uL, uR), std::max(uD, uU));
  if (hi - lo < 1e-300) return lo;
  double flo = deriv(lo), fhi = deriv(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  // Illinois regula falsi on the monotone derivative.
  double a = lo, fa = flo, b = hi, fb = fhi;
  for (int it = 0; it < 80; ++it) {
    double m = b - fb * (b - a) / (fb - fa);
    if (!(m > a && m < b)) m = 0.5 * (a + b);
    double fm = deriv(m);
    if (fm == 0.0 || b - a < 1e-15 * (1.0 + std::abs(a) + std::abs(b)))
      return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
      fb *= 0.5;
    } else {
      b = m;
      fb = fm;
      fa *= 0.5;
    }
  }
  return 0.5 * (a + b);
}

inline double node_minimizer_inf(const Grid& g, const std::vector<double>& u,
                                 std::size_t k) {
  double mn, mx;
  neighbor_min_max(g, u, k, mn, mx);
  return 0.5 * (mn + mx);
}

struct PolishResult {
  std::size_t sweeps = 0;
  double residual = 0.0;  // sup over free interior nodes
};

// Solve the free-node equations to near machine precision with the contact
// set pinned. 1D free runs are filled affinely in one pass; 2D runs
// unprojected Gauss-Seidel sweeps with a residual-based stop.
inline PolishResult polish_free_set(const Grid& g, std::vector<double>& u,
                                    const std::vector<char>& pinned, double p,
                                    double polish_tol, std::size_t sweep_cap) {
  const bool inf_case = is_inf_exponent(p);
  PolishResult out;
  auto free_residual = [&]() {
    std::vector<double> r =
        inf_case ? inf_residual_raw(g, u) : p_residual_raw(g, u, p);
    double m = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k)
      if (!g.is_boundary(k) && !pinned[k]) m = std::max(m, std::abs(r[k]));
    return m;
  };

  if (g.dimension() == 1) {
    const std::size_t n = g.node_count();
    std::size_t anchor = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k == n - 1 || pinned[k]) {
        for (std::size_t m = anchor + 1; m < k; ++m) {
          double t = static_cast<double>(m - anchor) / static_cast<double>(k - anchor);
          u[m] = u[anchor] + t * (u[k] - u[anchor]);
        }
        anchor = k;
      }
    }
    out.sweeps = 1;
    out.residual = free_residual();
    return out;
  }

  std::vector<std::size_t> free_nodes;
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (!g.is_boundary(k) && !pinned[k]) free_nodes.push_back(k);
  if (free_nodes.empty()) return out;

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (out.sweeps = 0; out.sweeps < sweep_cap; ++out.sweeps) {
    for (std::size_t k : free_nodes)
      u[k] = inf_case ? node_minimizer_inf(g, u, k)
                      : node_minimizer_p(g, u, k, p);
    out.residual = free_residual();
    if (out.residual <= polish_tol) {
      ++out.sweeps;
      return out;
    }
    if (out.residual < 0.999 * best) {
      best = out.residual;
      since_best = 0;
    } else if (++since_best > 60) {
      ++out.sweeps;
      return out;  // at the rounding floor for this exponent
    }
  }
  return out;
}

inline double complementarity_gap(const Grid& g, const std::vector<double>& u,
                                  const std::vector<double>& psi, double p) {
  std::vector<double> r = is_inf_exponent(p) ? inf_residual_raw(g, u)
                                             : p_residual_raw(g, u, p);
  double gap = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!g.is_boundary(k)) gap = std::max(gap, std::min(r[k], u[k] - psi[k]));
  return std::max(gap, 0.0);
}

struct ProjectedSolveResult {
  std::vector<double> u;
  SolverReport report;
};

// Shared driver: projected relaxation sweeps to the step tolerance, then an
// active-set polish; repeats if the polish exposes a misidentified contact
// set. `p` may be inf (value iteration with the monotone min/max scheme).
inline ProjectedSolveResult projected_obstacle_solve(
    const ObstacleInstance& inst, double p, const SolverOptions& opts,
    const std::function<void(const std::vector<double>&)>& observer) {
  const Grid& g = inst.grid();
  const auto& psi = inst.psi().values();
  const bool inf_case = is_inf_exponent(p);
  const std::size_t n = g.node_count();
  const std::size_t max_sweeps = opts.max_iter_factor * n;
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<double> u;
  if (inf_case) {
    double top = *std::max_element(psi.begin(), psi.end());
    for (std::size_t k = 0; k < inst.g().size(); ++k)
      top = std::max(top, inst.g().value(k));
    u.assign(n, top);
  } else {
    u = pointwise_max(inst.psi(), boundary_interpolant(inst.g())).values();
  }
  for (std::size_t k = 0; k < inst.g().size(); ++k)
    u[inst.g().node(k)] = inst.g().value(k);

  auto interior = g.interior_node_list();
  const double omega =
      (!inf_case && (g.dimension() == 1 || p == 2.0)) ? opts.over_relaxation : 1.0;

  SolverReport report;
  report.tolerance_used = opts.step_tol;
  std::size_t sweeps = 0;
  bool step_converged = false;

  auto finish_report = [&](bool ok) {
    report.converged = ok;
    report.iterations = sweeps;
    report.complementarity_gap = complementarity_gap(g, u, psi, p);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  std::vector<double> buffer(inf_case ? n : 0);
  bool clean_exit = false;
  for (int round = 0; round < 12; ++round) {
    // Phase 1: projected relaxation. The inf case is a plain Jacobi value
    // iteration from the constant supersolution, so iterates never increase.
    step_converged = false;
    while (sweeps < max_sweeps) {
      double step = 0.0;
      if (inf_case) {
        buffer = u;
        for (std::size_t k : interior) {
          double cand = std::max(psi[k], node_minimizer_inf(g, buffer, k));
          step = std::max(step, std::abs(cand - u[k]));
          u[k] = cand;
        }
      } else {
        for (std::size_t k : interior) {
          double target = node_minimizer_p(g, u, k, p);
          double cand = std::max(psi[k], u[k] + omega * (target - u[k]));
          step = std::max(step, std::abs(cand - u[k]));
          u[k] = cand;
        }
      }
      ++sweeps;
      report.final_residual = step;
      if (observer) observer(u);
      if (step <= opts.step_tol) {
        step_converged = true;
        break;
      }
    }
    if (!step_converged) {
      finish_report(false);
      throw NonConvergence("obstacle solve: step tolerance not reached within " +
                               std::to_string(max_sweeps) + " sweeps",
                           report, u);
    }

    // Phase 2: polish with the contact set pinned (projection lands contact
    // nodes exactly on the obstacle, so equality identifies them).
    std::vector<char> pinned(n, 0);
    for (std::size_t k : interior)
      if (u[k] == psi[k]) pinned[k] = 1;
    auto pol = polish_free_set(g, u, pinned, p, opts.polish_tol,
                               std::max<std::size_t>(2000, 20 * n));
    sweeps += pol.sweeps;

    bool clamped = false;
    for (std::size_t k : interior) {
      if (u[k] < psi[k]) {
        u[k] = psi[k];
        clamped = true;
      }
    }
    std::vector<double> r =
        inf_case ? inf_residual_raw(g, u) : p_residual_raw(g, u, p);
    bool release = false;
    for (std::size_t k : interior)
      if (pinned[k] && r[k] < -std::max(10.0 * opts.polish_tol, 1e-9))
        release = true;
    if (!clamped && !release) {
      clean_exit = true;
      break;
    }
  }
  if (!clean_exit) {
    finish_report(false);
    throw NonConvergence("obstacle solve: contact set did not settle", report, u);
  }

  finish_report(true);
  return ProjectedSolveResult{std::move(u), report};
}

inline ObstacleSolution package_solution(const ObstacleInstance& inst,
                                         ProjectedSolveResult&& res,
                                         const SolverOptions& opts) {
  const auto& psi = inst.psi().values();
  std::vector<char> contact(res.u.size(), 0);
  const double thresh = opts.contact_threshold_factor * opts.step_tol;
  for (std::size_t k = 0; k < res.u.size(); ++k)
    if (!inst.grid().is_boundary(k) && res.u[k] - psi[k] <= thresh)
      contact[k] = 1;
  return ObstacleSolution{GridFunction(inst.grid(), std::move(res.u)),
                          res.report, std::move(contact)};
}

}  // namespace detail

using SweepObserver = std::function<void(const std::vector<double>&)>;

// Constrained minimizer of the p-Dirichlet energy over {u >= psi, u = g on
// the boundary}: projected relaxation (projected SOR for p = 2 and for all
// p in 1D, nonlinear Gauss-Seidel otherwise) plus an exact free-set polish.
inline ObstacleSolution solve_p_obstacle(const ObstacleInstance& inst,
                                         const SolverOptions& opts = {},
                                         const SweepObserver& observer = {}) {
  if (inst.is_inf())
    throw GridError("solve_p_obstacle: exponent must be finite (use solve_inf_obstacle)");
  auto res = detail::projected_obstacle_solve(inst, inst.p(), opts, observer);
  return detail::package_solution(inst, std::move(res), opts);
}

// Smallest discretely inf-superharmonic function >= psi with boundary g:
// monotone value iteration from the constant upper bound, iterates
// nonincreasing, then the free-set polish.
inline ObstacleSolution solve_inf_obstacle(const ObstacleInstance& inst,
                                           const SolverOptions& opts = {},
                                           const SweepObserver& observer = {}) {
  auto res = detail::projected_obstacle_solve(inst, kInfExponent, opts, observer);
  return detail::package_solution(inst, std::move(res), opts);
}

inline ObstacleSolution solve_obstacle(const ObstacleInstance& inst,
                                       const SolverOptions& opts = {},
                                       const SweepObserver& observer = {}) {
  return inst.is_inf() ? solve_inf_obstacle(inst, opts, observer)
                       : solve_p_obstacle(inst, opts, observer);
}

// The obstacle-to-solution operator as a plain function on grid functions:
// T(psi) with boundary data taken from psi itself restricted to the boundary.
inline GridFunction apply_T(const GridFunction& psi, double p,
                            const SolverOptions& opts = {}) {
  ObstacleInstance inst(psi, BoundaryData::restrict_to_boundary(psi), p);
  return solve_obstacle(inst, opts).state;
}

namespace detail {

// Dense stiffness block K_II of the p=2 energy Hessian plus the constant
// part of the gradient, assembled numerically from the exact operators.
inline void assemble_quadratic_obstacle(const ObstacleInstance& inst,
                                        Eigen::MatrixXd& K, Eigen::VectorXd& q,
                                        std::vector<std::size_t>& interior) {
  const Grid& g = inst.grid();
  interior = g.interior_node_list();
  const std::size_t m = interior.size();
  std::vector<double> base(g.node_count());
  for (std::size_t k = 0; k < g.node_count(); ++k) base[k] = inst.psi()[k];
  for (std::size_t k = 0; k < inst.g().size(); ++k)
    base[inst.g().node(k)] = inst.g().value(k);
  GridFunction base_f(g, base);
  auto grad0 = p_energy(base_f, 2.0).gradient;
  q.resize(static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) q[static_cast<Eigen::Index>(a)] = grad0[interior[a]];
  K.setZero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t b = 0; b < m; ++b) {
    std::vector<double> e(g.node_count(), 0.0);
    e[interior[b]] = 1.0;
    auto col = p_energy_hessian_product(base_f, 2.0, GridFunction(g, e));
    for (std::size_t a = 0; a < m; ++a)
      K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = col[interior[a]];
  }
}

}  // namespace detail

// Direct dense oracle for tiny instances (node count <= 64). p = 2 solves
// the complementarity system exactly by Murty's least-index pivoting; other
// p run long-horizon projected descent from several seeded feasible starts.
inline GridFunction brute_force_obstacle(const ObstacleInstance& inst,
                                         double tol) {
  if (inst.grid().node_count() > 64)
    throw GridError("brute_force_obstacle: instance too large (node count > 64)");
  if (inst.is_inf())
    throw GridError("brute_force_obstacle: finite p only");
  const Grid& g = inst.grid();

  if (inst.p() == 2.0) {
    Eigen::MatrixXd K;
    Eigen::VectorXd q;
    std::vector<std::size_t> interior;
    detail::assemble_quadratic_obstacle(inst, K, q, interior);
    const std::size_t m = interior.size();
    // LCP in the slack z = u - psi >= 0: w = K z + q >= 0, z^T w = 0.
    std::vector<char> basic(m, 0);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t guard = 0; guard < (std::size_t{1} << 20); ++guard) {
      Eigen::VectorXd w = K * z + q;
      std::ptrdiff_t pivot = -1;
      for (std::size_t i = 0; i < m; ++i) {
        bool viol = basic[i] ? z[static_cast<Eigen::Index>(i)] < -1e-13
                             : w[static_cast<Eigen::Index>(i)] < -1e-13;
        if (viol) {
          pivot = static_cast<std::ptrdiff_t>(i);
          break;
        }
      }
      if (pivot < 0) break;
      basic[static_cast<std::size_t>(pivot)] ^= 1;
      std::vector<Eigen::Index> B;
      for (std::size_t i = 0; i < m; ++i)
        if (basic[i]) B.push_back(static_cast<Eigen::Index>(i));
      z.setZero();
      if (!B.empty()) {
        Eigen::MatrixXd KB(B.size(), B.size());
        Eigen::VectorXd qB(B.size());
        for (std::size_t a = 0; a < B.size(); ++a) {
          qB[static_cast<Eigen::Index>(a)] = q[B[a]];
          for (std::size_t b = 0; b < B.size(); ++b) KB(a, b) = K(B[a], B[b]);
        }
        Eigen::VectorXd zB = KB.ldlt().solve(-qB);
        for (std::size_t a = 0; a < B.size(); ++a) z[B[a]] = zB[static_cast<Eigen::Index>(a)];
      }
    }
    std::vector<double> u(g.node_count());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = inst.psi()[k];
    for (std::size_t k = 0; k < inst.g().size(); ++k)
      u[inst.g().node(k)] = inst.g().value(k);
    for (std::size_t a = 0; a < m; ++a)
      u[interior[a]] = inst.psi()[interior[a]] +
                       std::max(0.0, z[static_cast<Eigen::Index>(a)]);
    return GridFunction(g, std::move(u));
  }

  // General p: projected gradient descent with Armijo backtracking, several
  // feasible starts, best energy wins.
  const double target = tol / 10.0;
  const auto& psi = inst.psi().values();
  auto interior = g.interior_node_list();
  auto project = [&](std::vector<double>& v) {
    for (std::size_t k : interior) v[k] = std::max(v[k], psi[k]);
  };
  auto run_descent = [&](std::vector<double> u) {
    double step = 1.0;
    GridFunction uf(g, u);
    auto ev = p_energy(uf, inst.p());
    for (std::size_t it = 0; it < 200000; ++it) {
      // projected-gradient optimality measure
      double meas = 0.0;
      for (std::size_t k : interior) {
        double gk = ev.gradient[k];
        meas = std::max(meas, u[k] > psi[k] + 1e-14 ? std::abs(gk)
                                                    : std::max(0.0, -gk));
      }
      if (meas <= target) break;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> cand = u;
        for (std::size_t k : interior) cand[k] -= step * ev.gradient[k];
        project(cand);
        GridFunction cf(g, cand);
        auto cev = p_energy(cf, inst.p());
        double decrease = 0.0;
        for (std::size_t k : interior) {
          double d = cand[k] - u[k];
          decrease += d * d;
        }
        if (cev.value <= ev.value - 1e-4 / std::max(step, 1e-300) * decrease) {
          u = std::move(cand);
          ev = std::move(cev);
          step *= 2.0;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    return std::pair<std::vector<double>, double>(u, ev.value);
  };

  std::vector<double> init =
      pointwise_max(inst.psi(), boundary_interpolant(inst.g())).values();
  for (std::size_t k = 0; k < inst.g().size(); ++k)
    init[inst.g().node(k)] = inst.g().value(k);
  auto best = run_descent(init);
  Rng rng(1234);
  for (int s = 0; s < 4; ++s) {
    std::vector<double> u = init;
    for (std::size_t k : interior) u[k] += rng.uniform(0.0, 0.5);
    auto cand = run_descent(std::move(u));
    if (cand.second < best.second) best = cand;
  }
  return GridFunction(g, std::move(best.first));
}

}  // namespace obs
