#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obs/control.hpp"
#include "obs/grid.hpp"
#include "obs/rng.hpp"

namespace obs {

struct ConvergenceRow {
  double p = 0.0;  // inf for the limit row
  double value = 0.0;
  double fixed_point_residual = 0.0;
  bool certified = false;
  double wall_time_s = 0.0;
};

struct ConvergenceTable {
  std::string instance_id;
  std::vector<ConvergenceRow> rows;          // increasing p
  std::optional<ConvergenceRow> inf_row;     // present when the inf solve converged
  double gap_at_pmax = 0.0;                  // |C_pmax - C_inf|
  bool all_certified = false;
  std::vector<std::string> warnings;         // soft checks, never failures
};

struct StudyInstance {
  std::string id;
  GridFunction z;
  BoundaryData F;
};

// The C_p -> C_inf study: runs the warm-started p-schedule, appends the inf
// solve, and applies the soft bracket/monotonicity checks as warnings.
// Deterministic: same instance and schedule give bit-identical tables.
inline ConvergenceTable run_convergence_study(
    const StudyInstance& inst, const std::vector<double>& p_schedule = {2, 4, 8, 16, 32},
    const ControlOptions& opts = {}) {
  JinfResult res = minimize_Jinf(inst.z, inst.F, p_schedule, opts);
  ConvergenceTable table;
  table.instance_id = inst.id;
  table.all_certified = res.solution.certified;
  const double vol = inst.z.grid().domain_volume();
  for (const auto& row : res.trace) {
    table.rows.push_back(ConvergenceRow{row.p, row.objective,
                                        row.fixed_point_residual, row.certified,
                                        row.wall_time_s});
    table.all_certified = table.all_certified && row.certified;
    double bound = std::pow(2.0, 1.0 / row.p) * std::pow(vol, 1.0 / row.p) * row.h_value;
    if (row.objective > bound + 1e-9)
      table.warnings.push_back("bracket violation at p=" + std::to_string(row.p) +
                               ": C_p=" + std::to_string(row.objective) +
                               " exceeds 2^(1/p) vol^(1/p) H_p=" + std::to_string(bound));
  }
  table.inf_row = ConvergenceRow{kInfExponent, res.solution.objective,
                                 res.solution.fixed_point_residual,
                                 res.solution.certified,
                                 res.solution.report.wall_time_s};
  double cinf = res.solution.objective;
  table.gap_at_pmax = std::abs(table.rows.back().value - cinf);
  if (!res.trace.empty()) {
    double hmax = res.trace.back().h_value;
    if (cinf > hmax + 1e-2)
      table.warnings.push_back("limit value exceeds the max-form bound at p_max: C_inf=" +
                               std::to_string(cinf) + " vs H_pmax=" + std::to_string(hmax));
  }
  double prev_gap = std::numeric_limits<double>::infinity();
  for (const auto& row : table.rows) {
    double gap = std::abs(row.value - cinf);
    if (gap > prev_gap + 1e-3)
      table.warnings.push_back("gap |C_p - C_inf| increased at p=" + std::to_string(row.p) +
                               " (" + std::to_string(prev_gap) + " -> " + std::to_string(gap) + ")");
    prev_gap = gap;
  }
  return table;
}

// Independent instances run in parallel, capped by max_threads (the
// per-instance schedule stays sequential because of the warm starts).
inline std::vector<ConvergenceTable> run_convergence_studies(
    const std::vector<StudyInstance>& instances,
    const std::vector<double>& p_schedule = {2, 4, 8, 16, 32},
    const ControlOptions& opts = {}, std::size_t max_threads = 1) {
  std::vector<ConvergenceTable> out(instances.size());
  if (max_threads < 1) max_threads = 1;
  std::size_t next = 0;
  while (next < instances.size()) {
    std::size_t batch = std::min(max_threads, instances.size() - next);
    std::vector<std::future<ConvergenceTable>> futs;
    for (std::size_t j = 0; j < batch; ++j)
      futs.push_back(std::async(std::launch::async, [&, idx = next + j]() {
        return run_convergence_study(instances[idx], p_schedule, opts);
      }));
    for (std::size_t j = 0; j < batch; ++j) out[next + j] = futs[j].get();
    next += batch;
  }
  return out;
}

struct LemmaReport {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  bool ok() const { return failures == 0; }
};

namespace detail {

// Convergent nonnegative tail sequence with a seeded limit: value(p) -> limit
// with O(1/p) decay plus a bounded oscillation.
struct TailSequence {
  double limit = 0.0, drift = 0.0, wobble = 0.0, phase = 0.0;
  double operator()(double p) const {
    double v = limit + (drift + wobble * std::sin(p + phase)) / p;
    return std::max(v, 0.0);
  }
};

inline TailSequence random_tail(Rng& rng) {
  TailSequence s;
  s.limit = rng.uniform(0.0, 2.0);
  // |drift| + wobble < 1 keeps the tail within eps of the limit for p >= 1e6
  s.drift = rng.uniform(-0.4, 0.6);
  s.wobble = rng.uniform(0.0, 0.2);
  s.phase = rng.uniform(0.0, 6.28);
  return s;
}

}  // namespace detail

// max(a_p, b_p) -> max(lim a, lim b) for convergent nonnegative sequences,
// verified at a large evaluation exponent.
inline LemmaReport check_liminf_max(std::size_t n_cases, std::uint64_t seed,
                                    double eps = 1e-6, double p_eval = 1e6) {
  Rng rng(seed);
  LemmaReport rep;
  for (std::size_t i = 0; i < n_cases; ++i) {
    auto a = detail::random_tail(rng);
    auto b = detail::random_tail(rng);
    double expected = std::max(a.limit, b.limit);
    double got = std::max(a(p_eval), b(p_eval));
    double err = std::abs(got - expected);
    rep.max_error = std::max(rep.max_error, err);
    ++rep.cases;
    if (!(err <= eps)) ++rep.failures;
  }
  return rep;
}

// (a^p + b^p)^(1/p): the sandwich max <= value <= 2^(1/p) max must hold to
// near machine precision for every p, and the value approaches max(a, b).
// Evaluated with the max factored out so p = 1024 stays in range.
inline LemmaReport check_power_mean(std::size_t n_cases, std::uint64_t seed,
                                    double sandwich_rel = 1e-12,
                                    double limit_tol = 1e-3) {
  Rng rng(seed);
  LemmaReport rep;
  for (std::size_t i = 0; i < n_cases; ++i) {
    double a = rng.uniform(0.0, 1.2);
    double b = rng.uniform(0.0, 1.2);
    if (i % 7 == 0) b = 0.0;  // exercise the degenerate pair
    double mx = std::max(a, b), mn = std::min(a, b);
    ++rep.cases;
    bool fail = false;
    double value_at_top = mx;
    for (double p = 2.0; p <= 1024.0; p *= 2.0) {
      double value;
      if (mx == 0.0) {
        value = 0.0;
      } else {
        double r = mn / mx;
        value = mx * std::exp(std::log1p(std::pow(r, p)) / p);
      }
      double upper = std::pow(2.0, 1.0 / p) * mx;
      double scale = std::max(mx, 1e-300);
      double viol = std::max(mx - value, value - upper) / scale;
      rep.max_error = std::max(rep.max_error, viol);
      if (viol > sandwich_rel) fail = true;
      if (p == 1024.0) value_at_top = value;
    }
    if (std::abs(value_at_top - mx) > limit_tol) fail = true;
    if (fail) ++rep.failures;
  }
  return rep;
}

}  // namespace obs
