#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "obs/config.hpp"
#include "obs/control.hpp"
#include "obs/experiments.hpp"
#include "obs/io.hpp"
#include "obs/obstacle.hpp"

namespace obs {

namespace detail {

inline nlohmann::json exponent_json(double p) {
  return is_inf_exponent(p) ? nlohmann::json("inf") : nlohmann::json(p);
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  if (cfg.inline_instance)
    j["instance"] = "inline";
  else
    j["instances"] = cfg.instances;
  j["p"] = exponent_json(cfg.p);
  j["p_schedule"] = cfg.p_schedule;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["max_threads"] = cfg.max_threads;
  j["tolerances"] = {{"step", cfg.solver.step_tol},
                     {"polish", cfg.solver.polish_tol},
                     {"certificate", cfg.control.certificate_tol}};
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

inline nlohmann::json report_json(const SolverReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"complementarity_gap", r.complementarity_gap},
          {"tolerance_used", r.tolerance_used},
          {"wall_time_s", r.wall_time_s}};
}

inline std::string table_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << "p,C_p,fixed_point_residual,wall_time_s\n";
  auto row = [&](const ConvergenceRow& r) {
    if (is_inf_exponent(r.p))
      out << "inf";
    else
      out << format_g17(r.p);
    out << ',' << format_g17(r.value) << ',' << format_g17(r.fixed_point_residual)
        << ',' << format_g17(r.wall_time_s) << '\n';
  };
  for (const auto& r : t.rows) row(r);
  if (t.inf_row) row(*t.inf_row);
  return out.str();
}

}  // namespace detail

// Executes one parsed configuration and writes every artifact plus a
// manifest under output_dir. Exit codes: 0 fully certified, 2 solved with
// warnings (e.g. an uncertified fixed point), 1 error (with partial
// artifacts when a solver diverges).
inline int run(const RunConfig& cfg, std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    detail::write_text((fs::path(cfg.output_dir) / name).string(), text);
    files.push_back(name);
  };
  auto finish = [&](int code) {
    nlohmann::json manifest;
    std::sort(files.begin(), files.end());
    manifest["command"] = cfg.command;
    manifest["config"] = detail::config_echo(cfg);
    manifest["files"] = files;
    detail::write_text((fs::path(cfg.output_dir) / "manifest.json").string(),
                       manifest.dump(2) + "\n");
    return code;
  };

  try {
    fs::create_directories(cfg.output_dir);

    if (cfg.command == "oracle-check") {
      auto lim = check_liminf_max(100, cfg.seed);
      auto pow = check_power_mean(100, cfg.seed + 1);
      nlohmann::json j = {
          {"liminf_max",
           {{"cases", lim.cases}, {"failures", lim.failures}, {"max_error", lim.max_error}}},
          {"power_mean",
           {{"cases", pow.cases}, {"failures", pow.failures}, {"max_error", pow.max_error}}},
          {"ok", lim.ok() && pow.ok()}};
      emit("oracle_report.json", j.dump(2) + "\n");
      log << "oracle-check: " << (lim.ok() && pow.ok() ? "ok" : "FAILED") << "\n";
      return finish(lim.ok() && pow.ok() ? 0 : 1);
    }

    auto instances = resolve_instances(cfg);
    int exit_code = 0;

    if (cfg.command == "solve-obstacle") {
      for (const auto& inst : instances) {
        ObstacleInstance prob(inst.psi, inst.g, cfg.p, inst.z);
        try {
          auto sol = solve_obstacle(prob, cfg.solver);
          emit(inst.id + ".state.csv", grid_function_to_csv(sol.state));
          emit(inst.id + ".state.json",
               detail::report_json(sol.report).dump(2) + "\n");
          log << inst.id << ": solved, " << sol.report.iterations
              << " sweeps, complementarity gap "
              << sol.report.complementarity_gap << "\n";
        } catch (const NonConvergence& e) {
          emit(inst.id + ".state.csv",
               grid_function_to_csv(GridFunction(inst.psi.grid(), e.state)));
          emit(inst.id + ".state.json",
               detail::report_json(e.report).dump(2) + "\n");
          log << inst.id << ": NonConvergence: " << e.what() << "\n";
          exit_code = 1;
        }
      }
      return finish(exit_code);
    }

    if (cfg.command == "optimal-control") {
      for (const auto& inst : instances) {
        // validates feasibility of the instance data up front
        ObstacleInstance probe(inst.psi, inst.g, cfg.p, inst.z);
        (void)probe;
        ControlSolution sol = [&] {
          if (is_inf_exponent(cfg.p)) {
            auto res = minimize_Jinf(inst.z, inst.g, cfg.p_schedule, cfg.control);
            ConvergenceTable t;  // reuse the table format for the stage trace
            t.instance_id = inst.id;
            for (const auto& row : res.trace)
              t.rows.push_back(ConvergenceRow{row.p, row.objective,
                                              row.fixed_point_residual,
                                              row.certified, row.wall_time_s});
            emit(inst.id + ".stages.csv", detail::table_csv(t));
            return res.solution;
          }
          return minimize_Jp(inst.z, inst.g, cfg.p, cfg.control);
        }();
        emit(inst.id + ".control.csv", grid_function_to_csv(sol.control));
        emit(inst.id + ".state.csv", grid_function_to_csv(sol.state));
        nlohmann::json j = {{"p", detail::exponent_json(cfg.p)},
                            {"objective", sol.objective},
                            {"fixed_point_residual", sol.fixed_point_residual},
                            {"converged", sol.report.converged},
                            {"iterations", sol.report.iterations}};
        emit(inst.id + ".solution.json", j.dump(2) + "\n");
        log << inst.id << ": objective " << sol.objective
            << ", fixed-point residual " << sol.fixed_point_residual
            << (sol.certified ? " (certified)" : " (NOT certified)") << "\n";
        if (!sol.certified) exit_code = std::max(exit_code, 2);
      }
      return finish(exit_code);
    }

    if (cfg.command == "converge") {
      std::vector<StudyInstance> studies;
      for (const auto& inst : instances) {
        ObstacleInstance probe(inst.psi, inst.g, 2.0, inst.z);
        (void)probe;
        studies.push_back(StudyInstance{inst.id, inst.z, inst.g});
      }
      auto tables = run_convergence_studies(studies, cfg.p_schedule, cfg.control,
                                            cfg.max_threads);
      for (const auto& t : tables) {
        emit(t.instance_id + ".table.csv", detail::table_csv(t));
        nlohmann::json j = {
            {"instance_id", t.instance_id},
            {"C_inf", t.inf_row ? t.inf_row->value : 0.0},
            {"gap_at_pmax", t.gap_at_pmax},
            {"all_certified", t.all_certified},
            {"warnings", t.warnings}};
        emit(t.instance_id + ".summary.json", j.dump(2) + "\n");
        log << t.instance_id << ": C_inf "
            << (t.inf_row ? t.inf_row->value : 0.0) << ", gap at p_max "
            << t.gap_at_pmax << (t.all_certified ? " (all certified)" : "")
            << "\n";
        for (const auto& w : t.warnings) log << "  note: " << w << "\n";
        if (!t.all_certified) exit_code = std::max(exit_code, 2);
      }
      return finish(exit_code);
    }

    throw ConfigError("/command: unknown command '" + cfg.command + "'");
  } catch (const NonConvergence& e) {
    log << "error: NonConvergence: " << e.what() << "\n";
    return finish(1);
  } catch (const InfeasibleObstacle& e) {
    log << "error: InfeasibleObstacle: " << e.what() << "\n";
    return finish(1);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return finish(1);
  }
}

}  // namespace obs
