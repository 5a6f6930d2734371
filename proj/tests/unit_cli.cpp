#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obs/config.hpp"
#include "obs/io.hpp"
#include "obs/runner.hpp"

using namespace obs;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "obsctl_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// wall times are the one legitimately non-reproducible field
nlohmann::json scrub_wall_time(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("wall_time_s");
    for (auto& el : j.items()) el.value() = scrub_wall_time(el.value());
  } else if (j.is_array()) {
    for (auto& el : j) el = scrub_wall_time(el);
  }
  return j;
}

}  // namespace

TEST_CASE("grid function CSV round-trips exactly") {
  Grid g = make_grid(2, {5, 4}, {1.0, 2.0});
  Rng rng(55);
  std::vector<double> v(g.node_count());
  for (auto& x : v) x = rng.uniform(-3.0, 3.0);
  GridFunction f(g, v);
  std::istringstream in(grid_function_to_csv(f));
  GridFunction back = grid_function_from_csv(in);
  CHECK(back.grid().dimension() == 2);
  CHECK(back.grid().nodes(0) == 5);
  CHECK(back.grid().nodes(1) == 4);
  CHECK(back.grid().spacing(0) == g.spacing(0));
  CHECK(back.values() == f.values());  // 17 significant digits round-trip

  std::istringstream bad("no header\n1\n2\n");
  CHECK_THROWS_AS(grid_function_from_csv(bad), IoError);
}

TEST_CASE("parse_config fills defaults for a minimal request") {
  auto cfg = parse_config(R"({"command":"solve-obstacle","instance":"tent1d"})");
  CHECK(cfg.command == "solve-obstacle");
  CHECK(cfg.instances == std::vector<std::string>{"tent1d"});
  CHECK(cfg.p == 2.0);
  CHECK(cfg.p_schedule == std::vector<double>{2, 4, 8, 16, 32});
  CHECK(cfg.seed == 0);
  CHECK(cfg.solver.step_tol == 1e-8);
  CHECK(cfg.control.certificate_tol == 1e-4);
}

TEST_CASE("parse_config rejects invalid requests with pointed messages") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  fails_with(R"({"command":"solve-obstacle","instance":"tent1d","p":0.5})", "/p");
  fails_with(R"({"command":"bogus","instance":"tent1d"})", "/command");
  fails_with(R"({"command":"solve-obstacle"})", "/instance");
  fails_with(R"({"command":"solve-obstacle","instance":"nope"})", "/instance");
  fails_with(R"({"command":"solve-obstacle","instance":{
      "grid":{"dimension":1,"nodes":[5],"extent":[1.0]},
      "obstacle":[0,0,0],"boundary":0})"
             R"(})",
             "/instance/obstacle");
  fails_with(R"({"command":"converge","instance":"tent1d","p_schedule":[4,2]})",
             "/p_schedule");
  fails_with(R"({"command":"converge","instance":"tent1d","tolerances":{"step":-1}})",
             "/tolerances/step");
  fails_with("not json at all", "invalid JSON");
}

TEST_CASE("parse_config accepts inline instances and inf exponents") {
  auto cfg = parse_config(R"({
    "command": "solve-obstacle",
    "instance": {
      "grid": {"dimension": 1, "nodes": [5], "extent": [1.0]},
      "obstacle": [-1, 0.2, 0.8, 0.2, -1],
      "boundary": 0
    },
    "p": "inf",
    "output_dir": "somewhere"
  })");
  REQUIRE(cfg.inline_instance.has_value());
  CHECK(is_inf_exponent(cfg.p));
  CHECK(cfg.output_dir == "somewhere");
  auto resolved = resolve_instances(cfg);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].psi.values().size() == 5);
}

TEST_CASE("run solve-obstacle on below-boundary writes the zero state") {
  fs::path dir = fresh_dir("solve");
  RunConfig cfg = parse_config(R"({"command":"solve-obstacle","instance":"below-boundary"})");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 0);
  auto state = read_grid_function_csv((dir / "below-boundary.state.csv").string());
  for (double v : state.values()) CHECK(v == Catch::Approx(0.0).margin(1e-9));
  auto report = nlohmann::json::parse(read_file(dir / "below-boundary.state.json"));
  CHECK(report["converged"].get<bool>());
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest["command"] == "solve-obstacle");
  CHECK(manifest["files"].size() == 2);
}

TEST_CASE("run optimal-control rejects infeasible inline data with exit 1") {
  fs::path dir = fresh_dir("infeasible");
  RunConfig cfg = parse_config(R"({
    "command": "optimal-control",
    "instance": {
      "grid": {"dimension": 1, "nodes": [5], "extent": [1.0]},
      "obstacle": 1.0,
      "boundary": 0,
      "profile": 1.0
    }
  })");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 1);
  CHECK(log.str().find("InfeasibleObstacle") != std::string::npos);
}

TEST_CASE("run converge on a small constant profile certifies and reruns identically") {
  fs::path dir = fresh_dir("converge");
  RunConfig cfg = parse_config(R"({
    "command": "converge",
    "instance": {
      "grid": {"dimension": 1, "nodes": [17], "extent": [1.0]},
      "obstacle": 0.0,
      "boundary": 0,
      "profile": 1.0
    },
    "p_schedule": [2, 4]
  })");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 0);
  auto summary = nlohmann::json::parse(read_file(dir / "inline.summary.json"));
  CHECK(summary["C_inf"].get<double>() == Catch::Approx(1.0).margin(1e-6));
  CHECK(summary["all_certified"].get<bool>());
  std::string table1 = read_file(dir / "inline.table.csv");
  CHECK(table1.rfind("p,C_p,fixed_point_residual,wall_time_s", 0) == 0);

  // byte-stable rerun apart from measured wall times
  auto manifest1 = nlohmann::json::parse(read_file(dir / "manifest.json"));
  std::ostringstream log2;
  CHECK(run(cfg, log2) == 0);
  auto manifest2 = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest1 == manifest2);
  auto strip_wall = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      auto pos = line.rfind(',');
      out += line.substr(0, pos) + "\n";
    }
    return out;
  };
  std::string table2 = read_file(dir / "inline.table.csv");
  CHECK(strip_wall(table1) == strip_wall(table2));
  CHECK(scrub_wall_time(summary) ==
        scrub_wall_time(nlohmann::json::parse(read_file(dir / "inline.summary.json"))));
}

TEST_CASE("run optimal-control writes control, state, and sidecar") {
  fs::path dir = fresh_dir("control");
  RunConfig cfg = parse_config(R"({
    "command": "optimal-control",
    "instance": {
      "grid": {"dimension": 1, "nodes": [17], "extent": [1.0]},
      "obstacle": 0.0,
      "boundary": 0,
      "profile": 1.0
    },
    "p": 2
  })");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 0);
  auto sidecar = nlohmann::json::parse(read_file(dir / "inline.solution.json"));
  CHECK(sidecar["p"].get<double>() == 2.0);
  CHECK(sidecar["converged"].get<bool>());
  CHECK(sidecar["fixed_point_residual"].get<double>() <= 1e-4);
  double objective = sidecar["objective"].get<double>();
  auto control = read_grid_function_csv((dir / "inline.control.csv").string());
  auto z = GridFunction::constant(control.grid(), 1.0);
  CHECK(objective == Catch::Approx(eval_Jp(control, z, 2.0)).margin(1e-9));
}

TEST_CASE("run oracle-check writes a passing report") {
  fs::path dir = fresh_dir("oracle");
  RunConfig cfg = parse_config(R"({"command":"oracle-check","seed":7})");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 0);
  auto rep = nlohmann::json::parse(read_file(dir / "oracle_report.json"));
  CHECK(rep["ok"].get<bool>());
  CHECK(rep["liminf_max"]["cases"].get<int>() == 100);
}

TEST_CASE("run converge over several built-ins in parallel") {
  fs::path dir = fresh_dir("multi");
  RunConfig cfg = parse_config(R"({
    "command": "converge",
    "instances": ["constant-profile-1d", "twopeak1d"],
    "p_schedule": [2, 4],
    "max_threads": 2
  })");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  int code = run(cfg, log);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "constant-profile-1d.table.csv"));
  CHECK(fs::exists(dir / "twopeak1d.table.csv"));
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest["files"].size() == 4);
}

TEST_CASE("run optimal-control flags an unmet certificate with exit 2") {
  fs::path dir = fresh_dir("exit2");
  // the twopeak control solve carries a tiny but nonzero fixed-point
  // residual; an unreachable certificate tolerance must downgrade the run
  RunConfig cfg = parse_config(R"({
    "command": "optimal-control",
    "instance": "twopeak1d",
    "p": 2,
    "tolerances": {"certificate": 1e-20}
  })");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(run(cfg, log) == 2);
  auto sidecar = nlohmann::json::parse(read_file(dir / "twopeak1d.solution.json"));
  CHECK_FALSE(sidecar["converged"].get<bool>());
  CHECK(sidecar["fixed_point_residual"].get<double>() > 1e-20);
}

TEST_CASE("run solve-obstacle writes partial artifacts on nonconvergence") {
  fs::path dir = fresh_dir("exit1");
  RunConfig cfg = parse_config(R"({"command":"solve-obstacle","instance":"twopeak1d"})");
  cfg.output_dir = dir.string();
  cfg.solver.max_iter_factor = 0;  // no sweeps allowed
  std::ostringstream log;
  CHECK(run(cfg, log) == 1);
  CHECK(log.str().find("NonConvergence") != std::string::npos);
  CHECK(fs::exists(dir / "twopeak1d.state.csv"));
  auto report = nlohmann::json::parse(read_file(dir / "twopeak1d.state.json"));
  CHECK_FALSE(report["converged"].get<bool>());
  CHECK(fs::exists(dir / "manifest.json"));
}
