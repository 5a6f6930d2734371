#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "obs/config.hpp"
#include "obs/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw obs::IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"obstacle-problem solvers, optimal control, and convergence studies"};
  app.require_subcommand(1);

  std::string config_path, p_override, out_override;
  long long seed_override = -1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--p", p_override, "override exponent p (number or 'inf')");
    sub->add_option("--out", out_override, "override output directory");
    sub->add_option("--seed", seed_override, "override RNG seed");
  };
  for (const char* name : {"solve-obstacle", "optimal-control", "converge", "oracle-check"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);

  try {
    obs::RunConfig cfg = obs::parse_config(slurp(config_path));
    cfg.command = app.get_subcommands().front()->get_name();
    if (!p_override.empty()) {
      if (p_override == "inf") {
        cfg.p = obs::kInfExponent;
      } else {
        cfg.p = std::stod(p_override);
        if (!(cfg.p > 1.0)) throw obs::ConfigError("--p: exponent must satisfy p > 1");
      }
    }
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (const char* env = std::getenv("OBSCTL_MAX_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v >= 1) cfg.max_threads = static_cast<std::size_t>(v);
    }
    return obs::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
