// Command-line front end: run simulations and statistical checks, write
// trajectories/diagnostics/reports to an output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dk/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  int N = -1;
  double beta = -1.0, alpha = -1.0, dt = -1.0, T = -1.0;
  int replicas = -1;
  long long seed = -1;
  std::string mode;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "key=value config file");
  app->add_option("--N", f.N, "particle count");
  app->add_option("--beta", f.beta, "noise decay exponent (> 1)");
  app->add_option("--alpha", f.alpha, "interaction scaling exponent");
  app->add_option("--dt", f.dt, "time step");
  app->add_option("--T", f.T, "time horizon");
  app->add_option("--replicas", f.replicas, "replica count");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--mode", f.mode,
                  "frozen_frame | common_noise | pure_frozen_flow");
  app->add_option("--out", f.out, "output directory");
}

dk::ExperimentConfig materialize(const CommonFlags& f,
                                 const std::vector<std::string>& tests) {
  dk::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = dk::parse_config_file(f.config_path);
  if (f.N > 0) cfg.params.N = f.N;
  if (f.beta > 0) cfg.params.beta = f.beta;
  if (f.alpha >= 0) cfg.params.alpha = f.alpha;
  if (f.dt > 0) cfg.params.dt = f.dt;
  if (f.T > 0) cfg.params.T = f.T;
  if (f.replicas > 0) cfg.replicas = f.replicas;
  if (f.seed >= 0) cfg.params.seed = static_cast<std::uint64_t>(f.seed);
  if (!f.mode.empty()) cfg.params.mode = dk::parse_mode(f.mode);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!tests.empty()) cfg.tests = tests;
  return cfg;
}

int execute(const CommonFlags& f, const std::vector<std::string>& tests) {
  const dk::ExperimentConfig cfg = materialize(f, tests);
  const dk::RunManifest man = dk::run(cfg);
  for (const auto& [name, pass] : man.test_results) {
    std::printf("%-12s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
  }
  std::printf("outputs in %s (config hash %016llx, %.1fs)\n",
              cfg.output_dir.c_str(),
              static_cast<unsigned long long>(man.config_hash),
              man.wall_clock_sec);
  return man.all_pass ? 0 : 1;
}

int report_cmd(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest);
  if (!in) {
    std::fprintf(stderr, "no manifest.json in %s\n", dir.c_str());
    return 2;
  }
  dk::json j;
  in >> j;
  std::printf("run %016llx  build '%s'  sampler %s\n",
              j["config_hash"].get<unsigned long long>(),
              j["build_id"].get<std::string>().c_str(),
              j["gaussian_sampler"].get<std::string>().c_str());
  std::printf("replicas %d (completed %d)  drift regime: %s\n",
              j["replicas"].get<int>(), j["completed_replicas"].get<int>(),
              j["in_drift_regime"].get<bool>() ? "yes" : "no");
  bool all = true;
  for (const auto& [name, pass] : j["tests"].items()) {
    std::printf("  %-12s %s\n", name.c_str(), pass.get<bool>() ? "PASS" : "FAIL");
    all = all && pass.get<bool>();
  }
  std::printf("overall: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularized interacting-particle simulator and statistics lab"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    std::vector<std::string> tests;
  };
  const std::vector<Sub> subs = {
      {"simulate", "integrate an ensemble and write trajectories", {}},
      {"test-martingale", "null test of the compensated observable", {"martingale"}},
      {"test-qv", "realized vs exact quadratic variation", {"qv"}},
      {"test-qform", "direct vs spectral quadratic form", {"qform"}},
      {"test-kernel", "covariance kernel consistency checks", {"kernel"}},
      {"test-lyapunov", "logarithmic-energy supermartingale check", {"lyapunov"}},
      {"scan-drift", "interaction-term magnitude scaling in N", {"drift-scan"}},
      {"window-mass", "short-window mass (non-atomicity proxy)", {"window-mass"}},
  };

  std::vector<CommonFlags> flags(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* sc = app.add_subcommand(subs[i].name, subs[i].desc);
    add_common(sc, flags[i]);
    apps.push_back(sc);
  }

  std::string report_dir = "out";
  CLI::App* rep = app.add_subcommand("report", "summarize a finished run directory");
  rep->add_option("--out", report_dir, "run directory to summarize");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rep->parsed()) return report_cmd(report_dir);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (apps[i]->parsed()) return execute(flags[i], subs[i].tests);
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;
}
