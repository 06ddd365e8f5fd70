#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dk/runner.hpp"

using namespace dk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parsing") {
  const ExperimentConfig cfg = parse_config_text(
      "# comment\n"
      "N = 16\n"
      "beta = 1.5\n"
      "alpha = 0.3\n"
      "dt = 1e-3\n"
      "T = 0.01\n"
      "mode = frozen_frame\n"
      "seed = 99\n"
      "replicas = 4\n"
      "save_stride = 2\n"
      "tests = kernel,qv\n"
      "output_dir = /tmp/dk_cfg_test\n");
  CHECK(cfg.params.N == 16);
  CHECK(cfg.params.beta == 1.5);
  CHECK(cfg.params.seed == 99);
  CHECK(cfg.replicas == 4);
  CHECK(cfg.save_stride == 2);
  CHECK(cfg.tests == std::vector<std::string>{"kernel", "qv"});
  CHECK(cfg.output_dir == "/tmp/dk_cfg_test");
}

TEST_CASE("config errors carry the line number") {
  try {
    parse_config_text("N = 16\nN 16\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_config_text("bogus_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
}

TEST_CASE("mode names round-trip") {
  for (NoiseFrame m : {NoiseFrame::frozen_frame, NoiseFrame::common_noise,
                       NoiseFrame::pure_frozen_flow}) {
    CHECK(parse_mode(mode_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("white"), ConfigError);
}

TEST_CASE("canonical text and hash are stable under key order") {
  const ExperimentConfig a = parse_config_text("N = 8\nbeta = 1.2\nseed = 7\n");
  const ExperimentConfig b = parse_config_text("seed = 7\nbeta = 1.2\nN = 8\n");
  CHECK(canonical_config_text(a) == canonical_config_text(b));
  CHECK(config_hash(a) == config_hash(b));
  const ExperimentConfig c = parse_config_text("N = 8\nbeta = 1.2\nseed = 8\n");
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("run writes trajectories, reports and the manifest") {
  ExperimentConfig cfg;
  cfg.params.N = 8;
  cfg.params.beta = 1.5;
  cfg.params.dt = 1e-3;
  cfg.params.T = 5e-3;
  cfg.params.seed = 4;
  cfg.replicas = 3;
  cfg.save_stride = 1;
  cfg.tests = {"kernel"};
  cfg.output_dir = "/tmp/dk_run_test";
  fs::remove_all(cfg.output_dir);

  const RunManifest man = run(cfg);
  CHECK(man.all_pass);
  CHECK(man.test_results.at("kernel"));
  CHECK(fs::exists(cfg.output_dir + "/trajectories.tsv"));
  CHECK(fs::exists(cfg.output_dir + "/diagnostics.tsv"));
  CHECK(fs::exists(cfg.output_dir + "/reports/kernel.json"));

  const json manifest = json::parse(slurp(cfg.output_dir + "/manifest.json"));
  CHECK(manifest["schema_version"] == kSchemaVersion);
  CHECK(manifest["build_id"] == kBuildId);
  CHECK(manifest["gaussian_sampler"] == kGaussianSamplerId);
  CHECK(manifest["config_hash"] == man.config_hash);
  CHECK(manifest["completed_replicas"] == 3);
  CHECK(manifest["replica_seeds"].size() == 3);
  CHECK(manifest["all_pass"] == true);

  // header row plus one row per replica per save time
  std::istringstream traj(slurp(cfg.output_dir + "/trajectories.tsv"));
  std::string line;
  REQUIRE(std::getline(traj, line));
  CHECK(line.rfind("replica_id\tt\t", 0) == 0);
  int rows = 0;
  while (std::getline(traj, line)) ++rows;
  CHECK(rows == 3 * 6);
}

TEST_CASE("identical configs give byte-identical outputs") {
  ExperimentConfig cfg;
  cfg.params.N = 8;
  cfg.params.dt = 1e-3;
  cfg.params.T = 4e-3;
  cfg.params.seed = 11;
  cfg.replicas = 2;
  cfg.tests = {"collisions"};

  cfg.output_dir = "/tmp/dk_det_a";
  fs::remove_all(cfg.output_dir);
  run(cfg);
  cfg.output_dir = "/tmp/dk_det_b";
  fs::remove_all(cfg.output_dir);
  run(cfg);

  CHECK(slurp("/tmp/dk_det_a/trajectories.tsv") == slurp("/tmp/dk_det_b/trajectories.tsv"));
  CHECK(slurp("/tmp/dk_det_a/diagnostics.tsv") == slurp("/tmp/dk_det_b/diagnostics.tsv"));
  CHECK(slurp("/tmp/dk_det_a/reports/collisions.json") ==
        slurp("/tmp/dk_det_b/reports/collisions.json"));
}

TEST_CASE("unknown named test is rejected") {
  ExperimentConfig cfg;
  cfg.params.N = 4;
  cfg.params.dt = 1e-3;
  cfg.params.T = 2e-3;
  const PathEnsemble e = run_ensemble(cfg.params, 1, 1);
  CHECK_THROWS_AS(run_named_test("spectrogram", cfg, e), ConfigError);
}

TEST_CASE("kernel and qform self-checks pass at default settings") {
  CHECK(test_kernel(1.5, 64, 50, 1)["pass"].get<bool>());
  CHECK(test_qform({1.5, 4.0}, 4, 2, 64, 2)["pass"].get<bool>());
}

TEST_CASE("drift scan recovers the interaction scaling") {
  const json j = scan_drift({16, 32, 64}, 0.5, 40, 3);
  CHECK(j["pass"].get<bool>());
  CHECK(j["slope"].get<double>() == Catch::Approx(-0.5).margin(0.15));
}
