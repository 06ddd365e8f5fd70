#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dk/ensemble.hpp"
#include "dk/particle_system.hpp"

using namespace dk;

namespace {

ModelParams small_params() {
  ModelParams p;
  p.N = 8;
  p.beta = 1.5;
  p.alpha = 0.3;
  p.dt = 1e-3;
  p.T = 0.02;
  return p;
}

}  // namespace

TEST_CASE("initial state is the ordered uniform grid") {
  ModelParams p = small_params();
  p.N = 4;
  const ParticleState s = initial_state(p);
  REQUIRE(s.size() == 4);
  CHECK(s.x == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(in_delta_N(s.x));
  CHECK(min_chord_gap(s) == Catch::Approx(2.0 * std::sin(M_PI / 4)).epsilon(1e-14));
  p.N = 1;
  CHECK_THROWS_AS(initial_state(p), std::domain_error);
}

TEST_CASE("two-particle drift by hand") {
  // coefficient 1/(2 N^(alpha+1)) = 1/8 at N=2, alpha=1; cot(-pi/4) = -1
  ModelParams p;
  p.N = 2;
  p.alpha = 1.0;
  ParticleState s;
  s.x = {0.0, 0.25};
  const std::vector<double> b = drift(s, p);
  CHECK(b[0] == Catch::Approx(-0.125).epsilon(1e-13));
  CHECK(b[1] == Catch::Approx(0.125).epsilon(1e-13));
}

TEST_CASE("drift increments sum to zero") {
  ModelParams p = small_params();
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x;
    for (int i = 0; i < p.N; ++i) x.push_back(unif(eng));
    std::sort(x.begin(), x.end());
    ParticleState s;
    s.x = x;
    const std::vector<double> b = drift(s, p);
    double total = 0.0;
    for (double bi : b) total += bi;
    CHECK(std::abs(total) < 1e-10 * p.N);
  }
}

TEST_CASE("truncated cot matches cot away from the cutoff") {
  const double R = 1e6;
  for (double g : {0.01, 0.1, 0.3, 0.49}) {
    CHECK(truncated_cot(g, R) == Catch::Approx(1.0 / std::tan(M_PI * g)).epsilon(1e-12));
    CHECK(truncated_cot(-g, R) == Catch::Approx(-truncated_cot(g, R)).epsilon(1e-12));
  }
  // capped and continuous through the matching point
  const double cut = std::asin(1.0 / R) / M_PI;
  CHECK(std::abs(truncated_cot(cut * 0.5, R)) <= std::abs(truncated_cot(cut, R)) * 1.01);
  CHECK_THROWS_AS(truncated_cot(0.1, 1.0), std::domain_error);
}

TEST_CASE("diffusion rows carry the full spectral mass") {
  ModelParams p = small_params();
  const ParticleState s = initial_state(p);
  const std::vector<double> sigma = diffusion_matrix(p, s);
  const int modes = 2 * p.N + 1;
  REQUIRE(static_cast<int>(sigma.size()) == p.N * modes);
  const double q0 = kernel_qbar(p.beta, 0.0, p.N).first;
  for (int i = 0; i < p.N; ++i) {
    double row = 0.0;
    for (int m = 0; m < modes; ++m) row += sigma[i * modes + m] * sigma[i * modes + m];
    CHECK(row == Catch::Approx(q0).epsilon(1e-12));
  }
  p.mode = NoiseFrame::common_noise;
  CHECK_THROWS_AS(diffusion_matrix(p, s), std::logic_error);
}

TEST_CASE("energy and radius reference values") {
  ParticleState s;
  s.x = {0.0, 0.5};
  CHECK(lyapunov(s) == Catch::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));
  ModelParams p = small_params();
  p.N = 4;
  CHECK(radial(initial_state(p)) == Catch::Approx(0.234375).epsilon(1e-14));
}

TEST_CASE("simulation is deterministic and stays in the ordered cone") {
  const ModelParams p = small_params();
  const TrajectoryRecord a = simulate(p, 1, 5);
  const TrajectoryRecord b = simulate(p, 1, 5);
  REQUIRE(a.completed);
  CHECK(a.times == b.times);
  CHECK(a.states == b.states);
  const TrajectoryRecord c = simulate(p, 2, 5);
  CHECK(a.states.back() != c.states.back());
  for (const auto& x : a.states) {
    CHECK(in_delta_N(x));
    CHECK(min_chord_gap(x) > p.gap_floor);
  }
  CHECK(a.times.front() == 0.0);
  CHECK(a.times.back() == Catch::Approx(p.T));
  REQUIRE(a.diagnostics.size() == a.times.size());
  CHECK(a.diagnostics[0].lyapunov == Catch::Approx(lyapunov(initial_state(p))));
}

TEST_CASE("relabel restores order without moving the measure") {
  std::mt19937_64 eng(17);
  std::normal_distribution<double> kick(0.0, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x;
    for (int i = 1; i <= 12; ++i) x.push_back(i / 12.0 + kick(eng));
    std::vector<double> before = x;
    detail::relabel(x);
    CHECK(in_delta_N(x));
    // same multiset on the torus
    std::vector<double> fa, fb;
    for (double v : before) fa.push_back(frac(v));
    for (double v : x) fb.push_back(frac(v));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    for (std::size_t i = 0; i < fa.size(); ++i) {
      CHECK(fa[i] == Catch::Approx(fb[i]).margin(1e-12));
    }
  }
}

TEST_CASE("collision bound is monotone in R and clipped to one") {
  ModelParams p = small_params();
  const double f0 = lyapunov(initial_state(p));
  const double b6 = collision_probability_bound(p, 1e6, f0);
  const double b12 = collision_probability_bound(p, 1e12, f0);
  CHECK(b6 <= 1.0);
  CHECK(b12 <= b6);
  CHECK(b12 > 0.0);
}

TEST_CASE("small ensembles reuse per-replica seeds") {
  const ModelParams p = small_params();
  const PathEnsemble e2 = run_ensemble(p, 2, 5);
  const PathEnsemble e4 = run_ensemble(p, 4, 5);
  REQUIRE(e2.count() == 2);
  CHECK(e2.completed_count() == 2);
  // adding replicas never changes the existing ones
  CHECK(e2.replicas[0].states == e4.replicas[0].states);
  CHECK(e2.replicas[1].states == e4.replicas[1].states);
}
