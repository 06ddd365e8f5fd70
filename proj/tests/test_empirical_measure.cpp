#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dk/empirical_measure.hpp"

using namespace dk;

TEST_CASE("construction sorts and validates") {
  EmpiricalMeasure m({0.7, 0.2, 1.0});
  CHECK(m.atoms == std::vector<double>{0.2, 0.7, 1.0});
  CHECK(m.weight() == Catch::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(EmpiricalMeasure({}), std::domain_error);
  CHECK_THROWS_AS(EmpiricalMeasure({0.0, 0.5}), std::domain_error);
  CHECK_THROWS_AS(EmpiricalMeasure({0.5, 1.1}), std::domain_error);
}

TEST_CASE("lifted positions reduce mod 1") {
  const EmpiricalMeasure m = from_state_positions({1.25, -0.3, 0.5});
  CHECK(m.atoms == std::vector<double>{0.25, 0.5, 0.7});
}

TEST_CASE("cdf and quantile are a Galois pair") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> unif(1e-6, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a;
    for (int i = 0; i < 17; ++i) a.push_back(unif(eng));
    const EmpiricalMeasure m(std::move(a));
    for (int i = 0; i < 40; ++i) {
      const double u = unif(eng);
      const double g = quantile(m, u);
      // G(u) <= x  iff  u <= F(x)
      CHECK(cdf(m, g) >= u - 1e-12);
      if (g > m.atoms.front()) {
        const double below = g - 1e-9;
        CHECK(cdf(m, below) < u);
      }
    }
    for (double atom : m.atoms) {
      CHECK(quantile(m, cdf(m, atom)) == atom);
    }
  }
}

TEST_CASE("quantile rejects u outside (0,1]") {
  const EmpiricalMeasure m({0.5});
  CHECK_THROWS_AS(quantile(m, 0.0), std::domain_error);
  CHECK_THROWS_AS(quantile(m, 1.5), std::domain_error);
  CHECK(quantile(m, 1.0) == 0.5);
}

TEST_CASE("max window mass on hand cases") {
  CHECK(max_window_mass(from_state_positions({0.0, 0.25, 0.5, 0.75}), 0.125) ==
        Catch::Approx(0.25));
  CHECK(max_window_mass(from_state_positions({0.0, 0.001, 0.002, 0.5}), 0.01) ==
        Catch::Approx(0.75));
  // cluster across the wrap point
  CHECK(max_window_mass(from_state_positions({0.999, 0.0005, 0.001, 0.5}), 0.01) ==
        Catch::Approx(0.75));
  CHECK(max_window_mass(from_state_positions({0.1, 0.2}), 0.5) == 1.0);
  CHECK_THROWS_AS(max_window_mass(from_state_positions({0.1}), 0.0), std::domain_error);
}

TEST_CASE("window mass never decreases with width") {
  std::mt19937_64 eng(23);
  std::uniform_real_distribution<double> unif(1e-6, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a;
    for (int i = 0; i < 25; ++i) a.push_back(unif(eng));
    const EmpiricalMeasure m(std::move(a));
    double prev = 0.0;
    for (double w : {0.01, 0.05, 0.2, 0.6, 0.95}) {
      const double cur = max_window_mass(m, w);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("circular W1 basics") {
  const EmpiricalMeasure a = from_state_positions({0.1, 0.4, 0.8});
  CHECK(wasserstein1(a, a) == Catch::Approx(0.0).margin(1e-15));
  // rigid rotation by 0.05 costs exactly 0.05
  const EmpiricalMeasure b = from_state_positions({0.15, 0.45, 0.85});
  CHECK(wasserstein1(a, b) == Catch::Approx(0.05).epsilon(1e-12));
  // wrap-around matching beats the naive sorted one
  const EmpiricalMeasure c = from_state_positions({0.3, 0.6, 0.99});
  const EmpiricalMeasure d = from_state_positions({0.01, 0.32, 0.62});
  CHECK(wasserstein1(c, d) == Catch::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("piecewise density cdf and quantile") {
  const DensityMeasure d({0.0, 0.25, 0.5, 0.75, 1.0}, {1.5, 0.5, 0.5, 1.5});
  CHECK(d.cdf(0.0) == 0.0);
  CHECK(d.cdf(0.25) == Catch::Approx(0.375));
  CHECK(d.cdf(1.0) == Catch::Approx(1.0));
  CHECK(d.density(0.1) == 1.5);
  CHECK(d.density(0.6) == 0.5);
  CHECK(d.strictly_positive());
  // quantile inverts the cdf where the density is positive
  for (double u : {0.05, 0.2, 0.375, 0.41, 0.62, 0.99}) {
    CHECK(d.cdf(quantile_of_density(d, u)) == Catch::Approx(u).margin(1e-12));
  }
  CHECK(quantile_of_density(DensityMeasure::uniform(), 0.37) == Catch::Approx(0.37));
}

TEST_CASE("density validation") {
  CHECK_THROWS_AS(DensityMeasure({0.0, 0.5}, {1.0}), std::domain_error);      // mass 1/2
  CHECK_THROWS_AS(DensityMeasure({0.1, 1.0}, {1.0}), std::domain_error);      // support
  CHECK_THROWS_AS(DensityMeasure({0.0, 0.5, 0.4, 1.0}, {1.0, 1.0, 1.0}),
                  std::domain_error);                                         // order
}
