#include <catch2/catch_amalgamated.hpp>

#include "dk/torus_math.hpp"

using namespace dk;

TEST_CASE("frac reduces to (0,1]") {
  CHECK(frac(-0.3) == Catch::Approx(0.7).margin(1e-15));
  CHECK(frac(2.25) == Catch::Approx(0.25).margin(1e-15));
  CHECK(frac(1.0) == 1.0);
  CHECK(frac(0.0) == 1.0);
  CHECK_THROWS_AS(frac(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("fourier basis values") {
  CHECK(fourier_basis(0, 0.37) == 1.0);
  CHECK(fourier_basis(1, 0.25) == Catch::Approx(M_SQRT2).epsilon(1e-14));
  CHECK(fourier_basis(-1, 0.0) == Catch::Approx(M_SQRT2).epsilon(1e-14));
  CHECK(fourier_basis(2, 0.5) == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("fourier basis orthonormality on a grid") {
  // trapezoid on a periodic grid is spectrally exact for low modes
  const int G = 4096;
  auto ip = [G](int k, int l) {
    double s = 0.0;
    for (int i = 0; i < G; ++i) {
      const double x = static_cast<double>(i) / G;
      s += fourier_basis(k, x) * fourier_basis(l, x);
    }
    return s / G;
  };
  for (int k : {-3, -1, 0, 2, 5}) {
    for (int l : {-3, -1, 0, 2, 5}) {
      const double want = (k == l) ? 1.0 : 0.0;
      CHECK(ip(k, l) == Catch::Approx(want).margin(1e-12));
    }
  }
}

TEST_CASE("noise coefficients") {
  CHECK(noise_coeff(0, 1.5) == 1.0);
  CHECK(noise_coeff(3, 1.5) == Catch::Approx(std::pow(3.0, -1.5)).epsilon(1e-15));
  CHECK(noise_coeff(-3, 1.5) == noise_coeff(3, 1.5));
}

TEST_CASE("kernel point values") {
  // reference sums computed at 30-digit precision
  CHECK(kernel_qbar(2.0, 0.5, 10).first ==
        Catch::Approx(-0.89398518473442667).epsilon(1e-14));
  CHECK(kernel_qbar(1.5, 0.25, 64).first ==
        Catch::Approx(0.77461796683076037).epsilon(1e-13));
  CHECK_THROWS_AS(kernel_qbar(1.0, 0.1, 10), std::domain_error);
  CHECK_THROWS_AS(kernel_qbar(1.5, 0.1, 0), std::domain_error);
}

TEST_CASE("kernel tail bound decreases in the cutoff") {
  const double t64 = kernel_tail_bound(1.5, 64);
  const double t128 = kernel_tail_bound(1.5, 128);
  CHECK(t64 > t128);
  CHECK(t128 > 0.0);
  // the truncation error is really below the bound
  const double full = kernel_qbar(1.5, 0.3, 100000).first;
  const double cut = kernel_qbar(1.5, 0.3, 64).first;
  CHECK(std::abs(full - cut) <= t64);
}

TEST_CASE("spectral constants against zeta references") {
  // k2_inf = 1/2 + zeta(2 beta)
  CHECK(spectral_constants(1.2, 4).k2_inf ==
        Catch::Approx(1.8833428588407358).epsilon(1e-10));
  CHECK(spectral_constants(1.5, 4).k2_inf ==
        Catch::Approx(1.7020569031595943).epsilon(1e-12));
  CHECK(spectral_constants(2.0, 4).k2_inf ==
        Catch::Approx(1.5823232337111382).epsilon(1e-12));
  CHECK(spectral_constants(4.0, 4).k2_inf ==
        Catch::Approx(1.5040773561979443).epsilon(1e-12));
}

TEST_CASE("finite spectral sums at beta=1.5, N=8") {
  const SpectralConstants c = spectral_constants(1.5, 8);
  CHECK(c.k1_N == Catch::Approx(107.29669927470003).epsilon(1e-13));
  CHECK(c.k2_N == Catch::Approx(1.6951602435617104).epsilon(1e-13));
  CHECK(c.mode_cut == 8);
  // Qbar(0) truncated at N equals 2 K_2^N
  CHECK(kernel_qbar(1.5, 0.0, 8).first == Catch::Approx(2.0 * c.k2_N).epsilon(1e-14));
}
