#ifndef DK_TORUS_MATH_HPP
#define DK_TORUS_MATH_HPP

// Deterministic primitives on the 1-D torus [0,1]: fractional part,
// the Fourier orthonormal system {e_k}, spectral noise weights a_k,
// the covariance kernel Qbar, and the convergence predicate for
// power-law noise intensities. All functions here are pure.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dk {

// Fractional part with the convention [x] = x - 1 for integer x, so that
// frac maps R onto (0,1] and frac(n) = 1 for every integer n.
inline double frac(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("frac: non-finite input");
  }
  const double f = x - std::floor(x);
  return (f == 0.0) ? 1.0 : f;
}

// Orthonormal Fourier system on [0,1]:
//   e_k(x) = sqrt(2) sin(2 pi k x)   k >= 1
//   e_0(x) = 1
//   e_k(x) = sqrt(2) cos(2 pi |k| x) k <= -1
inline double fourier_basis(int k, double x) {
  if (k == 0) return 1.0;
  const double arg = 2.0 * M_PI * static_cast<double>(std::abs(k)) * x;
  return (k > 0) ? M_SQRT2 * std::sin(arg) : M_SQRT2 * std::cos(arg);
}

// Mode weight a_k: 1 for k = 0, |k|^(-beta) otherwise. The k = 0 weight is
// pinned by the covariance 1 + sum 2 k^(-2 beta) cos(...), whose constant
// term is 1.
inline double noise_coeff(int k, double beta) {
  if (k == 0) return 1.0;
  return std::pow(static_cast<double>(std::abs(k)), -beta);
}

// Integral-comparison bound on the series tail 2 * sum_{k>K} k^(-2 beta).
inline double kernel_tail_bound(double beta, int k_trunc) {
  const double s = 2.0 * beta - 1.0;
  return 2.0 / (s * std::pow(static_cast<double>(k_trunc), s));
}

// Truncated covariance kernel Qbar^beta(u) = 1 + sum_{k=1}^{K} 2 k^(-2 beta)
// cos(2 pi k u), together with a rigorous bound on the omitted tail. The true
// kernel lies within value +- tail_bound.
inline std::pair<double, double> kernel_qbar(double beta, double u, int k_trunc) {
  if (beta <= 1.0) {
    throw std::domain_error("kernel_qbar: requires beta > 1");
  }
  if (k_trunc < 1) {
    throw std::domain_error("kernel_qbar: requires K_trunc >= 1");
  }
  double value = 1.0;
  for (int k = 1; k <= k_trunc; ++k) {
    value += 2.0 * std::pow(static_cast<double>(k), -2.0 * beta) *
             std::cos(2.0 * M_PI * k * u);
  }
  return {value, kernel_tail_bound(beta, k_trunc)};
}

struct SpectralConstants {
  double beta = 0.0;
  double k1_N = 0.0;    // sum_{j<=N} 4 pi^2 j^(-(2 beta - 2))
  double k2_N = 0.0;    // 1/2 + sum_{j<=N} j^(-2 beta)
  double k2_inf = 0.0;  // 1/2 + sum_{j>=1} j^(-2 beta)
  int mode_cut = 0;
};

// Full zeta-type sum sum_{j>=1} j^(-s) for s > 1, via partial sum plus an
// Euler-Maclaurin tail; absolute error far below 1e-12 for s >= 2.
inline double power_series_sum(double s) {
  const int J = 10000;
  double sum = 0.0;
  for (int j = J; j >= 1; --j) {
    sum += std::pow(static_cast<double>(j), -s);
  }
  const double x = static_cast<double>(J);
  // Tail sum_{j>J} j^(-s) by Euler-Maclaurin at x = J.
  double tail = std::pow(x, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(x, -s) +
                (s / 12.0) * std::pow(x, -s - 1.0) -
                s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(x, -s - 3.0);
  return sum + tail;
}

// K_1^N, K_2^N and the limiting K_2^beta spectral sums.
// beta = 1 is admitted for the constants themselves (the model needs beta > 1).
inline SpectralConstants spectral_constants(double beta, int N) {
  if (N < 1) throw std::domain_error("spectral_constants: requires N >= 1");
  SpectralConstants c;
  c.beta = beta;
  c.mode_cut = N;
  for (int j = N; j >= 1; --j) {
    c.k1_N += 4.0 * M_PI * M_PI * std::pow(static_cast<double>(j), -(2.0 * beta - 2.0));
    c.k2_N += std::pow(static_cast<double>(j), -2.0 * beta);
  }
  c.k2_N += 0.5;
  c.k2_inf = 0.5 + power_series_sum(2.0 * beta);
  return c;
}

// Convergence predicate for sum_j j^(threshold-1) * lambda_j with the power
// law lambda_j = j^(-decay_exp): the exponent threshold - 1 - decay_exp is
// summable iff threshold < decay_exp. Analytic, no numeric summation.
inline bool intensity_exceeds(double decay_exp, double threshold) {
  return threshold < decay_exp;
}

}  // namespace dk

#endif  // DK_TORUS_MATH_HPP
