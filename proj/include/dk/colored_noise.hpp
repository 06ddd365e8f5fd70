#ifndef DK_COLORED_NOISE_HPP
#define DK_COLORED_NOISE_HPP

// Sampling of the mode Brownian motions {W^k}, the Q-Wiener field
// xi^beta(t,x) = sum a_k e_k(x) W_t^k, and the measure-dependent field
// xi^beta_mu with frame e_k(F_mu(x)). Modes are indexed k = -N..N and
// stored at offset k + N.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dk/rng.hpp"
#include "dk/torus_math.hpp"

namespace dk {

struct ModeIncrement {
  double dt = 0.0;
  std::vector<double> dW;  // length 2*num_modes+1, index k + num_modes
};

// Single-owner stream of independent Gaussian(0, dt) mode increments.
// Two streams with the same (seed, replica_id) are bit-identical; the stream
// for each replica is derived from the master seed by replica_seed(), so the
// draws of one replica never depend on how many others run.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t replica_id, int num_modes)
      : seed_(seed),
        replica_id_(replica_id),
        num_modes_(num_modes),
        rng_(replica_seed(seed, replica_id)) {
    if (num_modes < 0) throw std::domain_error("NoiseStream: num_modes < 0");
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replica_id() const { return replica_id_; }
  int num_modes() const { return num_modes_; }
  long step_count() const { return steps_; }

  ModeIncrement sample_increments(double dt) {
    if (!(dt > 0.0)) throw std::domain_error("sample_increments: dt <= 0");
    ModeIncrement inc;
    inc.dt = dt;
    inc.dW.resize(2 * num_modes_ + 1);
    const double sd = std::sqrt(dt);
    for (double& w : inc.dW) w = sd * rng_.gaussian();
    ++steps_;
    return inc;
  }

  // Raw standard normal, used by the step splitter for Brownian-bridge draws.
  double gaussian() { return rng_.gaussian(); }

 private:
  std::uint64_t seed_;
  std::uint64_t replica_id_;
  int num_modes_;
  GaussianRng rng_;
  long steps_ = 0;
};

// Cumulative mode values W_t^k, index k + num_modes.
inline void accumulate(std::vector<double>& W, const ModeIncrement& inc) {
  if (W.size() != inc.dW.size()) {
    throw std::invalid_argument("accumulate: size mismatch");
  }
  for (std::size_t j = 0; j < W.size(); ++j) W[j] += inc.dW[j];
}

// xi^beta(t,x) = sum_{|k|<=N} a_k e_k(x) W_t^k.
inline double qwiener_field(const std::vector<double>& W, double beta, double x) {
  const int N = (static_cast<int>(W.size()) - 1) / 2;
  double v = 0.0;
  for (int k = -N; k <= N; ++k) {
    v += noise_coeff(k, beta) * fourier_basis(k, x) * W[k + N];
  }
  return v;
}

// xi^beta_mu(t,x) = sum_{|k|<=N} a_k e_k(F_mu(x)) W_t^k.
inline double mu_noise_field(const std::vector<double>& W, double beta,
                             const std::function<double(double)>& F_mu, double x) {
  return qwiener_field(W, beta, F_mu(x));
}

}  // namespace dk

#endif  // DK_COLORED_NOISE_HPP
