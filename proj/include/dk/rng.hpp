#ifndef DK_RNG_HPP
#define DK_RNG_HPP

// Seeded random number utilities. Gaussian draws use Box-Muller over an
// explicit 53-bit uniform so that sequences depend only on the mt19937_64
// stream, not on any standard-library distribution implementation.
// Sampler identifier recorded in run metadata: "box_muller_mt19937_64".

#include <cmath>
#include <cstdint>
#include <random>

namespace dk {

inline constexpr const char* kGaussianSamplerId = "box_muller_mt19937_64";

// SplitMix64 finalizer, used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-replica seed: a counter-based split of the master seed, so adding
// replicas never perturbs the streams of existing ones.
inline std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica_id) {
  return splitmix64(master_seed ^ splitmix64(replica_id + 1));
}

class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in (0,1]; never returns 0 so log() below is safe.
  double uniform() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal draw.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dk

#endif  // DK_RNG_HPP
