#ifndef DK_PARTICLE_SYSTEM_HPP
#define DK_PARTICLE_SYSTEM_HPP

// Euler-Maruyama integration of the N-particle interacting SDE on the
// covering line of the torus, with a recursive increment-halving collision
// guard, Lyapunov / radial / chord-gap diagnostics, and the alternative
// noise-frame modes (frozen frame, common noise, pure frozen flow).

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dk/colored_noise.hpp"
#include "dk/empirical_measure.hpp"
#include "dk/torus_math.hpp"

namespace dk {

enum class NoiseFrame { frozen_frame, common_noise, pure_frozen_flow };
enum class InitKind { uniform_grid, density };

struct ModelParams {
  int N = 2;
  double beta = 1.5;
  double alpha = 0.5;        // drift scale 1/(2 N^(alpha+1))
  double T = 1.0;
  double dt = 1e-3;
  NoiseFrame mode = NoiseFrame::frozen_frame;
  double R_trunc = 1e6;      // truncation level for the phi_R safeguard
  std::uint64_t seed = 0;
  InitKind init = InitKind::uniform_grid;
  std::optional<DensityMeasure> init_density;

  double gap_floor = 1e-9;
  int max_substep_depth = 24;

  // Parameter window 0 < alpha < (2 beta - 2) ^ 1. Runs outside it are
  // permitted but labelled out-of-regime.
  bool in_drift_regime() const {
    return alpha > 0.0 && alpha < std::min(2.0 * beta - 2.0, 1.0);
  }
};

// Ordered lifted positions on R: x_1 < ... < x_N with x_N - x_1 < 1.
struct ParticleState {
  double t = 0.0;
  std::vector<double> x;

  int size() const { return static_cast<int>(x.size()); }
};

struct StepDiagnostics {
  double lyapunov = 0.0;
  double radial = 0.0;
  double min_chord_gap = 0.0;
  double drift_term_bound_check = 0.0;  // dt * max_i |b_i| of the accepted step
  int substeps_used = 1;
};

struct CollisionEvent {
  double t = 0.0;
  int particle = 0;
  double gap = 0.0;
};

class CollisionError : public std::runtime_error {
 public:
  explicit CollisionError(CollisionEvent e)
      : std::runtime_error("collision guard exhausted"), event(e) {}
  CollisionEvent event;
};

inline bool in_delta_N(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
  }
  return x.back() - x.front() < 1.0;
}

// X_N^i(0) = i/N for the uniform grid, or the quantile G_{mu0}(i/N) of a
// supplied absolutely continuous initial measure.
inline ParticleState initial_state(const ModelParams& p) {
  if (p.N < 2) throw std::domain_error("initial_state: N >= 2 required");
  ParticleState s;
  s.t = 0.0;
  s.x.resize(p.N);
  if (p.init == InitKind::uniform_grid) {
    for (int i = 1; i <= p.N; ++i) s.x[i - 1] = static_cast<double>(i) / p.N;
  } else {
    if (!p.init_density) throw std::domain_error("initial_state: missing density");
    for (int i = 1; i <= p.N; ++i) {
      s.x[i - 1] = quantile_of_density(*p.init_density, static_cast<double>(i) / p.N);
    }
    if (!in_delta_N(s.x)) {
      throw std::domain_error("initial_state: density quantiles collide");
    }
  }
  return s;
}

// b_i = 1/(2 N^(alpha+1)) sum_{j != i} cot(pi (x_i - x_j)), exact O(N^2)
// pairwise sum; j ascends so the reduction order is fixed.
inline std::vector<double> drift(const ParticleState& s, const ModelParams& p) {
  const int n = s.size();
  const double scale = 0.5 * std::pow(static_cast<double>(p.N), -(p.alpha + 1.0));
  std::vector<double> b(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = s.x[i] - s.x[j];
      if (d == 0.0) throw std::domain_error("drift: coincident particles");
      acc += 1.0 / std::tan(M_PI * d);
    }
    b[i] = scale * acc;
  }
  return b;
}

// The proof's truncation phi_R: equals cot(pi x) outside 1/R of the poles,
// with a C^2 bounded odd quintic across each pole. 1-periodic in x.
inline double truncated_cot(double x, double R) {
  if (!(R > 2.0)) throw std::domain_error("truncated_cot: R > 2 required");
  double y = x - std::round(x);  // (-1/2, 1/2]
  const double h = 1.0 / R;
  if (std::abs(y) > h) return 1.0 / std::tan(M_PI * y);
  // Odd quintic p(y) = c * q(y/h) matching value and two derivatives at y = h.
  const double c = 1.0 / std::tan(M_PI * h);
  const double d1 = -M_PI / (std::sin(M_PI * h) * std::sin(M_PI * h));
  const double sn = std::sin(M_PI * h);
  const double d2 = 2.0 * M_PI * M_PI * std::cos(M_PI * h) / (sn * sn * sn);
  const double q1 = 1.0;
  const double q1p = h * d1 / c;
  const double q1pp = h * h * d2 / c;
  // Solve A+B+C=q1, A+3B+5C=q1p, 6B+20C=q1pp for q(t)=At+Bt^3+Ct^5.
  const double C5 = (q1pp - 3.0 * (q1p - q1)) / 8.0;
  const double B3 = (q1p - q1 - 4.0 * C5) / 2.0;
  const double A1 = q1 - B3 - C5;
  const double t = y / h;
  return c * (A1 * t + B3 * t * t * t + C5 * t * t * t * t * t);
}

// Frozen-frame diffusion coefficients sigma_{i,k} = a_k e_k(F_{mu0}(x_i(0))),
// row-major N x (2N+1) with mode index k + N. Constant for the whole run.
inline std::vector<double> diffusion_matrix(const ModelParams& p,
                                            const ParticleState& initial) {
  if (p.mode == NoiseFrame::common_noise) {
    throw std::logic_error("diffusion_matrix: coefficients are position-dependent in common_noise mode");
  }
  const int n = p.N;
  std::vector<double> sigma(static_cast<std::size_t>(n) * (2 * n + 1));
  for (int i = 0; i < n; ++i) {
    double frame;
    if (p.init == InitKind::uniform_grid) {
      frame = static_cast<double>(i + 1) / n;
    } else {
      frame = p.init_density->cdf(initial.x[i]);
    }
    for (int k = -n; k <= n; ++k) {
      sigma[static_cast<std::size_t>(i) * (2 * n + 1) + (k + n)] =
          noise_coeff(k, p.beta) * fourier_basis(k, frame);
    }
  }
  return sigma;
}

inline double lyapunov(const ParticleState& s) {
  const int n = s.size();
  double acc = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) {
      if (j == l) continue;
      const double chord = 2.0 * std::abs(std::sin(M_PI * (s.x[l] - s.x[j])));
      acc += std::log(chord);
    }
  }
  return -acc / (static_cast<double>(n) * n);
}

inline double radial(const ParticleState& s) {
  double acc = 0.0;
  for (double xi : s.x) acc += xi * xi;
  return acc / (2.0 * s.size());
}

// Minimum chord distance |e^{2 pi i x_l} - e^{2 pi i x_j}|; adjacency plus the
// wraparound pair suffices for an ordered state.
inline double min_chord_gap(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    m = std::min(m, 2.0 * std::abs(std::sin(M_PI * (x[i + 1] - x[i]))));
  }
  m = std::min(m, 2.0 * std::abs(std::sin(M_PI * (x[0] + 1.0 - x[n - 1]))));
  return m;
}

inline double min_chord_gap(const ParticleState& s) { return min_chord_gap(s.x); }

// Tail bound P(tau_R <= T) <= N^2 (F(X_0) + K_2^beta T + log 2)
// / (log R + log 2), clipped to [0,1].
inline double collision_probability_bound(const ModelParams& p, double R, double F0) {
  if (!(R > 1.0)) throw std::domain_error("collision_probability_bound: R > 1 required");
  const double k2b = spectral_constants(p.beta, 1).k2_inf;
  const double bound = static_cast<double>(p.N) * p.N * (F0 + k2b * p.T + std::log(2.0)) /
                       (std::log(R) + std::log(2.0));
  return std::clamp(bound, 0.0, 1.0);
}

namespace detail {

// Near/far split of the interaction drift, frozen at the start of a macro
// step: pairs closer than near_width are re-evaluated every substep (the cot
// varies rapidly there); the far-field sum is computed once. Positions move
// O(sqrt(Qbar(0) dt)) per macro step, so near_width is sized to a multiple of
// that and far pairs cannot become singular within the step.
struct DriftCache {
  bool active = false;  // false in pure_frozen_flow
  double coeff = 0.0;   // 1/(2 N^(alpha+1))
  std::vector<double> b_far;
  std::vector<std::pair<int, int>> near_pairs;
};

inline DriftCache make_drift_cache(const ParticleState& s, const ModelParams& p,
                                   double near_width) {
  DriftCache c;
  const int n = s.size();
  c.b_far.assign(n, 0.0);
  if (p.mode == NoiseFrame::pure_frozen_flow) return c;
  c.active = true;
  c.coeff = 0.5 * std::pow(static_cast<double>(p.N), -(p.alpha + 1.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = s.x[i] - s.x[j];
      const double wrapped = d - std::round(d);
      if (std::abs(wrapped) < near_width) {
        c.near_pairs.emplace_back(i, j);
      } else {
        const double ct = 1.0 / std::tan(M_PI * d);
        c.b_far[i] += c.coeff * ct;
        c.b_far[j] -= c.coeff * ct;
      }
    }
  }
  return c;
}

// Near-pair cot contributions are tamed so that the mutual drift push over a
// substep never exceeds half the current pair distance: explicit Euler on the
// raw cot would overshoot wildly at small gaps (the true integrated effect of
// the singular drift over one step is far smaller than cot(pi g) dt).
inline void drift_eval(const DriftCache& c, const std::vector<double>& x,
                       double dt, std::vector<double>& b) {
  b = c.b_far;
  if (!c.active) return;
  for (const auto& [i, j] : c.near_pairs) {
    const double d = x[i] - x[j];
    const double g = std::abs(d - std::round(d));
    double ct = 1.0 / std::tan(M_PI * d);
    const double cap = 0.5 * g / (2.0 * c.coeff * dt);
    ct = std::clamp(ct, -cap, cap);
    b[i] += c.coeff * ct;
    b[j] -= c.coeff * ct;
  }
}

// One Euler proposal over dt from `from` into `out`. sigma may be null in
// common_noise mode, where coefficients are evaluated at current positions.
inline void euler_propose(const ParticleState& from, const ModelParams& p,
                          const DriftCache& dc, const std::vector<double>* sigma,
                          const std::vector<double>& dW, double dt,
                          std::vector<double>& out, double* max_drift) {
  const int n = from.size();
  const int m = 2 * p.N + 1;
  out.resize(n);
  static thread_local std::vector<double> b;
  drift_eval(dc, from.x, dt, b);
  double mb = 0.0;
  for (int i = 0; i < n; ++i) {
    double noise = 0.0;
    if (p.mode == NoiseFrame::common_noise) {
      for (int k = -p.N; k <= p.N; ++k) {
        noise += noise_coeff(k, p.beta) * fourier_basis(k, from.x[i]) * dW[k + p.N];
      }
    } else {
      const double* row = sigma->data() + static_cast<std::size_t>(i) * m;
      for (int k = 0; k < m; ++k) noise += row[k] * dW[k];
    }
    out[i] = from.x[i] + b[i] * dt + noise;
    mb = std::max(mb, std::abs(b[i]));
  }
  if (max_drift) *max_drift = std::max(*max_drift, mb * dt);
}

inline bool acceptable(const std::vector<double>& x, double gap_floor) {
  return in_delta_N(x) && min_chord_gap(x) > gap_floor;
}

// Restore the Delta_N representation of a proposal by relabeling. In
// continuous time the order never breaks, so position-rank i always carries
// coefficient row i; when the discrete proposal overshoots a crossing, the
// rank-based relabeling (sort, plus a seam rotation when the wraparound pair
// crosses) re-establishes exactly that rank-to-row association. Increments
// stay unconditioned Gaussians, so measure-level statistics are unbiased.
inline void relabel(std::vector<double>& x) {
  if (in_delta_N(x)) return;
  const int n = static_cast<int>(x.size());
  double mean_old = 0.0;
  for (double v : x) mean_old += v;
  mean_old /= n;
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x[i] - std::floor(x[i]);
  std::sort(y.begin(), y.end());
  // Cut the circle at the largest gap so the lift has spread < 1.
  int cut = n - 1;  // gap between y[n-1] and y[0]+1 by default
  double best = y.front() + 1.0 - y.back();
  for (int i = 0; i + 1 < n; ++i) {
    if (y[i + 1] - y[i] > best) {
      best = y[i + 1] - y[i];
      cut = i;
    }
  }
  double mean_new = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = (i + cut + 1 < n) ? y[i + cut + 1] : y[i + cut + 1 - n] + 1.0;
    mean_new += x[i];
  }
  mean_new /= n;
  const double shift = std::round(mean_old - mean_new);
  for (double& v : x) v += shift;
}

inline constexpr int kBranchRetries = 6;

// Increment-halving guard. A rejected Euler proposal over dt is redone as two
// substeps of dt/2 whose increments refine dW by a Brownian bridge (midpoint
// = dW/2 + N(0, dt/4)). A branch whose refinement still fails is retried with
// a freshly sampled bridge split, so the accepted path is distributed as the
// bridge-refined increment conditioned on keeping the state in Delta_N: near
// a close pair the resolved cot drift is what pushes the substep endpoints
// back apart. Returns false (state untouched) when depth, retries, and the
// work budget are exhausted.
inline bool try_step(ParticleState& state, const ModelParams& p,
                     const DriftCache& dc, const std::vector<double>* sigma,
                     const std::vector<double>& dW, double dt, int depth,
                     NoiseStream& stream, long& budget, int& leaves,
                     double* max_drift) {
  if (budget <= 0) return false;
  --budget;
  std::vector<double> proposal;
  euler_propose(state, p, dc, sigma, dW, dt, proposal, max_drift);
  relabel(proposal);
  if (acceptable(proposal, p.gap_floor)) {
    state.x = std::move(proposal);
    state.t += dt;
    ++leaves;
    return true;
  }
  if (depth >= p.max_substep_depth) return false;
  const int m = static_cast<int>(dW.size());
  std::vector<double> first(m), second(m);
  const double half_sd = 0.5 * std::sqrt(dt);
  for (int attempt = 0; attempt < kBranchRetries; ++attempt) {
    for (int k = 0; k < m; ++k) {
      first[k] = 0.5 * dW[k] + half_sd * stream.gaussian();
      second[k] = dW[k] - first[k];
    }
    const ParticleState saved = state;
    const int saved_leaves = leaves;
    if (try_step(state, p, dc, sigma, first, 0.5 * dt, depth + 1, stream, budget,
                 leaves, max_drift) &&
        try_step(state, p, dc, sigma, second, 0.5 * dt, depth + 1, stream, budget,
                 leaves, max_drift)) {
      return true;
    }
    state = saved;
    leaves = saved_leaves;
    if (budget <= 0) break;
  }
  return false;
}

}  // namespace detail

// One accepted macro-step of size increments.dt. Throws CollisionError when
// the guard exhausts its substep budget.
inline std::pair<ParticleState, StepDiagnostics> step(const ParticleState& state,
                                                      const ModelParams& p,
                                                      const std::vector<double>* sigma,
                                                      const ModeIncrement& increments,
                                                      NoiseStream& stream) {
  ParticleState next = state;
  int leaves = 0;
  double max_drift = 0.0;
  double k2N = 0.5;  // K_2^N partial sum, cheap local evaluation
  for (int j = 1; j <= p.N; ++j) k2N += std::pow(static_cast<double>(j), -2.0 * p.beta);
  const double near_width =
      std::max(0.04, 10.0 * std::sqrt(2.0 * k2N * increments.dt));
  const detail::DriftCache dc = detail::make_drift_cache(next, p, near_width);
  long budget = 1L << 22;
  if (!detail::try_step(next, p, dc, sigma, increments.dW, increments.dt, 0,
                        stream, budget, leaves, &max_drift)) {
    int worst = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < state.size(); ++i) {
      const double g = 2.0 * std::abs(std::sin(M_PI * (state.x[i + 1] - state.x[i])));
      if (g < gap) {
      gap = g;
        worst = i;
      }
    }
    throw CollisionError({state.t, worst, gap});
  }
  StepDiagnostics d;
  d.lyapunov = lyapunov(next);
  d.radial = radial(next);
  d.min_chord_gap = min_chord_gap(next);
  d.drift_term_bound_check = max_drift;
  d.substeps_used = leaves;
  return {std::move(next), d};
}

struct TrajectoryRecord {
  std::uint64_t replica_id = 0;
  std::vector<double> times;                    // save times, starts at 0
  std::vector<std::vector<double>> states;      // lifted positions per save time
  std::vector<StepDiagnostics> diagnostics;     // per save time
  std::optional<CollisionEvent> collision;
  bool completed = true;
};

// Full trajectory: deterministic function of (params.seed, replica_id).
// States are saved every save_stride macro-steps (and at t = 0 and t = T).
inline TrajectoryRecord simulate(const ModelParams& p, std::uint64_t replica_id = 0,
                                 int save_stride = 1) {
  if (!(p.T >= 0.0) || !(p.dt > 0.0)) throw std::domain_error("simulate: bad time grid");
  if (save_stride < 1) throw std::domain_error("simulate: save_stride >= 1");
  ParticleState s = initial_state(p);
  std::vector<double> sigma;
  if (p.mode != NoiseFrame::common_noise) sigma = diffusion_matrix(p, s);
  const std::vector<double>* sig = sigma.empty() ? nullptr : &sigma;

  NoiseStream stream(p.seed, replica_id, p.N);
  const long n_steps = std::llround(p.T / p.dt);

  TrajectoryRecord rec;
  rec.replica_id = replica_id;
  StepDiagnostics d0;
  d0.lyapunov = lyapunov(s);
  d0.radial = radial(s);
  d0.min_chord_gap = min_chord_gap(s);
  d0.substeps_used = 0;
  rec.times.push_back(0.0);
  rec.states.push_back(s.x);
  rec.diagnostics.push_back(d0);

  for (long n = 1; n <= n_steps; ++n) {
    ModeIncrement inc = stream.sample_increments(p.dt);
    try {
      auto [next, diag] = step(s, p, sig, inc, stream);
      s = std::move(next);
      s.t = static_cast<double>(n) * p.dt;  // exact grid time
      if (n % save_stride == 0 || n == n_steps) {
        rec.times.push_back(s.t);
        rec.states.push_back(s.x);
        rec.diagnostics.push_back(diag);
      }
    } catch (const CollisionError& err) {
      rec.collision = err.event;
      rec.completed = false;
      break;
    }
  }
  return rec;
}

}  // namespace dk

#endif  // DK_PARTICLE_SYSTEM_HPP
