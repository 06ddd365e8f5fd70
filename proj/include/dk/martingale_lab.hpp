#ifndef DK_MARTINGALE_LAB_HPP
#define DK_MARTINGALE_LAB_HPP

// Statistical verification of the regularised martingale problem: the
// quadratic form Q^beta_mu in its double-integral and spectral forms, the
// exact discrete quadratic-variation rate, martingale null tests, the
// generator test, the interaction drift term, increment-moment scaling and
// the kernel eigenfunction identity.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dk/empirical_measure.hpp"
#include "dk/ensemble.hpp"
#include "dk/particle_system.hpp"
#include "dk/test_function.hpp"
#include "dk/torus_math.hpp"

namespace dk {

struct QFormSpec {
  double beta = 1.5;
  int k_trunc = 64;
  double diffusion_coeff = 0.0;  // the alpha of the martingale problem
};

struct QFormResult {
  double value = 0.0;
  double tail_bound = 0.0;
};

namespace detail {

// sum_{k=1}^{K} 2 k^(-2 beta) cos(2 pi k u) by Chebyshev-style recurrence
// (one cos call instead of K).
inline double kernel_cos_sum(double beta, double u, int k_trunc) {
  const double c1 = std::cos(2.0 * M_PI * u);
  double ckm1 = 1.0, ck = c1;
  double sum = 2.0 * c1;
  for (int k = 2; k <= k_trunc; ++k) {
    const double ckp = 2.0 * c1 * ck - ckm1;
    ckm1 = ck;
    ck = ckp;
    sum += 2.0 * std::pow(static_cast<double>(k), -2.0 * beta) * ck;
  }
  return sum;
}

inline double kernel_value(double beta, double u, int k_trunc) {
  return 1.0 + kernel_cos_sum(beta, u, k_trunc);
}

// Gauss-Legendre nodes/weights on [-1,1], 12 points.
struct GaussRule {
  static const std::vector<double>& nodes() {
    static const std::vector<double> n = {
        -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
        -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
        0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
        0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    return n;
  }
  static const std::vector<double>& weights() {
    static const std::vector<double> w = {
        0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
        0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
        0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
        0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    return w;
  }
};

struct QuadNode {
  double x = 0.0;
  double w = 0.0;
};

// Composite Gauss-Legendre panels over [a,b].
inline void append_panels(std::vector<QuadNode>& out, double a, double b, int panels) {
  const auto& gn = GaussRule::nodes();
  const auto& gw = GaussRule::weights();
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t q = 0; q < gn.size(); ++q) {
      out.push_back({lo + 0.5 * h * (gn[q] + 1.0), 0.5 * h * gw[q]});
    }
  }
}

// CDF ranks of the atoms: r_i = N * F(a_i), exact integers.
// Second antiderivative of the truncated kernel:
// P(u) = u^2/2 - sum_{k<=K} 2 k^{-2beta} cos(2 pi k u) / (2 pi k)^2.
inline double kernel_second_antideriv(double beta, double u, int k_trunc) {
  const double theta = 2.0 * M_PI * u;
  double acc = 0.5 * u * u;
  double cm2 = 1.0, cm1 = std::cos(theta);
  const double c1 = cm1;
  for (int k = 1; k <= k_trunc; ++k) {
    const double ck = (k == 1) ? cm1 : 2.0 * c1 * cm1 - cm2;
    if (k > 1) {
      cm2 = cm1;
      cm1 = ck;
    }
    const double wk = 2.0 * M_PI * k;
    acc -= 2.0 * std::pow(static_cast<double>(k), -2.0 * beta) * ck / (wk * wk);
  }
  return acc;
}

}  // namespace detail

// Quantile-route evaluation of the quadratic form: the quantile function of an
// empirical measure is constant on the intervals ((i-1)/n, i/n], so the
// double integral reduces to a pair sum with exact per-cell kernel integrals,
// int_0^h int_0^h Qbar(c+s-t) ds dt = P(c+h) - 2P(c) + P(c-h), h = 1/n.
inline QFormResult q_form_direct(const EmpiricalMeasure& m, const TestFunction& phi,
                                 const QFormSpec& spec) {
  const int n = m.size();
  const double h = 1.0 / n;
  std::vector<double> kern(n);
  for (int d = 0; d < n; ++d) {
    const double c = d * h;
    kern[d] = detail::kernel_second_antideriv(spec.beta, c + h, spec.k_trunc) -
              2.0 * detail::kernel_second_antideriv(spec.beta, c, spec.k_trunc) +
              detail::kernel_second_antideriv(spec.beta, c - h, spec.k_trunc);
  }
  std::vector<double> dp(n);
  for (int i = 0; i < n; ++i) dp[i] = phi.dphi(m.atoms[i]);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      acc += dp[i] * dp[j] * kern[std::abs(i - j)];
    }
  }
  const double sup = phi.sup_dphi();
  return {acc, sup * sup * kernel_tail_bound(spec.beta, spec.k_trunc)};
}

// Quantile-route evaluation for an absolutely continuous measure: composite quadrature
// of the double integral in x-space, kernel evaluated pairwise.
inline QFormResult q_form_direct(const DensityMeasure& d, const TestFunction& phi,
                                 const QFormSpec& spec) {
  std::vector<detail::QuadNode> nodes;
  for (int i = 0; i < d.pieces(); ++i) {
    const double lo = d.breakpoints[i], hi = d.breakpoints[i + 1];
    const int panels = std::max(
        4, static_cast<int>(std::ceil(2.0 * spec.k_trunc * d.values[i] * (hi - lo))) + 2);
    detail::append_panels(nodes, lo, hi, panels);
  }
  const int n = static_cast<int>(nodes.size());
  std::vector<double> g(n), F(n), w(n);
  for (int i = 0; i < n; ++i) {
    g[i] = phi.dphi(nodes[i].x);
    F[i] = d.cdf(nodes[i].x);
    w[i] = nodes[i].w * d.density(nodes[i].x);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < i; ++j) {
      row += 2.0 * g[j] * w[j] * detail::kernel_value(spec.beta, F[i] - F[j], spec.k_trunc);
    }
    row += g[i] * w[i] * detail::kernel_value(spec.beta, 0.0, spec.k_trunc);
    acc += g[i] * w[i] * row;
  }
  const double sup = phi.sup_dphi();
  return {acc, sup * sup * kernel_tail_bound(spec.beta, spec.k_trunc)};
}

namespace detail {

// Exact integral of e_k over [a,b].
inline double basis_integral(int k, double a, double b) {
  if (k == 0) return b - a;
  const double w = 2.0 * M_PI * std::abs(k);
  if (k > 0) return M_SQRT2 * (std::cos(w * a) - std::cos(w * b)) / w;
  return M_SQRT2 * (std::sin(w * b) - std::sin(w * a)) / w;
}

}  // namespace detail

// Spectral form sum_k a_k^2 c_k^2 with c_k = int phi'(G(u)) e_k(u) du. For an
// empirical measure G is a step function, so each c_k is a finite sum of
// exact basis integrals over the rank intervals.
inline QFormResult q_form_spectral(const EmpiricalMeasure& m, const TestFunction& phi,
                                   const QFormSpec& spec) {
  const int n = m.size();
  double acc = 0.0;
  for (int k = -spec.k_trunc; k <= spec.k_trunc; ++k) {
    double ck = 0.0;
    for (int i = 0; i < n; ++i) {
      ck += phi.dphi(m.atoms[i]) *
            detail::basis_integral(k, static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n);
    }
    const double ak = noise_coeff(k, spec.beta);
    acc += ak * ak * ck * ck;
  }
  const double sup = phi.sup_dphi();
  return {acc, sup * sup * kernel_tail_bound(spec.beta, spec.k_trunc)};
}

// Spectral form for a density: G is piecewise linear in u (breaks at the CDF
// images of the density breakpoints); per-piece Gauss-Legendre panels sized
// to the mode frequency.
inline QFormResult q_form_spectral(const DensityMeasure& d, const TestFunction& phi,
                                   const QFormSpec& spec) {
  std::vector<double> ubreaks;
  ubreaks.push_back(0.0);
  for (int i = 1; i < d.pieces(); ++i) ubreaks.push_back(d.cdf(d.breakpoints[i]));
  ubreaks.push_back(1.0);
  double acc = 0.0;
  for (int k = -spec.k_trunc; k <= spec.k_trunc; ++k) {
    double ck = 0.0;
    for (std::size_t p = 0; p + 1 < ubreaks.size(); ++p) {
      const double lo = ubreaks[p], hi = ubreaks[p + 1];
      if (hi <= lo) continue;
      std::vector<detail::QuadNode> nodes;
      const int panels =
          std::max(2, static_cast<int>(std::ceil(2.0 * (std::abs(k) + 1) * (hi - lo))) + 1);
      detail::append_panels(nodes, lo, hi, panels);
      for (const auto& nd : nodes) {
        ck += nd.w * phi.dphi(quantile_of_density(d, nd.x)) * fourier_basis(k, nd.x);
      }
    }
    const double ak = noise_coeff(k, spec.beta);
    acc += ak * ak * ck * ck;
  }
  const double sup = phi.sup_dphi();
  return {acc, sup * sup * kernel_tail_bound(spec.beta, spec.k_trunc)};
}

// Instantaneous quadratic-variation rate of the discrete martingale part in
// the frozen frame: (1/N^2) sum_k ( sum_i phi'(x_i) sigma_{i,k} )^2.
inline double exact_qv_rate(const ParticleState& state, const TestFunction& phi,
                            const ModelParams& p, const std::vector<double>& sigma) {
  const int n = p.N;
  const int m = 2 * n + 1;
  std::vector<double> dp(n);
  for (int i = 0; i < n; ++i) dp[i] = phi.dphi(state.x[i]);
  double acc = 0.0;
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      s += dp[i] * sigma[static_cast<std::size_t>(i) * m + k];
    }
    acc += s * s;
  }
  return acc / (static_cast<double>(n) * n);
}

// Instantaneous Ito drift contribution of the interaction term,
// (1/(4 N^alpha)) (1/N^2) sum_{i != j} (phi'(x_i)-phi'(x_j)) / tan(pi d_ij),
// differences taken along the shorter arc.
inline double drift_term_magnitude(const ParticleState& state, const TestFunction& phi,
                                   const ModelParams& p) {
  const int n = state.size();
  std::vector<double> dp(n);
  for (int i = 0; i < n; ++i) dp[i] = phi.dphi(state.x[i]);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double dd = state.x[i] - state.x[j];
      dd -= std::round(dd);  // shorter arc
      acc += (dp[i] - dp[j]) / std::tan(M_PI * dd);
    }
  }
  return acc / (4.0 * std::pow(static_cast<double>(p.N), p.alpha) *
                static_cast<double>(n) * n);
}

// ---------------------------------------------------------------------------
// Ensemble statistics
// ---------------------------------------------------------------------------

// Per-replica observable series <L_N(t), phi> and <L_N(t), phi''> on the
// common save grid; only completed replicas enter.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> p;   // replica x time, <L, phi>
  std::vector<std::vector<double>> c;   // replica x time, <L, phi''>
};

inline ObservableSeries observable_series(const PathEnsemble& e, const TestFunction& phi) {
  ObservableSeries s;
  bool have_grid = false;
  for (const auto& rec : e.replicas) {
    if (!rec.completed) continue;
    if (!have_grid) {
      s.times = rec.times;
      have_grid = true;
    }
    std::vector<double> pr, cr;
    pr.reserve(rec.states.size());
    cr.reserve(rec.states.size());
    for (const auto& x : rec.states) {
      double ps = 0.0, cs = 0.0;
      for (double xi : x) {
        const double a = frac(xi);
        ps += phi.phi(a);
        cs += phi.d2phi(a);
      }
      pr.push_back(ps / x.size());
      cr.push_back(cs / x.size());
    }
    s.p.push_back(std::move(pr));
    s.c.push_back(std::move(cr));
  }
  return s;
}

// M_t(phi) = <mu_t,phi> - <mu_0,phi> - alpha int <mu_s,phi''> ds, compensator
// by trapezoid on the save grid.
inline std::vector<double> martingale_path(const std::vector<double>& times,
                                           const std::vector<double>& p,
                                           const std::vector<double>& c,
                                           double diffusion_coeff) {
  std::vector<double> M(times.size(), 0.0);
  double comp = 0.0;
  for (std::size_t t = 1; t < times.size(); ++t) {
    comp += 0.5 * (c[t] + c[t - 1]) * (times[t] - times[t - 1]);
    M[t] = p[t] - p[0] - diffusion_coeff * comp;
  }
  return M;
}

// Cumulative sum of squared increments of M_t(phi).
inline std::vector<double> realized_qv(const std::vector<double>& M) {
  std::vector<double> qv(M.size(), 0.0);
  for (std::size_t t = 1; t < M.size(); ++t) {
    const double dM = M[t] - M[t - 1];
    qv[t] = qv[t - 1] + dM * dM;
  }
  return qv;
}

struct MartingaleReport {
  std::string test_function;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> z;
  double max_abs_z = 0.0;
  double bucket_max_abs_z = 0.0;
  double threshold = 3.5;
  int replicas = 0;
  bool pass = false;
};

// Null test of E[M_t(phi)] = 0 on the save grid, plus a conditional-increment
// test: replicas bucketed by the sign of M_s at the mid-grid time must have
// mean increment M_t - M_s equal to 0 within threshold standard errors.
inline MartingaleReport martingale_statistic(const PathEnsemble& e,
                                             const TestFunction& phi,
                                             const QFormSpec& spec,
                                             double threshold = 3.5) {
  const ObservableSeries s = observable_series(e, phi);
  const int R = static_cast<int>(s.p.size());
  if (R < 50) throw std::runtime_error("martingale_statistic: fewer than 50 replicas");
  const int T = static_cast<int>(s.times.size());

  std::vector<std::vector<double>> M(R);
  for (int r = 0; r < R; ++r) {
    M[r] = martingale_path(s.times, s.p[r], s.c[r], spec.diffusion_coeff);
  }

  MartingaleReport rep;
  rep.test_function = phi.name;
  rep.times = s.times;
  rep.threshold = threshold;
  rep.replicas = R;
  rep.mean.assign(T, 0.0);
  rep.se.assign(T, 0.0);
  rep.z.assign(T, 0.0);
  for (int t = 1; t < T; ++t) {
    double m1 = 0.0, m2 = 0.0;
    for (int r = 0; r < R; ++r) m1 += M[r][t];
    m1 /= R;
    for (int r = 0; r < R; ++r) m2 += (M[r][t] - m1) * (M[r][t] - m1);
    const double sd = std::sqrt(m2 / (R - 1));
    rep.mean[t] = m1;
    rep.se[t] = sd / std::sqrt(static_cast<double>(R));
    rep.z[t] = (rep.se[t] > 0.0) ? m1 / rep.se[t] : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(rep.z[t]));
  }

  // Conditional increments given the sign of M at the mid-grid time.
  const int s_idx = T / 2;
  for (int sign = 0; sign < 2; ++sign) {
    std::vector<int> bucket;
    for (int r = 0; r < R; ++r) {
      if ((M[r][s_idx] >= 0.0) == (sign == 0)) bucket.push_back(r);
    }
    if (bucket.size() < 10) continue;
    for (int t = s_idx + 1; t < T; ++t) {
      double m1 = 0.0, m2 = 0.0;
      for (int r : bucket) m1 += M[r][t] - M[r][s_idx];
      m1 /= bucket.size();
      for (int r : bucket) {
        const double d = M[r][t] - M[r][s_idx] - m1;
        m2 += d * d;
      }
      const double se =
          std::sqrt(m2 / (bucket.size() - 1)) / std::sqrt(static_cast<double>(bucket.size()));
      if (se > 0.0) {
        rep.bucket_max_abs_z = std::max(rep.bucket_max_abs_z, std::abs(m1 / se));
      }
    }
  }
  rep.pass = rep.max_abs_z <= threshold && rep.bucket_max_abs_z <= threshold;
  return rep;
}

// Scalar C^2 function g for the generator test.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  std::function<double(double)> d2g;
};

// Generator-level null test: M^G_t = G(p_t) - G(p_0) - int D^n G(p_s) ds
// with D^n G(mu) = alpha g'(<phi,mu>)<mu,phi''> + (1/2) g''(<mu,phi>) Q^n_mu(phi),
// Q^n via the direct form at K_trunc = spec.k_trunc.
inline MartingaleReport generator_test(const PathEnsemble& e, const ScalarFunction& g,
                                       const TestFunction& phi, const QFormSpec& spec,
                                       double threshold = 3.5) {
  const ObservableSeries s = observable_series(e, phi);
  const int R = static_cast<int>(s.p.size());
  if (R < 50) throw std::runtime_error("generator_test: fewer than 50 replicas");
  const int T = static_cast<int>(s.times.size());

  // Q^n along each path.
  std::vector<std::vector<double>> M(R, std::vector<double>(T, 0.0));
  int r_out = 0;
  for (const auto& rec : e.replicas) {
    if (!rec.completed) continue;
    std::vector<double> dgen(T, 0.0);
    for (int t = 0; t < T; ++t) {
      const EmpiricalMeasure m = from_state_positions(rec.states[t]);
      const double qn = q_form_direct(m, phi, spec).value;
      dgen[t] = spec.diffusion_coeff * g.dg(s.p[r_out][t]) * s.c[r_out][t] +
                0.5 * g.d2g(s.p[r_out][t]) * qn;
    }
    double comp = 0.0;
    for (int t = 1; t < T; ++t) {
      comp += 0.5 * (dgen[t] + dgen[t - 1]) * (s.times[t] - s.times[t - 1]);
      M[r_out][t] = g.g(s.p[r_out][t]) - g.g(s.p[r_out][0]) - comp;
    }
    ++r_out;
  }

  MartingaleReport rep;
  rep.test_function = g.name + "(" + phi.name + ")";
  rep.times = s.times;
  rep.threshold = threshold;
  rep.replicas = R;
  rep.mean.assign(T, 0.0);
  rep.se.assign(T, 0.0);
  rep.z.assign(T, 0.0);
  for (int t = 1; t < T; ++t) {
    double m1 = 0.0, m2 = 0.0;
    for (int r = 0; r < R; ++r) m1 += M[r][t];
    m1 /= R;
    for (int r = 0; r < R; ++r) m2 += (M[r][t] - m1) * (M[r][t] - m1);
    rep.mean[t] = m1;
    rep.se[t] = std::sqrt(m2 / (R - 1)) / std::sqrt(static_cast<double>(R));
    rep.z[t] = (rep.se[t] > 0.0) ? m1 / rep.se[t] : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(rep.z[t]));
  }
  rep.pass = rep.max_abs_z <= threshold;
  return rep;
}

struct MomentScanRow {
  double lag = 0.0;
  double normalized_moment = 0.0;  // E|Delta|^{2m} / lag^m
  long pairs = 0;
};

struct MomentScanReport {
  int m = 1;
  std::vector<MomentScanRow> rows;
  double max_min_ratio = 0.0;
};

// Kolmogorov-bound diagnostic: E |<L(t),phi> - <L(s),phi>|^{2m} / |t-s|^m
// across dyadic lags; the normalized moments should stay within an O(1) band.
inline MomentScanReport increment_moment_scan(const PathEnsemble& e,
                                              const TestFunction& phi, int m,
                                              const std::vector<double>& lags) {
  if (m != 1 && m != 2) throw std::domain_error("increment_moment_scan: m in {1,2}");
  const ObservableSeries s = observable_series(e, phi);
  const int R = static_cast<int>(s.p.size());
  if (R < 200) throw std::runtime_error("increment_moment_scan: fewer than 200 replicas");
  const int T = static_cast<int>(s.times.size());
  const double dt_save = (T > 1) ? s.times[1] - s.times[0] : 0.0;

  MomentScanReport rep;
  rep.m = m;
  for (double lag : lags) {
    const int stride = static_cast<int>(std::llround(lag / dt_save));
    if (stride < 1 || stride >= T) {
      throw std::domain_error("increment_moment_scan: lag not on the save grid");
    }
    double acc = 0.0;
    long pairs = 0;
    for (int r = 0; r < R; ++r) {
      for (int t = 0; t + stride < T; ++t) {
        const double d = std::abs(s.p[r][t + stride] - s.p[r][t]);
        acc += (m == 1) ? d * d : d * d * d * d;
        ++pairs;
      }
    }
    const double norm = acc / pairs / std::pow(lag, static_cast<double>(m));
    rep.rows.push_back({lag, norm, pairs});
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : rep.rows) {
    lo = std::min(lo, row.normalized_moment);
    hi = std::max(hi, row.normalized_moment);
  }
  rep.max_min_ratio = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  return rep;
}

// Eigenfunction identity of the truncated kernel: for a strictly positive
// density, int Qbar_K(F(x)-F(y)) e_k(F(y)) mu(dy) = a_k^2 e_k(F(x)) for
// |k| <= K. Returns the max residual over a 64-point x-grid.
inline double eigenfunction_check(const DensityMeasure& d, int k, const QFormSpec& spec) {
  if (!d.strictly_positive()) {
    throw std::domain_error("eigenfunction_check: density must be strictly positive");
  }
  if (std::abs(k) > spec.k_trunc) {
    throw std::domain_error("eigenfunction_check: |k| exceeds K_trunc");
  }
  std::vector<detail::QuadNode> nodes;
  for (int i = 0; i < d.pieces(); ++i) {
    const double lo = d.breakpoints[i], hi = d.breakpoints[i + 1];
    const int panels = std::max(
        4, static_cast<int>(std::ceil(2.0 * spec.k_trunc * d.values[i] * (hi - lo))) + 2);
    detail::append_panels(nodes, lo, hi, panels);
  }
  const int n = static_cast<int>(nodes.size());
  std::vector<double> F(n), w(n);
  for (int i = 0; i < n; ++i) {
    F[i] = d.cdf(nodes[i].x);
    w[i] = nodes[i].w * d.density(nodes[i].x);
  }
  const double ak = noise_coeff(k, spec.beta);
  double worst = 0.0;
  for (int gx = 0; gx < 64; ++gx) {
    const double x = (gx + 0.5) / 64.0;
    const double Fx = d.cdf(x);
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
      integral += w[i] * detail::kernel_value(spec.beta, Fx - F[i], spec.k_trunc) *
                  fourier_basis(k, F[i]);
    }
    worst = std::max(worst, std::abs(integral - ak * ak * fourier_basis(k, Fx)));
  }
  return worst;
}

}  // namespace dk

#endif  // DK_MARTINGALE_LAB_HPP
