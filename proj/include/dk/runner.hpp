#ifndef DK_RUNNER_HPP
#define DK_RUNNER_HPP

// Experiment orchestration: config parsing, replica scheduling, trajectory
// and report serialization, and the named statistical test entry points used
// by both the CLI and the acceptance suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dk/ensemble.hpp"
#include "dk/martingale_lab.hpp"
#include "dk/particle_system.hpp"
#include "dk/rng.hpp"

namespace dk {

using json = nlohmann::json;

inline constexpr const char* kBuildId = "dk-lab 1.0";
inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  ModelParams params;
  int replicas = 1;
  int save_stride = 1;
  std::vector<std::string> tests;  // named operations, see run_named_test
  std::string output_dir = "out";

  std::uint64_t master_seed() const { return params.seed; }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(std::stod(tok));
  return out;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline NoiseFrame parse_mode(const std::string& v) {
  if (v == "frozen_frame") return NoiseFrame::frozen_frame;
  if (v == "common_noise") return NoiseFrame::common_noise;
  if (v == "pure_frozen_flow") return NoiseFrame::pure_frozen_flow;
  throw ConfigError("unknown mode: " + v);
}

inline std::string mode_name(NoiseFrame m) {
  switch (m) {
    case NoiseFrame::frozen_frame: return "frozen_frame";
    case NoiseFrame::common_noise: return "common_noise";
    case NoiseFrame::pure_frozen_flow: return "pure_frozen_flow";
  }
  return "?";
}

// key = value configuration text; '#' starts a comment.
inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }

  std::vector<double> dens_bp, dens_val;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "N") cfg.params.N = std::stoi(value);
      else if (key == "beta") cfg.params.beta = std::stod(value);
      else if (key == "alpha") cfg.params.alpha = std::stod(value);
      else if (key == "T") cfg.params.T = std::stod(value);
      else if (key == "dt") cfg.params.dt = std::stod(value);
      else if (key == "mode") cfg.params.mode = parse_mode(value);
      else if (key == "R_trunc") cfg.params.R_trunc = std::stod(value);
      else if (key == "seed") cfg.params.seed = std::stoull(value);
      else if (key == "init") {
        if (value == "uniform_grid") cfg.params.init = InitKind::uniform_grid;
        else if (value == "density") cfg.params.init = InitKind::density;
        else throw ConfigError("unknown init: " + value);
      }
      else if (key == "density_breakpoints") dens_bp = detail::parse_doubles(value);
      else if (key == "density_values") dens_val = detail::parse_doubles(value);
      else if (key == "replicas") cfg.replicas = std::stoi(value);
      else if (key == "save_stride") cfg.save_stride = std::stoi(value);
      else if (key == "tests") cfg.tests = detail::split(value, ',');
      else if (key == "output_dir") cfg.output_dir = value;
      else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw ConfigError("config field '" + key + "': cannot parse value '" + value + "'");
    }
  }
  if (cfg.params.init == InitKind::density) {
    if (dens_bp.empty() || dens_val.empty()) {
      throw ConfigError("density init requires density_breakpoints and density_values");
    }
    cfg.params.init_density = DensityMeasure(dens_bp, dens_val);
  }
  if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (cfg.save_stride < 1) throw ConfigError("save_stride must be >= 1");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Canonical text form: sorted key=value lines of every effective setting.
inline std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["N"] = std::to_string(cfg.params.N);
  kv["beta"] = detail::fmt(cfg.params.beta);
  kv["alpha"] = detail::fmt(cfg.params.alpha);
  kv["T"] = detail::fmt(cfg.params.T);
  kv["dt"] = detail::fmt(cfg.params.dt);
  kv["mode"] = mode_name(cfg.params.mode);
  kv["R_trunc"] = detail::fmt(cfg.params.R_trunc);
  kv["seed"] = std::to_string(cfg.params.seed);
  kv["init"] = cfg.params.init == InitKind::uniform_grid ? "uniform_grid" : "density";
  if (cfg.params.init_density) {
    std::string bp, vv;
    for (double b : cfg.params.init_density->breakpoints) bp += detail::fmt(b) + ",";
    for (double v : cfg.params.init_density->values) vv += detail::fmt(v) + ",";
    kv["density_breakpoints"] = bp;
    kv["density_values"] = vv;
  }
  kv["replicas"] = std::to_string(cfg.replicas);
  kv["save_stride"] = std::to_string(cfg.save_stride);
  std::string tests;
  for (const auto& t : cfg.tests) tests += t + ",";
  kv["tests"] = tests;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

// FNV-1a 64-bit over the canonical config text.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void write_trajectories(const PathEnsemble& e, const std::string& path) {
  std::ofstream out(path);
  out << "replica_id\tt";
  for (int i = 1; i <= e.params.N; ++i) out << "\tx_" << i;
  out << "\n";
  for (const auto& rec : e.replicas) {
    for (std::size_t t = 0; t < rec.times.size(); ++t) {
      out << rec.replica_id << "\t" << detail::fmt(rec.times[t]);
      for (double x : rec.states[t]) out << "\t" << detail::fmt(x);
      out << "\n";
    }
  }
}

inline void write_diagnostics(const PathEnsemble& e, const std::string& path) {
  std::ofstream out(path);
  out << "replica_id\tt\tlyapunov\tradial\tmin_chord_gap\tdrift_bound\tsubsteps\n";
  for (const auto& rec : e.replicas) {
    for (std::size_t t = 0; t < rec.times.size(); ++t) {
      const auto& d = rec.diagnostics[t];
      out << rec.replica_id << "\t" << detail::fmt(rec.times[t]) << "\t"
          << detail::fmt(d.lyapunov) << "\t" << detail::fmt(d.radial) << "\t"
          << detail::fmt(d.min_chord_gap) << "\t" << detail::fmt(d.drift_term_bound_check)
          << "\t" << d.substeps_used << "\n";
    }
  }
}

inline json report_from_martingale(const MartingaleReport& rep, const std::string& name) {
  json j;
  j["test"] = name;
  j["test_function"] = rep.test_function;
  j["replicas"] = rep.replicas;
  j["threshold"] = rep.threshold;
  j["times"] = rep.times;
  j["mean"] = rep.mean;
  j["se"] = rep.se;
  j["z"] = rep.z;
  j["max_abs_z"] = rep.max_abs_z;
  j["bucket_max_abs_z"] = rep.bucket_max_abs_z;
  j["pass"] = rep.pass;
  j["note"] = "compensator by trapezoid on the save grid; multi-time thresholds "
              "are per-time z-scores (no Bonferroni correction applied)";
  return j;
}

// ---------------------------------------------------------------------------
// Named tests, shared between CLI subcommands and the acceptance suite
// ---------------------------------------------------------------------------

// Kernel-basis consistency: truncated Qbar equals sum a_k^2 e_k(x) e_k(y)
// at u = x - y, and Qbar(0) approaches 2 K_2^beta.
inline json test_kernel(double beta, int k_trunc, int trials, std::uint64_t seed) {
  GaussianRng rng(splitmix64(seed ^ 0x6b65726eULL));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double x = rng.uniform(), y = rng.uniform();
    const double direct = kernel_qbar(beta, x - y, k_trunc).first;
    double spectral = 0.0;
    for (int k = -k_trunc; k <= k_trunc; ++k) {
      const double ak = noise_coeff(k, beta);
      spectral += ak * ak * fourier_basis(k, x) * fourier_basis(k, y);
    }
    worst = std::max(worst, std::abs(direct - spectral));
  }
  const auto [v0, tail0] = kernel_qbar(beta, 0.0, k_trunc);
  const double k2inf = spectral_constants(beta, 1).k2_inf;
  const double diag_err = std::abs(v0 - 2.0 * k2inf);
  json j;
  j["test"] = "kernel";
  j["beta"] = beta;
  j["k_trunc"] = k_trunc;
  j["trials"] = trials;
  j["max_basis_mismatch"] = worst;
  j["diagonal_minus_2k2inf"] = diag_err;
  j["diagonal_tail_bound"] = tail0;
  j["pass"] = worst <= 1e-12 && diag_err <= tail0 + 1e-12;
  return j;
}

// Q-form representation equivalence on random empirical measures and random
// strictly positive piecewise densities.
inline json test_qform(const std::vector<double>& betas, int empirical_trials,
                       int density_trials, int max_atoms, std::uint64_t seed) {
  GaussianRng rng(splitmix64(seed ^ 0x71666f726dULL));
  const TestFunction phi = bump_test_function();
  json j;
  j["test"] = "qform";
  j["betas"] = betas;
  double worst_excess = -1e300;  // mismatch minus allowed tolerance, max over cases
  double worst_mismatch = 0.0;
  int cases = 0;
  bool pass = true;
  for (double beta : betas) {
    for (int t = 0; t < empirical_trials; ++t) {
      const int n = 2 + static_cast<int>(rng.uniform() * (max_atoms - 2));
      std::vector<double> atoms(n);
      for (double& a : atoms) a = frac(rng.uniform());
      EmpiricalMeasure m(atoms);
      QFormSpec spec{beta, std::max(n, 64), 0.0};
      const auto d = q_form_direct(m, phi, spec);
      const auto s = q_form_spectral(m, phi, spec);
      const double mismatch = std::abs(d.value - s.value);
      const double tol = d.tail_bound + s.tail_bound + 1e-10;
      worst_mismatch = std::max(worst_mismatch, mismatch);
      worst_excess = std::max(worst_excess, mismatch - tol);
      pass = pass && mismatch <= tol;
      ++cases;
    }
    for (int t = 0; t < density_trials; ++t) {
      const int pieces = 2 + static_cast<int>(rng.uniform() * 3.0);
      std::vector<double> bp{0.0};
      for (int i = 1; i < pieces; ++i) bp.push_back(rng.uniform());
      bp.push_back(1.0);
      std::sort(bp.begin(), bp.end());
      for (std::size_t i = 1; i < bp.size(); ++i) {
        if (bp[i] - bp[i - 1] < 1e-3) bp[i] = bp[i - 1] + 1e-3;
      }
      for (double& b : bp) b /= bp.back();
      std::vector<double> vals(pieces);
      double mass = 0.0;
      for (int i = 0; i < pieces; ++i) {
        vals[i] = 0.2 + rng.uniform();
        mass += vals[i] * (bp[i + 1] - bp[i]);
      }
      for (double& v : vals) v /= mass;
      DensityMeasure dm(bp, vals);
      QFormSpec spec{beta, 32, 0.0};
      const auto d = q_form_direct(dm, phi, spec);
      const auto s = q_form_spectral(dm, phi, spec);
      const double mismatch = std::abs(d.value - s.value);
      const double tol = d.tail_bound + s.tail_bound + 1e-10;
      worst_mismatch = std::max(worst_mismatch, mismatch);
      worst_excess = std::max(worst_excess, mismatch - tol);
      pass = pass && mismatch <= tol;
      ++cases;
    }
  }
  j["cases"] = cases;
  j["worst_mismatch"] = worst_mismatch;
  j["worst_excess_over_tolerance"] = worst_excess;
  j["pass"] = pass;
  return j;
}

// Lyapunov supermartingale proxy along an ensemble:
// mean[F(X_t) - F(X_0) - K_2^beta t] <= z_tol standard errors at each save time.
inline json test_lyapunov(const PathEnsemble& e, double z_tol = 3.0) {
  const double k2b = spectral_constants(e.params.beta, 1).k2_inf;
  json j;
  j["test"] = "lyapunov";
  j["k2_beta"] = k2b;
  std::vector<double> times, drifts, ses;
  bool pass = true;
  const auto& grid = e.replicas.front().times;
  for (std::size_t t = 1; t < grid.size(); ++t) {
    double m1 = 0.0, m2 = 0.0;
    int R = 0;
    for (const auto& rec : e.replicas) {
      if (!rec.completed) continue;
      const double v = rec.diagnostics[t].lyapunov - rec.diagnostics[0].lyapunov -
                       k2b * rec.times[t];
      m1 += v;
      ++R;
    }
    m1 /= R;
    for (const auto& rec : e.replicas) {
      if (!rec.completed) continue;
      const double v = rec.diagnostics[t].lyapunov - rec.diagnostics[0].lyapunov -
                       k2b * rec.times[t];
      m2 += (v - m1) * (v - m1);
    }
    const double se = std::sqrt(m2 / (R - 1)) / std::sqrt(static_cast<double>(R));
    times.push_back(grid[t]);
    drifts.push_back(m1);
    ses.push_back(se);
    pass = pass && m1 <= z_tol * se;
  }
  j["times"] = times;
  j["mean_excess"] = drifts;
  j["se"] = ses;
  j["z_tol"] = z_tol;
  j["pass"] = pass;
  return j;
}

// Non-collision summary along an ensemble, plus the log-energy tail bound.
inline json test_collisions(const PathEnsemble& e, double R_level) {
  const ParticleState x0 = initial_state(e.params);
  const double F0 = lyapunov(x0);
  const double bound = collision_probability_bound(e.params, R_level, F0);
  int hit = 0;
  for (const auto& rec : e.replicas) {
    bool below = !rec.completed;
    for (const auto& d : rec.diagnostics) {
      if (d.min_chord_gap < 1.0 / R_level) below = true;
    }
    hit += below ? 1 : 0;
  }
  const double freq = static_cast<double>(hit) / e.count();
  json j;
  j["test"] = "collisions";
  j["R_level"] = R_level;
  j["collision_events"] = e.count() - e.completed_count();
  j["gap_below_1_over_R_replica_fraction"] = freq;
  j["probability_bound"] = bound;
  j["lyapunov_initial"] = F0;
  j["pass"] = (e.count() == e.completed_count()) && freq <= bound;
  return j;
}

// Window-mass non-atomicity proxy: max_window_mass(width 1/(2N)) <= mass_cap/N
// at every save time, in at least frac_required of the replicas.
inline json test_window_mass(const PathEnsemble& e, double mass_cap = 8.0,
                             double frac_required = 0.99) {
  const int n = e.params.N;
  const double width = 1.0 / (2.0 * n);
  int ok = 0;
  for (const auto& rec : e.replicas) {
    if (!rec.completed) continue;
    bool good = true;
    for (const auto& x : rec.states) {
      const EmpiricalMeasure m = from_state_positions(x);
      if (max_window_mass(m, width) > mass_cap / n) {
        good = false;
        break;
      }
    }
    ok += good ? 1 : 0;
  }
  const double frac = static_cast<double>(ok) / e.completed_count();
  json j;
  j["test"] = "window_mass";
  j["width"] = width;
  j["mass_cap_over_N"] = mass_cap / n;
  j["fraction_ok"] = frac;
  j["fraction_required"] = frac_required;
  j["pass"] = frac >= frac_required;
  return j;
}

// Realized QV against the integrated exact rate at one save resolution.
// Returns per-ensemble relative error of the ensemble means.
inline json test_qv(const PathEnsemble& e, const TestFunction& phi) {
  const ModelParams& p = e.params;
  if (p.mode == NoiseFrame::common_noise) {
    throw std::logic_error("test_qv: exact rate needs a frozen frame");
  }
  const ParticleState x0 = initial_state(p);
  const std::vector<double> sigma = diffusion_matrix(p, x0);
  const auto k2N = spectral_constants(p.beta, p.N).k2_N;
  const ObservableSeries s = observable_series(e, phi);
  const int R = static_cast<int>(s.p.size());
  const int T = static_cast<int>(s.times.size());

  double mean_qv = 0.0, mean_rate_int = 0.0;
  int r_idx = 0;
  for (const auto& rec : e.replicas) {
    if (!rec.completed) continue;
    const auto M = martingale_path(s.times, s.p[r_idx], s.c[r_idx], k2N);
    mean_qv += realized_qv(M).back();
    std::vector<double> rate(T);
    for (int t = 0; t < T; ++t) {
      ParticleState st;
      st.t = rec.times[t];
      st.x = rec.states[t];
      rate[t] = exact_qv_rate(st, phi, p, sigma);
    }
    double integral = 0.0;
    for (int t = 1; t < T; ++t) {
      integral += 0.5 * (rate[t] + rate[t - 1]) * (s.times[t] - s.times[t - 1]);
    }
    mean_rate_int += integral;
    ++r_idx;
  }
  mean_qv /= R;
  mean_rate_int /= R;
  json j;
  j["test"] = "qv";
  j["test_function"] = phi.name;
  j["replicas"] = R;
  j["dt_save"] = s.times[1] - s.times[0];
  j["mean_realized_qv"] = mean_qv;
  j["mean_rate_integral"] = mean_rate_int;
  j["relative_error"] = std::abs(mean_qv - mean_rate_int) / mean_rate_int;
  return j;
}

// Drift-term bound and N-scaling scan for the interaction term.
// States are stratified samples of a fixed non-uniform density so the
// pattern replicates across N; phi = e_{-1} keeps the continuum value away
// from zero.
inline json scan_drift(const std::vector<int>& Ns, double alpha, int states_per_N,
                       std::uint64_t seed) {
  const TestFunction phi = fourier_test_function(-1);
  const DensityMeasure rho({0.0, 0.25, 0.5, 0.75, 1.0}, {1.5, 0.5, 0.5, 1.5});
  const double sup2 = phi.sup_d2phi();
  json j;
  j["test"] = "drift_scan";
  j["alpha"] = alpha;
  j["Ns"] = Ns;
  std::vector<double> max_vals;
  bool bound_ok = true;
  for (int n : Ns) {
    GaussianRng rng(splitmix64(seed ^ (0x647269667400ULL + n)));
    ModelParams p;
    p.N = n;
    p.alpha = alpha;
    double mx = 0.0;
    for (int t = 0; t < states_per_N; ++t) {
      ParticleState st;
      st.x.resize(n);
      for (int i = 0; i < n; ++i) {
        st.x[i] = quantile_of_density(rho, (i + rng.uniform()) / (n + 1e-12));
      }
      std::sort(st.x.begin(), st.x.end());
      const double v = drift_term_magnitude(st, phi, p);
      const double cap = sup2 / (4.0 * M_PI * std::pow(static_cast<double>(n), alpha));
      bound_ok = bound_ok && std::abs(v) <= cap;
      mx = std::max(mx, std::abs(v));
    }
    max_vals.push_back(mx);
  }
  // Least-squares slope of log max|I| against log N.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int nn = static_cast<int>(Ns.size());
  for (int i = 0; i < nn; ++i) {
    const double lx = std::log(static_cast<double>(Ns[i]));
    const double ly = std::log(max_vals[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  j["max_values"] = max_vals;
  j["slope"] = slope;
  j["bound_ok"] = bound_ok;
  j["pass"] = bound_ok && std::abs(slope + alpha) <= 0.15;
  return j;
}

// ---------------------------------------------------------------------------
// run(): simulate, execute requested tests, serialize everything
// ---------------------------------------------------------------------------

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::map<std::string, bool> test_results;
  double wall_clock_sec = 0.0;
  bool all_pass = true;
};

inline json run_named_test(const std::string& name, const ExperimentConfig& cfg,
                           const PathEnsemble& e) {
  const auto k2N = spectral_constants(cfg.params.beta, cfg.params.N).k2_N;
  if (name == "martingale") {
    QFormSpec spec{cfg.params.beta, std::max(cfg.params.N, 64), k2N};
    json out = json::array();
    for (const TestFunction& phi :
         {fourier_test_function(1), fourier_test_function(-2), bump_test_function()}) {
      out.push_back(report_from_martingale(martingale_statistic(e, phi, spec),
                                           "martingale"));
    }
    json j;
    j["test"] = "martingale";
    bool pass = true;
    for (const auto& r : out) pass = pass && r["pass"].get<bool>();
    j["reports"] = out;
    j["pass"] = pass;
    return j;
  }
  if (name == "generator") {
    QFormSpec spec{cfg.params.beta, cfg.params.N, k2N};
    ScalarFunction g{"square", [](double v) { return v * v; },
                     [](double v) { return 2.0 * v; }, [](double) { return 2.0; }};
    const auto rep = generator_test(e, g, fourier_test_function(1), spec);
    return report_from_martingale(rep, "generator");
  }
  if (name == "qv") {
    json j = test_qv(e, fourier_test_function(1));
    j["pass"] = j["relative_error"].get<double>() <= 0.05;
    return j;
  }
  if (name == "lyapunov") return test_lyapunov(e);
  if (name == "collisions") return test_collisions(e, cfg.params.R_trunc);
  if (name == "window-mass") return test_window_mass(e);
  if (name == "kernel") {
    return test_kernel(cfg.params.beta, std::max(cfg.params.N, 64), 100,
                       cfg.master_seed());
  }
  if (name == "qform") {
    return test_qform({1.2, 1.5, 2.0, 4.0}, 12, 3, 128, cfg.master_seed());
  }
  if (name == "drift-scan") {
    return scan_drift({16, 32, 64, 128}, cfg.params.alpha, 100, cfg.master_seed());
  }
  if (name == "moments") {
    json j;
    j["test"] = "moments";
    bool pass = true;
    const double dt_save = cfg.params.dt * cfg.save_stride;
    std::vector<double> lags;
    for (int s = 1; s <= 8 && lags.size() < 4; s *= 2) {
      lags.push_back(dt_save * s);
    }
    for (int m : {1, 2}) {
      const auto rep = increment_moment_scan(e, fourier_test_function(1), m, lags);
      json row;
      row["m"] = m;
      row["max_min_ratio"] = rep.max_min_ratio;
      for (const auto& r : rep.rows) {
        row["lags"].push_back(r.lag);
        row["normalized_moments"].push_back(r.normalized_moment);
      }
      pass = pass && rep.max_min_ratio <= 4.0;
      j["scans"].push_back(row);
    }
    j["pass"] = pass;
    return j;
  }
  throw ConfigError("unknown test: " + name);
}

inline RunManifest run(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(cfg.output_dir);
  fs::create_directories(cfg.output_dir + "/reports");

  const PathEnsemble e = run_ensemble(cfg.params, cfg.replicas, cfg.save_stride);
  write_trajectories(e, cfg.output_dir + "/trajectories.tsv");
  write_diagnostics(e, cfg.output_dir + "/diagnostics.tsv");

  RunManifest man;
  man.config_hash = config_hash(cfg);
  json tests_json;
  for (const auto& name : cfg.tests) {
    json rep = run_named_test(name, cfg, e);
    const bool pass = rep["pass"].get<bool>();
    man.test_results[name] = pass;
    man.all_pass = man.all_pass && pass;
    std::ofstream out(cfg.output_dir + "/reports/" + name + ".json");
    out << rep.dump(2) << "\n";
    tests_json[name] = pass;
  }
  if (e.completed_count() == 0) {
    man.all_pass = false;
  }
  man.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["build_id"] = kBuildId;
  manifest["gaussian_sampler"] = kGaussianSamplerId;
  manifest["config_hash"] = man.config_hash;
  manifest["config"] = canonical_config_text(cfg);
  manifest["trajectory_columns"] = "replica_id t x_1..x_N";
  manifest["diagnostic_columns"] =
      "replica_id t lyapunov radial min_chord_gap drift_bound substeps";
  manifest["replicas"] = cfg.replicas;
  manifest["completed_replicas"] = e.completed_count();
  manifest["in_drift_regime"] = cfg.params.in_drift_regime();
  json seeds = json::array();
  for (int r = 0; r < cfg.replicas; ++r) {
    seeds.push_back(replica_seed(cfg.master_seed(), r));
  }
  manifest["replica_seeds"] = seeds;
  manifest["tests"] = tests_json;
  manifest["all_pass"] = man.all_pass;
  manifest["wall_clock_sec"] = man.wall_clock_sec;
  std::ofstream out(cfg.output_dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
  return man;
}

}  // namespace dk

#endif  // DK_RUNNER_HPP
