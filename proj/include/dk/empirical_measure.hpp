#ifndef DK_EMPIRICAL_MEASURE_HPP
#define DK_EMPIRICAL_MEASURE_HPP

// Measure-level view of the particle system: the empirical measure L_N with
// CDF/quantile access, piecewise-constant densities with exact quantiles,
// window-mass diagnostics and circular W1 distance.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dk/test_function.hpp"
#include "dk/torus_math.hpp"

namespace dk {

// N equal-weight atoms on (0,1], sorted nondecreasing.
struct EmpiricalMeasure {
  std::vector<double> atoms;

  explicit EmpiricalMeasure(std::vector<double> a) : atoms(std::move(a)) {
    if (atoms.empty()) throw std::domain_error("EmpiricalMeasure: no atoms");
    std::sort(atoms.begin(), atoms.end());
    if (atoms.front() <= 0.0 || atoms.back() > 1.0) {
      throw std::domain_error("EmpiricalMeasure: atoms must lie in (0,1]");
    }
  }

  int size() const { return static_cast<int>(atoms.size()); }
  double weight() const { return 1.0 / atoms.size(); }
};

// Reduce lifted particle positions to the torus.
inline EmpiricalMeasure from_state_positions(const std::vector<double>& x) {
  std::vector<double> a;
  a.reserve(x.size());
  for (double xi : x) a.push_back(frac(xi));
  return EmpiricalMeasure(std::move(a));
}

// Any state type exposing a lifted position vector `x` works.
template <class State>
EmpiricalMeasure from_state(const State& state) {
  return from_state_positions(state.x);
}

// F(x) = (# atoms <= x)/N, the closed-right convention of the indicator
// 1_{(0,x]}. F(0) = 0 and F(1) = 1 are automatic with atoms in (0,1].
inline double cdf(const EmpiricalMeasure& m, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("cdf: x outside [0,1]");
  const auto it = std::upper_bound(m.atoms.begin(), m.atoms.end(), x);
  return static_cast<double>(it - m.atoms.begin()) / m.size();
}

// Generalized inverse: smallest atom a with cdf(a) >= u; G(F(a)) = a at atoms.
inline double quantile(const EmpiricalMeasure& m, double u) {
  if (!(u > 0.0) || u > 1.0) throw std::domain_error("quantile: u outside (0,1]");
  const int n = m.size();
  int idx = static_cast<int>(std::ceil(u * n - 1e-12)) - 1;
  idx = std::clamp(idx, 0, n - 1);
  return m.atoms[idx];
}

inline double integrate(const EmpiricalMeasure& m, const TestFunction& phi) {
  double s = 0.0;
  for (double a : m.atoms) s += phi(a);
  return s / m.size();
}

// Max mass of an open circular window of the given width. A set of atoms fits
// in an open arc of length w iff its circular spread is strictly below w, so
// a sliding scan over consecutive atom runs (with wraparound) is exact.
inline double max_window_mass(const EmpiricalMeasure& m, double width) {
  if (!(width > 0.0) || width >= 1.0) {
    throw std::domain_error("max_window_mass: width outside (0,1)");
  }
  const int n = m.size();
  int best = 1;
  int j = 0;
  for (int i = 0; i < n; ++i) {
    if (j < i + 1) j = i + 1;
    while (j < i + n) {
      const double aj = (j < n) ? m.atoms[j] : m.atoms[j - n] + 1.0;
      if (aj - m.atoms[i] < width) {
        ++j;
      } else {
        break;
      }
    }
    best = std::max(best, j - i);
  }
  best = std::min(best, n);
  return static_cast<double>(best) / n;
}

inline double circle_distance(double a, double b) {
  double d = std::abs(a - b);
  d = d - std::floor(d);
  return std::min(d, 1.0 - d);
}

// Circular W1 between equal-count atom sets: minimum over the N cyclic
// order-preserving matchings of the mean circle distance.
inline double wasserstein1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
  if (m1.size() != m2.size()) {
    throw std::invalid_argument("wasserstein1: unequal atom counts");
  }
  const int n = m1.size();
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s) {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      cost += circle_distance(m1.atoms[i], m2.atoms[(i + s) % n]);
    }
    best = std::min(best, cost / n);
  }
  return best;
}

// Piecewise-constant probability density on [0,1].
struct DensityMeasure {
  std::vector<double> breakpoints;  // size m+1, 0 = b_0 < ... < b_m = 1
  std::vector<double> values;       // size m, nonnegative

  DensityMeasure(std::vector<double> bp, std::vector<double> vals)
      : breakpoints(std::move(bp)), values(std::move(vals)) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size()) {
      throw std::domain_error("DensityMeasure: malformed pieces");
    }
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
      throw std::domain_error("DensityMeasure: support must be [0,1]");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (breakpoints[i + 1] <= breakpoints[i]) {
        throw std::domain_error("DensityMeasure: breakpoints not increasing");
      }
      if (values[i] < 0.0) throw std::domain_error("DensityMeasure: negative density");
      mass += values[i] * (breakpoints[i + 1] - breakpoints[i]);
    }
    if (std::abs(mass - 1.0) > 1e-12) {
      throw std::domain_error("DensityMeasure: total mass != 1");
    }
  }

  static DensityMeasure uniform() { return DensityMeasure({0.0, 1.0}, {1.0}); }

  int pieces() const { return static_cast<int>(values.size()); }

  double density(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    int i = static_cast<int>(it - breakpoints.begin()) - 1;
    i = std::clamp(i, 0, pieces() - 1);
    return values[i];
  }

  bool strictly_positive() const {
    for (double v : values)
      if (!(v > 0.0)) return false;
    return true;
  }

  // Piecewise-linear CDF.
  double cdf(double x) const {
    double acc = 0.0;
    for (int i = 0; i < pieces(); ++i) {
      const double lo = breakpoints[i], hi = breakpoints[i + 1];
      if (x >= hi) {
        acc += values[i] * (hi - lo);
      } else if (x > lo) {
        acc += values[i] * (x - lo);
        break;
      } else {
        break;
      }
    }
    return std::min(acc, 1.0);
  }
};

// Exact generalized inverse of the piecewise-linear CDF of d.
inline double quantile_of_density(const DensityMeasure& d, double u) {
  if (u < 0.0 || u > 1.0) throw std::domain_error("quantile_of_density: u outside [0,1]");
  double acc = 0.0;
  for (int i = 0; i < d.pieces(); ++i) {
    const double lo = d.breakpoints[i], hi = d.breakpoints[i + 1];
    const double piece = d.values[i] * (hi - lo);
    if (acc + piece >= u) {
      if (d.values[i] == 0.0) continue;  // flat stretch: smallest x is further right
      return lo + (u - acc) / d.values[i];
    }
    acc += piece;
  }
  // u == 1 up to rounding: right endpoint of the support.
  for (int i = d.pieces() - 1; i >= 0; --i) {
    if (d.values[i] > 0.0) return d.breakpoints[i + 1];
  }
  return 1.0;
}

}  // namespace dk

#endif  // DK_EMPIRICAL_MEASURE_HPP
