#ifndef DK_TEST_FUNCTION_HPP
#define DK_TEST_FUNCTION_HPP

// C^2 periodic test functions with closed-form first and second derivatives.

#include <cmath>
#include <functional>
#include <string>

#include "dk/torus_math.hpp"

namespace dk {

struct TestFunction {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;

  double operator()(double x) const { return phi(x); }

  // Grid estimate of sup|phi'|, used for kernel tail propagation.
  double sup_dphi(int grid = 4096) const {
    double m = 0.0;
    for (int i = 0; i < grid; ++i) {
      m = std::max(m, std::abs(dphi(static_cast<double>(i) / grid)));
    }
    return m;
  }

  double sup_d2phi(int grid = 4096) const {
    double m = 0.0;
    for (int i = 0; i < grid; ++i) {
      m = std::max(m, std::abs(d2phi(static_cast<double>(i) / grid)));
    }
    return m;
  }
};

// phi = e_k with exact derivatives.
inline TestFunction fourier_test_function(int k) {
  const double w = 2.0 * M_PI * static_cast<double>(std::abs(k));
  TestFunction f;
  f.name = "e_" + std::to_string(k);
  if (k == 0) {
    f.phi = [](double) { return 1.0; };
    f.dphi = [](double) { return 0.0; };
    f.d2phi = [](double) { return 0.0; };
  } else if (k > 0) {
    f.phi = [w](double x) { return M_SQRT2 * std::sin(w * x); };
    f.dphi = [w](double x) { return M_SQRT2 * w * std::cos(w * x); };
    f.d2phi = [w](double x) { return -M_SQRT2 * w * w * std::sin(w * x); };
  } else {
    f.phi = [w](double x) { return M_SQRT2 * std::cos(w * x); };
    f.dphi = [w](double x) { return -M_SQRT2 * w * std::sin(w * x); };
    f.d2phi = [w](double x) { return -M_SQRT2 * w * w * std::cos(w * x); };
  }
  return f;
}

// Smooth periodic bump phi(x) = exp(cos(2 pi x)).
inline TestFunction bump_test_function() {
  TestFunction f;
  f.name = "bump";
  const double w = 2.0 * M_PI;
  f.phi = [w](double x) { return std::exp(std::cos(w * x)); };
  f.dphi = [w](double x) {
    return -w * std::sin(w * x) * std::exp(std::cos(w * x));
  };
  f.d2phi = [w](double x) {
    const double c = std::cos(w * x), s = std::sin(w * x);
    return w * w * std::exp(c) * (s * s - c);
  };
  return f;
}

inline TestFunction constant_test_function(double c = 1.0) {
  TestFunction f;
  f.name = "const";
  f.phi = [c](double) { return c; };
  f.dphi = [](double) { return 0.0; };
  f.d2phi = [](double) { return 0.0; };
  return f;
}

}  // namespace dk

#endif  // DK_TEST_FUNCTION_HPP
