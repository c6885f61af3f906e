#pragma once

// Shared helpers for the unit tests. The oracles here are deliberately naive
// (finite differences, exact integer factorials, brute-force search) so they
// cannot share a failure mode with the code under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace testsupport {

// Central finite difference with a relative step.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double step_scale = 1e-6) {
  const double h = step_scale * std::max(1.0, std::fabs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// ln((n-1)!) from an exact 64-bit factorial; valid for n <= 20.
inline double log_factorial_gamma(int n) {
  std::uint64_t f = 1;
  for (int k = 2; k < n; ++k) f *= static_cast<std::uint64_t>(k);
  return std::log(static_cast<double>(f));
}

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// Gradient of a scalar function of a vector by central differences.
inline std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step_scale = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step_scale * std::max(1.0, std::fabs(x[i]));
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace testsupport
