#include "emvc/specfun.hpp"

#include <cmath>
#include <string>

#include "emvc/errors.hpp"

namespace emvc {
namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // log(2*pi)/2

// Arguments at or above this use the asymptotic series directly. With terms up
// to B14 the truncation error at z = 10 is below one ulp of the result.
constexpr double kAsymptoticCutoff = 10.0;

void check_argument(double x, const char* fn) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw DomainError(std::string(fn) + ": argument must be a positive finite real, got " +
                      std::to_string(x));
  }
}

// Stirling series for log Gamma, valid for z >= kAsymptoticCutoff.
// B_{2n} / (2n (2n-1)) for B2..B14.
double log_gamma_asymptotic(double z) {
  static const double c[7] = {
      1.0 / 12.0,   -1.0 / 360.0,      1.0 / 1260.0,  -1.0 / 1680.0,
      1.0 / 1188.0, -691.0 / 360360.0, 7.0 / 1092.0,
  };
  const double r = 1.0 / (z * z);
  double series = c[6];
  for (int i = 5; i >= 0; --i) series = series * r + c[i];
  return (z - 0.5) * std::log(z) - z + kHalfLogTwoPi + series / z;
}

// psi(z) = log z - 1/(2z) - sum B_{2n} / (2n z^{2n}), z >= cutoff.
double digamma_asymptotic(double z) {
  static const double c[7] = {
      1.0 / 12.0,  -1.0 / 120.0,      1.0 / 252.0, -1.0 / 240.0,
      1.0 / 132.0, -691.0 / 32760.0,  1.0 / 12.0,
  };
  const double r = 1.0 / (z * z);
  double series = c[6];
  for (int i = 5; i >= 0; --i) series = series * r + c[i];
  return std::log(z) - 0.5 / z - series * r;
}

// psi'(z) = 1/z + 1/(2z^2) + sum B_{2n} / z^{2n+1}, z >= cutoff.
double trigamma_asymptotic(double z) {
  static const double c[7] = {
      1.0 / 6.0,  -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
      5.0 / 66.0, -691.0 / 2730.0,  7.0 / 6.0,
  };
  const double r = 1.0 / (z * z);
  double series = c[6];
  for (int i = 5; i >= 0; --i) series = series * r + c[i];
  return 1.0 / z + 0.5 * r + series * r / z;
}

}  // namespace

double log_gamma(double x) {
  check_argument(x, "log_gamma");
  if (x >= kAsymptoticCutoff) return log_gamma_asymptotic(x);
  // log Gamma(x) = log Gamma(x+1) - log x, applied until the series applies.
  return log_gamma(x + 1.0) - std::log(x);
}

double digamma(double x) {
  check_argument(x, "digamma");
  if (x >= kAsymptoticCutoff) return digamma_asymptotic(x);
  return digamma(x + 1.0) - 1.0 / x;
}

double trigamma(double x) {
  check_argument(x, "trigamma");
  if (x >= kAsymptoticCutoff) return trigamma_asymptotic(x);
  return trigamma(x + 1.0) + 1.0 / (x * x);
}

}  // namespace emvc
