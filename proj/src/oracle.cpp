#include "emvc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "emvc/errors.hpp"
#include "emvc/rng.hpp"
#include "quadrature.hpp"

namespace emvc {
namespace {

constexpr double kAbsTol = 1e-13;
constexpr double kRelTol = 1e-11;
constexpr std::size_t kDefaultQuadBudget = 2000000;
constexpr std::size_t kDefaultMcBudget = 200000;

struct LogIntegral {
  double log_value;
  double rel_error;
  std::size_t points;
};

// log of int pdf(p)^ea * pdf(q)^eb over the simplex, by adaptive quadrature.
// The integrand is evaluated relative to its rough peak so tolerances behave
// the same for very large and very small integrals.
LogIntegral power_product_integral(const DirichletParams& p, const DirichletParams& q,
                                   double ea, double eb, std::size_t budget) {
  const std::size_t max_evals = budget == 0 ? kDefaultQuadBudget : budget;

  auto log_f = [&](const double* x, std::size_t k) {
    std::span<const double> xs(x, k);
    double lp = 0.0;
    if (ea != 0.0) lp += ea * log_pdf(p, xs);
    if (eb != 0.0) lp += eb * log_pdf(q, xs);
    return lp;
  };

  if (p.order() == 2) {
    double lmax = -1e300;
    for (int i = 0; i < 257; ++i) {
      const double m = (i + 0.5) / 257.0;
      const double x[2] = {m, 1.0 - m};
      lmax = std::max(lmax, log_f(x, 2));
    }
    auto f = [&](double m) {
      const double x[2] = {m, 1.0 - m};
      return std::exp(log_f(x, 2) - lmax);
    };
    quad::QuadResult r = quad::integrate(f, 0.0, 1.0, kAbsTol, kRelTol, max_evals);
    return {lmax + std::log(r.value), r.error / r.value, r.evals};
  }
  if (p.order() == 3) {
    double lmax = -1e300;
    for (int i = 0; i < 65; ++i) {
      const double u = (i + 0.5) / 65.0;
      for (int j = 0; j < 65; ++j) {
        const double v = (j + 0.5) / 65.0;
        const double x[3] = {u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)};
        lmax = std::max(lmax, log_f(x, 3));
      }
    }
    auto f = [&](double m1, double m2, double m3) {
      const double x[3] = {m1, m2, m3};
      return std::exp(log_f(x, 3) - lmax);
    };
    quad::QuadResult r = quad::integrate_simplex3(f, kAbsTol, kRelTol, max_evals);
    return {lmax + std::log(r.value), r.error / r.value, r.evals};
  }
  throw UnsupportedError("quadrature oracle supports order 2 or 3, got " +
                         std::to_string(p.order()));
}

struct McMoments {
  double mean;
  double std_error;
  std::size_t points;
};

// Mean and standard error of g(x) over draws x ~ from.
McMoments mc_mean(const DirichletParams& from,
                  const std::function<double(std::span<const double>)>& g, std::size_t samples,
                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    do {
      rng.dirichlet(from.concentration, x);
    } while (*std::min_element(x.begin(), x.end()) <= 0.0);
    const double v = g(x);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(samples);
  const double se = samples > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  return {mean, se, samples};
}

void check_orders(const DirichletParams& p, const DirichletParams& q, const char* fn) {
  if (p.order() != q.order()) {
    throw DimensionError(std::string(fn) + ": parameter orders differ (" +
                         std::to_string(p.order()) + " vs " + std::to_string(q.order()) + ")");
  }
}

}  // namespace

OracleEstimate oracle_holder(const DirichletParams& p, const DirichletParams& q,
                             const HolderExponent& h, OracleMethod method,
                             std::size_t budget, std::uint64_t seed) {
  check_orders(p, q, "oracle_holder");
  const double g = h.gamma;
  const double gc = h.conjugate;
  OracleEstimate out;

  if (method == OracleMethod::quadrature) {
    LogIntegral ipq = power_product_integral(p, q, 1.0, 1.0, budget);
    LogIntegral ip = power_product_integral(p, q, g, 0.0, budget);
    LogIntegral iq = power_product_integral(p, q, 0.0, gc, budget);
    // D = -log Ipq + (1/g) log Ip + (1/g') log Iq.
    out.value = -ipq.log_value + ip.log_value / g + iq.log_value / gc;
    out.error_bound =
        std::max(ipq.rel_error + ip.rel_error / g + iq.rel_error / gc, 1e-12);
    out.points = ipq.points + ip.points + iq.points;
    return out;
  }

  const std::size_t n = budget == 0 ? kDefaultMcBudget : budget;
  McMoments mpq = mc_mean(
      p, [&](std::span<const double> x) { return std::exp(log_pdf(q, x)); }, n, mix_seed(seed, 0));
  McMoments mp = mc_mean(
      p, [&](std::span<const double> x) { return std::exp((g - 1.0) * log_pdf(p, x)); }, n,
      mix_seed(seed, 1));
  McMoments mq = mc_mean(
      q, [&](std::span<const double> x) { return std::exp((gc - 1.0) * log_pdf(q, x)); }, n,
      mix_seed(seed, 2));
  out.value = -std::log(mpq.mean) + std::log(mp.mean) / g + std::log(mq.mean) / gc;
  // The three streams are independent; combine in quadrature, report 3 sigma.
  out.error_bound = 3.0 * std::sqrt(std::pow(mpq.std_error / mpq.mean, 2) +
                                    std::pow(mp.std_error / (g * mp.mean), 2) +
                                    std::pow(mq.std_error / (gc * mq.mean), 2));
  out.points = mpq.points + mp.points + mq.points;
  return out;
}

OracleEstimate oracle_kl(const DirichletParams& p, const DirichletParams& q,
                         OracleMethod method, std::size_t budget, std::uint64_t seed) {
  check_orders(p, q, "oracle_kl");
  OracleEstimate out;

  if (method == OracleMethod::quadrature) {
    const std::size_t max_evals = budget == 0 ? kDefaultQuadBudget : budget;
    // Normalize by the density peak so the tolerances are scale-free.
    if (p.order() == 2) {
      double lmax = -1e300;
      for (int i = 0; i < 257; ++i) {
        const double m = (i + 0.5) / 257.0;
        const double x[2] = {m, 1.0 - m};
        lmax = std::max(lmax, log_pdf(p, x));
      }
      auto f = [&](double m) {
        const double x[2] = {m, 1.0 - m};
        const double lp = log_pdf(p, x);
        return std::exp(lp - lmax) * (lp - log_pdf(q, x));
      };
      quad::QuadResult r = quad::integrate(f, 0.0, 1.0, kAbsTol, kRelTol, max_evals);
      out = {std::exp(lmax) * r.value, std::max(std::exp(lmax) * r.error, 1e-12), r.evals};
    } else if (p.order() == 3) {
      double lmax = -1e300;
      for (int i = 0; i < 65; ++i) {
        const double u = (i + 0.5) / 65.0;
        for (int j = 0; j < 65; ++j) {
          const double v = (j + 0.5) / 65.0;
          const double x[3] = {u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)};
          lmax = std::max(lmax, log_pdf(p, x));
        }
      }
      auto f = [&](double m1, double m2, double m3) {
        const double x[3] = {m1, m2, m3};
        const double lp = log_pdf(p, x);
        return std::exp(lp - lmax) * (lp - log_pdf(q, x));
      };
      quad::QuadResult r = quad::integrate_simplex3(f, kAbsTol, kRelTol, max_evals);
      out = {std::exp(lmax) * r.value, std::max(std::exp(lmax) * r.error, 1e-12), r.evals};
    } else {
      throw UnsupportedError("quadrature oracle supports order 2 or 3, got " +
                             std::to_string(p.order()));
    }
    return out;
  }

  const std::size_t n = budget == 0 ? kDefaultMcBudget : budget;
  McMoments r = mc_mean(
      p, [&](std::span<const double> x) { return log_pdf(p, x) - log_pdf(q, x); }, n,
      mix_seed(seed, 3));
  out = {r.mean, 3.0 * r.std_error, r.points};
  return out;
}

}  // namespace emvc
