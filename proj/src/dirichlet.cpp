#include "emvc/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emvc/errors.hpp"
#include "emvc/rng.hpp"
#include "emvc/specfun.hpp"

namespace emvc {
namespace {

void check_same_order(const DirichletParams& p, const DirichletParams& q, const char* fn) {
  if (p.order() != q.order()) {
    throw DimensionError(std::string(fn) + ": parameter orders differ (" +
                         std::to_string(p.order()) + " vs " + std::to_string(q.order()) + ")");
  }
}

}  // namespace

DirichletParams::DirichletParams(std::vector<double> a) : concentration(std::move(a)) {
  if (concentration.size() < 2) {
    throw DimensionError("DirichletParams: need at least 2 components, got " +
                         std::to_string(concentration.size()));
  }
  for (std::size_t k = 0; k < concentration.size(); ++k) {
    const double v = concentration[k];
    if (!(v > 0.0) || std::isinf(v)) {
      throw DomainError("DirichletParams: concentration[" + std::to_string(k) +
                        "] must be positive and finite, got " + std::to_string(v));
    }
  }
}

double DirichletParams::strength() const {
  double s = 0.0;
  for (double v : concentration) s += v;
  return s;
}

NaturalParams::NaturalParams(std::vector<double> t) : theta(std::move(t)) {
  if (theta.size() < 2) {
    throw DimensionError("NaturalParams: need at least 2 components, got " +
                         std::to_string(theta.size()));
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] > -1.0) || std::isinf(theta[k])) {
      throw DomainError("NaturalParams: theta[" + std::to_string(k) +
                        "] must be a finite real > -1, got " + std::to_string(theta[k]));
    }
  }
}

NaturalParams NaturalParams::from_dirichlet(const DirichletParams& p) {
  std::vector<double> t(p.concentration.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = p.concentration[k] - 1.0;
  return NaturalParams(std::move(t));
}

DirichletParams NaturalParams::to_dirichlet() const {
  std::vector<double> a(theta.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = theta[k] + 1.0;
  return DirichletParams(std::move(a));
}

NaturalParams NaturalParams::scaled(double factor) const {
  std::vector<double> t(theta.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = factor * theta[k];
    if (!(t[k] > -1.0)) {
      throw DomainError("NaturalParams::scaled: component " + std::to_string(k) +
                        " leaves the domain (" + std::to_string(factor) + " * " +
                        std::to_string(theta[k]) + " <= -1)");
    }
  }
  return NaturalParams(std::move(t));
}

HolderExponent::HolderExponent(double g) : gamma(g), conjugate(0.0) {
  if (!(g > 1.0) || std::isinf(g)) {
    throw DomainError("HolderExponent: gamma must be a finite real > 1, got " +
                      std::to_string(g));
  }
  conjugate = g / (g - 1.0);
}

DivergenceKind DivergenceKind::holder(double gamma) {
  DivergenceKind k;
  k.tag = Tag::holder;
  k.gamma = HolderExponent(gamma).gamma;  // validates
  return k;
}

DivergenceKind DivergenceKind::kl() {
  DivergenceKind k;
  k.tag = Tag::kl;
  return k;
}

DivergenceKind DivergenceKind::cauchy_schwarz() {
  DivergenceKind k;
  k.tag = Tag::cauchy_schwarz;
  k.gamma = 2.0;
  return k;
}

DivergenceKind DivergenceKind::jensen_shannon_mc(std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ArgumentError("jensen_shannon_mc: sample count must be positive");
  DivergenceKind k;
  k.tag = Tag::jensen_shannon_mc;
  k.sample_count = samples;
  k.seed = seed;
  return k;
}

double log_normalizer(const NaturalParams& np) {
  double sum_terms = 0.0;
  double total = 0.0;
  for (double t : np.theta) {
    sum_terms += log_gamma(t + 1.0);
    total += t + 1.0;
  }
  return sum_terms - log_gamma(total);
}

double holder_divergence(const DirichletParams& p, const DirichletParams& q,
                         const HolderExponent& h) {
  check_same_order(p, q, "holder_divergence");
  const NaturalParams tp = NaturalParams::from_dirichlet(p);
  const NaturalParams tq = NaturalParams::from_dirichlet(q);

  std::vector<double> sum(tp.theta.size());
  for (std::size_t k = 0; k < sum.size(); ++k) {
    sum[k] = tp.theta[k] + tq.theta[k];
    if (!(sum[k] > -1.0)) {
      throw DomainError("holder_divergence: theta_p + theta_q component " + std::to_string(k) +
                        " is " + std::to_string(sum[k]) + "; p*q is not integrable");
    }
  }
  return log_normalizer(tp.scaled(h.gamma)) / h.gamma +
         log_normalizer(tq.scaled(h.conjugate)) / h.conjugate -
         log_normalizer(NaturalParams(std::move(sum)));
}

double kl_divergence(const DirichletParams& p, const DirichletParams& q) {
  check_same_order(p, q, "kl_divergence");
  const double sp = p.strength();
  const double sq = q.strength();
  double d = log_gamma(sp) - log_gamma(sq);
  const double psi_sp = digamma(sp);
  for (std::size_t k = 0; k < p.order(); ++k) {
    const double ap = p.concentration[k];
    const double aq = q.concentration[k];
    d += log_gamma(aq) - log_gamma(ap) + (ap - aq) * (digamma(ap) - psi_sp);
  }
  return d;
}

double log_pdf(const DirichletParams& a, std::span<const double> x) {
  if (x.size() != a.order()) {
    throw DimensionError("log_pdf: point has " + std::to_string(x.size()) +
                         " components, expected " + std::to_string(a.order()));
  }
  double lp = log_gamma(a.strength());
  for (std::size_t k = 0; k < a.order(); ++k) {
    if (!(x[k] > 0.0)) {
      throw DomainError("log_pdf: point must lie on the open simplex; component " +
                        std::to_string(k) + " is " + std::to_string(x[k]));
    }
    lp += (a.concentration[k] - 1.0) * std::log(x[k]) - log_gamma(a.concentration[k]);
  }
  return lp;
}

McEstimate js_divergence_mc(const DirichletParams& p, const DirichletParams& q,
                            std::size_t samples, std::uint64_t seed) {
  check_same_order(p, q, "js_divergence_mc");
  if (samples == 0) throw ArgumentError("js_divergence_mc: sample count must be positive");

  // JS(p, q) = 0.5 E_p[log(p/m)] + 0.5 E_q[log(q/m)], m = (p + q) / 2.
  // One stream per expectation keeps the two estimates independent.
  const double log_half = std::log(0.5);
  double mean[2] = {0.0, 0.0};
  double m2[2] = {0.0, 0.0};
  std::vector<double> x;

  for (int side = 0; side < 2; ++side) {
    const DirichletParams& from = side == 0 ? p : q;
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(side)));
    for (std::size_t i = 0; i < samples; ++i) {
      do {
        rng.dirichlet(from.concentration, x);
      } while (*std::min_element(x.begin(), x.end()) <= 0.0);
      const double lp = log_pdf(p, x);
      const double lq = log_pdf(q, x);
      const double lfrom = side == 0 ? lp : lq;
      // log m(x) = logsumexp(lp, lq) + log(1/2)
      const double hi = lp > lq ? lp : lq;
      const double lm = hi + std::log1p(std::exp(-std::fabs(lp - lq))) + log_half;
      const double v = lfrom - lm;
      const double delta = v - mean[side];
      mean[side] += delta / static_cast<double>(i + 1);
      m2[side] += delta * (v - mean[side]);
    }
  }
  const double n = static_cast<double>(samples);
  const double value = 0.5 * (mean[0] + mean[1]);
  double var_of_value = 0.0;
  if (samples > 1) {
    var_of_value = 0.25 * (m2[0] + m2[1]) / (n - 1.0) / n;
  }
  return {value, std::sqrt(var_of_value)};
}

double divergence(const DivergenceKind& kind, const DirichletParams& p,
                  const DirichletParams& q) {
  switch (kind.tag) {
    case DivergenceKind::Tag::holder:
      return holder_divergence(p, q, HolderExponent(kind.gamma));
    case DivergenceKind::Tag::cauchy_schwarz:
      return holder_divergence(p, q, HolderExponent(2.0));
    case DivergenceKind::Tag::kl:
      return kl_divergence(p, q);
    case DivergenceKind::Tag::jensen_shannon_mc:
      return js_divergence_mc(p, q, kind.sample_count, kind.seed).value;
  }
  throw ArgumentError("divergence: unknown kind tag");
}

double expected_log_likelihood(const DirichletParams& a, std::size_t class_index) {
  if (class_index >= a.order()) {
    throw DimensionError("expected_log_likelihood: class index " + std::to_string(class_index) +
                         " out of range for order " + std::to_string(a.order()));
  }
  return digamma(a.concentration[class_index]) - digamma(a.strength());
}

std::vector<std::vector<double>> sample(const DirichletParams& a, std::uint64_t seed,
                                        std::size_t n) {
  Rng rng(seed);
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) rng.dirichlet(a.concentration, out[i]);
  return out;
}

}  // namespace emvc
