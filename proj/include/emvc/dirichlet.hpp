#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emvc {

// Concentration parameters of a Dirichlet over K >= 2 classes, all > 0.
struct DirichletParams {
  std::vector<double> concentration;

  explicit DirichletParams(std::vector<double> a);
  std::size_t order() const { return concentration.size(); }
  double strength() const;  // sum of concentrations
};

// Natural (exponential-family) parameters theta = concentration - 1.
// Every component must stay strictly above -1.
struct NaturalParams {
  std::vector<double> theta;

  explicit NaturalParams(std::vector<double> t);
  static NaturalParams from_dirichlet(const DirichletParams& p);
  DirichletParams to_dirichlet() const;
  NaturalParams scaled(double factor) const;
};

// Conjugate exponent pair for the Hoelder inequality: 1/gamma + 1/conjugate = 1,
// with gamma > 1 so both are finite and positive.
struct HolderExponent {
  double gamma;
  double conjugate;

  explicit HolderExponent(double g);
};

// Which divergence to compute / regularize with. Cauchy-Schwarz is the
// gamma = 2 member of the Hoelder family; Jensen-Shannon is Monte Carlo only
// and is excluded from training.
struct DivergenceKind {
  enum class Tag { holder, kl, cauchy_schwarz, jensen_shannon_mc };

  Tag tag = Tag::holder;
  double gamma = 2.0;             // holder only
  std::size_t sample_count = 0;   // jensen_shannon_mc only
  std::uint64_t seed = 0;         // jensen_shannon_mc only

  static DivergenceKind holder(double gamma);
  static DivergenceKind kl();
  static DivergenceKind cauchy_schwarz();
  static DivergenceKind jensen_shannon_mc(std::size_t samples, std::uint64_t seed);
};

struct McEstimate {
  double value;
  double std_error;
};

// Log-partition F(theta) = sum_k lgamma(theta_k + 1) - lgamma(sum_k (theta_k + 1)).
double log_normalizer(const NaturalParams& theta);

// Closed-form Hoelder pseudo-divergence between two Dirichlets:
//   (1/g) F(g * theta_p) + (1/g') F(g' * theta_q) - F(theta_p + theta_q).
// Throws DomainError when a scaled or summed component falls to -1 or below.
double holder_divergence(const DirichletParams& p, const DirichletParams& q,
                         const HolderExponent& h);

// Closed-form KL(p || q) between Dirichlets.
double kl_divergence(const DirichletParams& p, const DirichletParams& q);

// Monte Carlo Jensen-Shannon divergence against the equal mixture.
McEstimate js_divergence_mc(const DirichletParams& p, const DirichletParams& q,
                            std::size_t samples, std::uint64_t seed);

// Dispatch on kind; jensen_shannon_mc returns the MC point estimate.
double divergence(const DivergenceKind& kind, const DirichletParams& p,
                  const DirichletParams& q);

// E_{mu ~ Dir(a)}[log mu_k] = psi(a_k) - psi(sum a).
double expected_log_likelihood(const DirichletParams& a, std::size_t class_index);

// Log density of Dir(a) at a point on the open simplex.
double log_pdf(const DirichletParams& a, std::span<const double> x);

// n deterministic draws from Dir(a) (gamma-variate construction).
std::vector<std::vector<double>> sample(const DirichletParams& a, std::uint64_t seed,
                                        std::size_t n);

}  // namespace emvc
