#pragma once

#include <cstddef>
#include <cstdint>

#include "emvc/dirichlet.hpp"

namespace emvc {

// Independent numerical estimates of the divergence integrals, used to check
// the closed forms. The quadrature path evaluates the defining integrals of
// the density directly and never touches the scaled-parameter log-partition
// identity it is meant to verify.

enum class OracleMethod { quadrature, monte_carlo };

struct OracleEstimate {
  double value = 0.0;
  // Conservative bound on |value - truth|: accumulated panel estimates for
  // quadrature, 3 standard errors for Monte Carlo.
  double error_bound = 0.0;
  std::size_t points = 0;
};

// Hoelder pseudo-divergence via its defining integrals. Quadrature supports
// K in {2, 3}; Monte Carlo supports any order. `budget` is the evaluation
// budget per integral (0 picks a sensible default), `seed` drives MC only.
OracleEstimate oracle_holder(const DirichletParams& p, const DirichletParams& q,
                             const HolderExponent& h, OracleMethod method,
                             std::size_t budget = 0, std::uint64_t seed = 0);

// KL(p || q) via direct integration of p log(p/q), same conventions.
OracleEstimate oracle_kl(const DirichletParams& p, const DirichletParams& q,
                         OracleMethod method, std::size_t budget = 0,
                         std::uint64_t seed = 0);

}  // namespace emvc
