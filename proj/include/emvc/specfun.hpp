#pragma once

namespace emvc {

// log Gamma(x), digamma psi(x) and trigamma psi'(x) on the positive reals.
// All three throw DomainError for x <= 0, NaN or infinity.
//
// Implementation: upward recurrence until the argument is large enough for a
// Stirling-type asymptotic series with Bernoulli-number coefficients. The
// recurrence step is performed as a literal `f(x+1) op term(x)` so the
// standard recurrence identities hold to rounding error by construction.

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

}  // namespace emvc
