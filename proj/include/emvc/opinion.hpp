#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "json.hpp"

#include "emvc/dirichlet.hpp"

namespace emvc {

// Per-class evidence, componentwise >= 0.
using Evidence = std::vector<double>;

// Subjective-logic opinion over K >= 2 classes: beliefs b_k >= 0, uncertainty
// u >= 0, with sum_k b_k + u = 1 (enforced to 1e-12 on construction).
struct Opinion {
  std::vector<double> beliefs;
  double uncertainty = 1.0;

  Opinion(std::vector<double> b, double u);
  std::size_t order() const { return beliefs.size(); }

  static Opinion vacuous(std::size_t k);
};

// e -> opinion: with S = sum e + K, beliefs are e/S and uncertainty K/S.
Opinion opinion_from_evidence(const Evidence& e);

// Opinion -> Dirichlet concentration a_k = 1 + K b_k / u. Needs u > 0.
DirichletParams dirichlet_from_opinion(const Opinion& o);

// Reduced Dempster combination of two opinions. Throws ConflictError when the
// conflict mass leaves (numerically) nothing to renormalize.
Opinion combine_pair(const Opinion& a, const Opinion& b);

// Left fold of combine_pair over a non-empty list.
Opinion combine_all(const std::vector<Opinion>& opinions);

// Vector-Jacobian products for backpropagation through the maps above. Each
// takes the forward inputs (and output where it is cheaper than recomputing)
// plus the adjoint of the output, and returns adjoints of the inputs.

struct OpinionAdjoint {
  std::vector<double> beliefs;
  double uncertainty = 0.0;
};

// Adjoint of e given adjoint of opinion_from_evidence(e).
std::vector<double> opinion_from_evidence_vjp(const Evidence& e, const OpinionAdjoint& g);

// Adjoint of o given adjoint of the concentrations of dirichlet_from_opinion(o).
OpinionAdjoint dirichlet_from_opinion_vjp(const Opinion& o, const std::vector<double>& g_conc);

// Adjoints of both inputs of combine_pair given the adjoint of its output.
std::pair<OpinionAdjoint, OpinionAdjoint> combine_pair_vjp(const Opinion& a, const Opinion& b,
                                                           const OpinionAdjoint& g_out);

}  // namespace emvc

// Serializer specialization because Opinion has no default constructor.
namespace nlohmann {
template <>
struct adl_serializer<emvc::Opinion> {
  static emvc::Opinion from_json(const json& j);
  static void to_json(json& j, const emvc::Opinion& o);
};
}  // namespace nlohmann
