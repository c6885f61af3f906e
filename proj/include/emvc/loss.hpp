#pragma once

#include <cstddef>
#include <vector>

#include "emvc/dirichlet.hpp"
#include "emvc/opinion.hpp"

namespace emvc {

// Regularizer warm-up: weight(t) = min(1, t / t_anneal), so training starts
// on the data term alone. t_anneal = 0 disables the ramp.
struct AnnealSchedule {
  double t_anneal = 10.0;
  double weight(double epoch) const;
};

// Concentrations with the labelled class reset to 1; the regularizer should
// only see evidence assigned to the wrong classes.
std::vector<double> adjusted_concentration(const std::vector<double>& a, std::size_t label);

struct TermValue {
  double value = 0.0;
  std::vector<double> grad;  // with respect to the concentrations
};

// One evidential classification term on Dir(a), a_k >= 1: the expected cross
// entropy psi(S) - psi(a_label) plus reg_weight times the divergence from the
// adjusted Dirichlet to the uniform one. Jensen-Shannon is estimate-only and
// is rejected here regardless of the weight.
TermValue evidential_term(const DirichletParams& a, std::size_t label, double reg_weight,
                          const DivergenceKind& kind);

struct LossBreakdown {
  double fused = 0.0;
  double pseudo = 0.0;
  std::vector<double> per_view;
  double total = 0.0;
};

struct SampleLoss {
  LossBreakdown breakdown;
  std::vector<std::vector<double>> g_view_evidence;
  std::vector<double> g_pseudo_evidence;  // empty when no pseudo evidence was given
};

// Full per-sample objective: an evidential term on each view's evidence, one
// on the pseudo view's when present, and one on the Dirichlet induced by the
// combined opinion (views first, pseudo last). Gradients are with respect to
// the raw evidence vectors and include the paths through the combination.
SampleLoss total_loss(const std::vector<Evidence>& view_evidence, const Evidence* pseudo_evidence,
                      std::size_t label, double reg_weight, const DivergenceKind& kind);

}  // namespace emvc
