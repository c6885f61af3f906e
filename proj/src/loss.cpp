#include "emvc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emvc/errors.hpp"
#include "emvc/specfun.hpp"

namespace emvc {

double AnnealSchedule::weight(double epoch) const {
  if (t_anneal < 0.0) {
    throw DomainError("AnnealSchedule: t_anneal must be >= 0, got " + std::to_string(t_anneal));
  }
  if (t_anneal == 0.0) return 1.0;
  return std::min(1.0, epoch / t_anneal);
}

std::vector<double> adjusted_concentration(const std::vector<double>& a, std::size_t label) {
  if (label >= a.size()) {
    throw ArgumentError("adjusted_concentration: label " + std::to_string(label) +
                        " out of range for " + std::to_string(a.size()) + " classes");
  }
  std::vector<double> adj = a;
  adj[label] = 1.0;
  return adj;
}

TermValue evidential_term(const DirichletParams& a, std::size_t label, double reg_weight,
                          const DivergenceKind& kind) {
  const std::size_t k = a.order();
  if (label >= k) {
    throw ArgumentError("evidential_term: label " + std::to_string(label) +
                        " out of range for " + std::to_string(k) + " classes");
  }
  if (kind.tag == DivergenceKind::Tag::jensen_shannon_mc) {
    throw UnsupportedError(
        "evidential_term: jensen-shannon is a Monte Carlo estimate and cannot regularize "
        "training");
  }
  if (!(reg_weight >= 0.0)) {
    throw DomainError("evidential_term: regularizer weight must be >= 0, got " +
                      std::to_string(reg_weight));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (a.concentration[i] < 1.0) {
      throw DomainError("evidential_term: concentration[" + std::to_string(i) +
                        "] = " + std::to_string(a.concentration[i]) +
                        " but evidence form requires >= 1");
    }
  }

  const double s = a.strength();
  TermValue t;
  t.value = digamma(s) - digamma(a.concentration[label]);
  t.grad.assign(k, trigamma(s));
  t.grad[label] -= trigamma(a.concentration[label]);

  if (reg_weight == 0.0) return t;

  // Divergence of the adjusted Dirichlet from the uniform one, with its
  // closed-form derivative in each unlabelled coordinate (the labelled one is
  // pinned to 1 and contributes nothing).
  const std::vector<double> adj = adjusted_concentration(a.concentration, label);
  const DirichletParams adj_params{std::vector<double>(adj)};
  const DirichletParams uniform{std::vector<double>(k, 1.0)};
  double s_adj = 0.0;
  for (double v : adj) s_adj += v;
  const double kk = static_cast<double>(k);

  switch (kind.tag) {
    case DivergenceKind::Tag::kl: {
      t.value += reg_weight * kl_divergence(adj_params, uniform);
      for (std::size_t i = 0; i < k; ++i) {
        if (i == label) continue;
        t.grad[i] += reg_weight * ((adj[i] - 1.0) * trigamma(adj[i]) -
                                   (s_adj - kk) * trigamma(s_adj));
      }
      break;
    }
    case DivergenceKind::Tag::holder:
    case DivergenceKind::Tag::cauchy_schwarz: {
      const double gamma =
          kind.tag == DivergenceKind::Tag::cauchy_schwarz ? 2.0 : kind.gamma;
      const HolderExponent h(gamma);
      t.value += reg_weight * holder_divergence(adj_params, uniform, h);
      for (std::size_t i = 0; i < k; ++i) {
        if (i == label) continue;
        t.grad[i] += reg_weight * (digamma(gamma * (adj[i] - 1.0) + 1.0) -
                                   digamma(gamma * (s_adj - kk) + kk) - digamma(adj[i]) +
                                   digamma(s_adj));
      }
      break;
    }
    case DivergenceKind::Tag::jensen_shannon_mc:
      break;  // rejected above
  }
  return t;
}

SampleLoss total_loss(const std::vector<Evidence>& view_evidence, const Evidence* pseudo_evidence,
                      std::size_t label, double reg_weight, const DivergenceKind& kind) {
  if (view_evidence.empty()) {
    throw ArgumentError("total_loss: need evidence from at least one view");
  }
  const std::size_t k = view_evidence.front().size();
  for (const Evidence& e : view_evidence) {
    if (e.size() != k) throw DimensionError("total_loss: views disagree on the class count");
  }
  if (pseudo_evidence != nullptr && pseudo_evidence->size() != k) {
    throw DimensionError("total_loss: pseudo evidence disagrees on the class count");
  }

  SampleLoss out;
  out.breakdown.per_view.resize(view_evidence.size());
  out.g_view_evidence.assign(view_evidence.size(), std::vector<double>(k, 0.0));

  // Per-source terms; concentrations are evidence + 1 so the gradient passes
  // through unchanged.
  auto plus_one = [](const Evidence& e) {
    std::vector<double> a(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) a[i] = e[i] + 1.0;
    return DirichletParams(std::move(a));
  };
  for (std::size_t v = 0; v < view_evidence.size(); ++v) {
    TermValue t = evidential_term(plus_one(view_evidence[v]), label, reg_weight, kind);
    out.breakdown.per_view[v] = t.value;
    out.g_view_evidence[v] = std::move(t.grad);
  }
  if (pseudo_evidence != nullptr) {
    TermValue t = evidential_term(plus_one(*pseudo_evidence), label, reg_weight, kind);
    out.breakdown.pseudo = t.value;
    out.g_pseudo_evidence = std::move(t.grad);
  }

  // Fused term: fold the opinions, evaluate on the induced Dirichlet, then run
  // the chain backwards through the stored fold states.
  std::vector<Opinion> ops;
  for (const Evidence& e : view_evidence) ops.push_back(opinion_from_evidence(e));
  if (pseudo_evidence != nullptr) ops.push_back(opinion_from_evidence(*pseudo_evidence));

  std::vector<Opinion> acc;
  acc.push_back(ops.front());
  for (std::size_t i = 1; i < ops.size(); ++i) acc.push_back(combine_pair(acc.back(), ops[i]));

  TermValue fused = evidential_term(dirichlet_from_opinion(acc.back()), label, reg_weight, kind);
  out.breakdown.fused = fused.value;

  std::vector<OpinionAdjoint> g_ops(ops.size());
  OpinionAdjoint g_acc = dirichlet_from_opinion_vjp(acc.back(), fused.grad);
  for (std::size_t i = ops.size(); i-- > 1;) {
    auto [g_prev, g_op] = combine_pair_vjp(acc[i - 1], ops[i], g_acc);
    g_ops[i] = std::move(g_op);
    g_acc = std::move(g_prev);
  }
  g_ops[0] = std::move(g_acc);

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const bool is_pseudo = pseudo_evidence != nullptr && i + 1 == ops.size();
    const Evidence& e = is_pseudo ? *pseudo_evidence : view_evidence[i];
    std::vector<double> ge = opinion_from_evidence_vjp(e, g_ops[i]);
    std::vector<double>& sink = is_pseudo ? out.g_pseudo_evidence : out.g_view_evidence[i];
    for (std::size_t j = 0; j < k; ++j) sink[j] += ge[j];
  }

  out.breakdown.total = out.breakdown.fused + out.breakdown.pseudo;
  for (double v : out.breakdown.per_view) out.breakdown.total += v;
  return out;
}

}  // namespace emvc
