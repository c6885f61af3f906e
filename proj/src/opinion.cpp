#include "emvc/opinion.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "emvc/errors.hpp"

namespace emvc {
namespace {

constexpr double kSumTol = 1e-12;
constexpr double kConflictFloor = 1e-12;

void check_same_order(const Opinion& a, const Opinion& b, const char* fn) {
  if (a.order() != b.order()) {
    throw DimensionError(std::string(fn) + ": opinion orders differ (" +
                         std::to_string(a.order()) + " vs " + std::to_string(b.order()) + ")");
  }
}

}  // namespace

Opinion::Opinion(std::vector<double> b, double u) : beliefs(std::move(b)), uncertainty(u) {
  if (beliefs.size() < 2) {
    throw DimensionError("Opinion: need at least 2 belief masses, got " +
                         std::to_string(beliefs.size()));
  }
  double sum = uncertainty;
  for (std::size_t k = 0; k < beliefs.size(); ++k) {
    if (!(beliefs[k] >= 0.0) || std::isinf(beliefs[k])) {
      throw DomainError("Opinion: belief[" + std::to_string(k) + "] must be >= 0, got " +
                        std::to_string(beliefs[k]));
    }
    sum += beliefs[k];
  }
  if (!(uncertainty >= 0.0) || std::isinf(uncertainty)) {
    throw DomainError("Opinion: uncertainty must be >= 0, got " + std::to_string(uncertainty));
  }
  if (std::fabs(sum - 1.0) > kSumTol) {
    throw DomainError("Opinion: beliefs and uncertainty must sum to 1, got " +
                      std::to_string(sum));
  }
}

Opinion Opinion::vacuous(std::size_t k) {
  return Opinion(std::vector<double>(k, 0.0), 1.0);
}

Opinion opinion_from_evidence(const Evidence& e) {
  if (e.size() < 2) {
    throw DimensionError("opinion_from_evidence: need at least 2 classes, got " +
                         std::to_string(e.size()));
  }
  const double k = static_cast<double>(e.size());
  double s = k;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(e[i] >= 0.0) || std::isinf(e[i])) {
      throw DomainError("opinion_from_evidence: evidence[" + std::to_string(i) +
                        "] must be >= 0, got " + std::to_string(e[i]));
    }
    s += e[i];
  }
  std::vector<double> b(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) b[i] = e[i] / s;
  return Opinion(std::move(b), k / s);
}

DirichletParams dirichlet_from_opinion(const Opinion& o) {
  if (o.uncertainty <= 0.0) {
    throw SingularityError("dirichlet_from_opinion: uncertainty must be > 0, got " +
                           std::to_string(o.uncertainty));
  }
  const double k = static_cast<double>(o.order());
  std::vector<double> a(o.order());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 + k * o.beliefs[i] / o.uncertainty;
  return DirichletParams(std::move(a));
}

Opinion combine_pair(const Opinion& a, const Opinion& b) {
  check_same_order(a, b, "combine_pair");
  const std::size_t k = a.order();

  // Joint masses before renormalization; their total equals 1 - conflict,
  // which keeps the output sum exact even when the conflict is large.
  std::vector<double> num(k);
  double total = a.uncertainty * b.uncertainty;
  for (std::size_t i = 0; i < k; ++i) {
    num[i] = a.beliefs[i] * b.beliefs[i] + a.beliefs[i] * b.uncertainty +
             b.beliefs[i] * a.uncertainty;
    total += num[i];
  }
  if (total <= kConflictFloor) {
    throw ConflictError("combine_pair: total conflict (remaining mass " +
                        std::to_string(total) + "); opinions are incompatible");
  }
  for (std::size_t i = 0; i < k; ++i) num[i] /= total;
  return Opinion(std::move(num), a.uncertainty * b.uncertainty / total);
}

Opinion combine_all(const std::vector<Opinion>& opinions) {
  if (opinions.empty()) {
    throw ArgumentError("combine_all: need at least one opinion");
  }
  Opinion acc = opinions.front();
  for (std::size_t i = 1; i < opinions.size(); ++i) acc = combine_pair(acc, opinions[i]);
  return acc;
}

std::vector<double> opinion_from_evidence_vjp(const Evidence& e, const OpinionAdjoint& g) {
  const double k = static_cast<double>(e.size());
  double s = k;
  for (double v : e) s += v;
  // dot of the adjoint with the forward output (b, u)
  double dot = g.uncertainty * k / s;
  for (std::size_t i = 0; i < e.size(); ++i) dot += g.beliefs[i] * e[i] / s;
  std::vector<double> ge(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) ge[i] = (g.beliefs[i] - dot) / s;
  return ge;
}

OpinionAdjoint dirichlet_from_opinion_vjp(const Opinion& o, const std::vector<double>& g_conc) {
  const double k = static_cast<double>(o.order());
  const double u = o.uncertainty;
  OpinionAdjoint g;
  g.beliefs.resize(o.order());
  double dot = 0.0;
  for (std::size_t i = 0; i < o.order(); ++i) {
    g.beliefs[i] = g_conc[i] * k / u;
    dot += g_conc[i] * o.beliefs[i];
  }
  g.uncertainty = -k * dot / (u * u);
  return g;
}

std::pair<OpinionAdjoint, OpinionAdjoint> combine_pair_vjp(const Opinion& a, const Opinion& b,
                                                           const OpinionAdjoint& g_out) {
  const std::size_t k = a.order();
  std::vector<double> num(k);
  double total = a.uncertainty * b.uncertainty;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    num[i] = a.beliefs[i] * b.beliefs[i] + a.beliefs[i] * b.uncertainty +
             b.beliefs[i] * a.uncertainty;
    total += num[i];
    sa += a.beliefs[i];
    sb += b.beliefs[i];
  }
  const double u_out = a.uncertainty * b.uncertainty / total;

  // G = <g_out, output>; every partial of the quotient picks up -output * dT.
  double big_g = g_out.uncertainty * u_out;
  for (std::size_t i = 0; i < k; ++i) big_g += g_out.beliefs[i] * num[i] / total;

  OpinionAdjoint ga, gb;
  ga.beliefs.resize(k);
  gb.beliefs.resize(k);
  double dot_a = 0.0, dot_b = 0.0;  // sum_k g_b[k] * other_beliefs[k]
  for (std::size_t i = 0; i < k; ++i) {
    ga.beliefs[i] = (g_out.beliefs[i] - big_g) * (b.beliefs[i] + b.uncertainty) / total;
    gb.beliefs[i] = (g_out.beliefs[i] - big_g) * (a.beliefs[i] + a.uncertainty) / total;
    dot_a += g_out.beliefs[i] * b.beliefs[i];
    dot_b += g_out.beliefs[i] * a.beliefs[i];
  }
  ga.uncertainty =
      (dot_a + g_out.uncertainty * b.uncertainty - big_g * (sb + b.uncertainty)) / total;
  gb.uncertainty =
      (dot_b + g_out.uncertainty * a.uncertainty - big_g * (sa + a.uncertainty)) / total;
  return {std::move(ga), std::move(gb)};
}

}  // namespace emvc

namespace nlohmann {

emvc::Opinion adl_serializer<emvc::Opinion>::from_json(const json& j) {
  return emvc::Opinion(j.at("beliefs").get<std::vector<double>>(),
                       j.at("uncertainty").get<double>());
}

void adl_serializer<emvc::Opinion>::to_json(json& j, const emvc::Opinion& o) {
  j = json{{"beliefs", o.beliefs}, {"uncertainty", o.uncertainty}};
}

}  // namespace nlohmann
