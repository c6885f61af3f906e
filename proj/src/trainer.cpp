#include "emvc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "emvc/errors.hpp"
#include "emvc/rng.hpp"

namespace emvc {
namespace {

std::vector<std::vector<double>> sample_inputs(const MultiViewDataset& d, std::size_t row) {
  std::vector<std::vector<double>> x;
  x.reserve(d.num_views());
  for (const ViewMatrix& m : d.views) {
    const std::span<const double> r = m.row(row);
    x.emplace_back(r.begin(), r.end());
  }
  return x;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void check_config(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw ArgumentError("train: epochs must be positive");
  if (cfg.batch_size == 0) throw ArgumentError("train: batch_size must be positive");
  if (!(cfg.learning_rate >= 0.0)) throw DomainError("train: learning rate must be >= 0");
  if (!(cfg.weight_decay >= 0.0)) throw DomainError("train: weight decay must be >= 0");
  if (!(cfg.eps > 0.0)) throw DomainError("train: eps must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw DomainError("train: betas must lie in [0, 1)");
  }
  if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor <= 1.0)) {
    throw DomainError("train: lr_decay_factor must lie in (0, 1]");
  }
  if (cfg.kind.tag == DivergenceKind::Tag::jensen_shannon_mc) {
    throw UnsupportedError("train: jensen-shannon is estimate-only and cannot drive training");
  }
}

// Mutable views of every net's parameter vector, views first, pseudo last.
std::vector<std::vector<double>*> param_slots(MultiViewModel& model) {
  std::vector<std::vector<double>*> slots;
  for (EvidenceNet& net : model.view_nets()) slots.push_back(&net.params());
  if (model.pseudo_net() != nullptr) slots.push_back(&model.pseudo_net()->params());
  return slots;
}

}  // namespace

std::pair<double, std::vector<double>> sample_gradients(
    const MultiViewModel& model, const std::vector<std::vector<double>>& inputs,
    std::size_t label, double reg_weight, const DivergenceKind& kind) {
  MultiViewModel::Trace trace = model.forward(inputs);

  std::vector<Evidence> view_ev;
  view_ev.reserve(trace.views.size());
  for (const EvidenceNet::Trace& t : trace.views) view_ev.push_back(t.evidence);
  const Evidence* pseudo_ev = trace.pseudo ? &trace.pseudo->evidence : nullptr;

  SampleLoss loss = total_loss(view_ev, pseudo_ev, label, reg_weight, kind);
  MultiViewModel::Grads g =
      model.backward(trace, loss.g_view_evidence,
                     trace.pseudo ? &loss.g_pseudo_evidence : nullptr);

  std::vector<double> flat;
  for (const std::vector<double>& gv : g.views) flat.insert(flat.end(), gv.begin(), gv.end());
  flat.insert(flat.end(), g.pseudo.begin(), g.pseudo.end());
  return {loss.breakdown.total, std::move(flat)};
}

TrainResult train(const MultiViewDataset& data, const ArchSpec& arch, const TrainConfig& cfg) {
  data.validate();
  check_config(cfg);

  std::vector<MlpConfig> configs;
  for (const ViewMatrix& m : data.views) {
    configs.push_back(MlpConfig{m.cols, data.num_classes, arch.hidden});
  }
  MultiViewModel model(std::move(configs), arch.pseudo_hidden, arch.use_pseudo);
  model.init_params(mix_seed(cfg.seed, 0));

  std::vector<std::vector<double>*> slots = param_slots(model);
  std::size_t total_params = 0;
  for (const std::vector<double>* s : slots) total_params += s->size();

  std::vector<double> m_state(total_params, 0.0), v_state(total_params, 0.0);
  std::vector<double> grad(total_params);
  std::size_t step = 0;
  const std::size_t decay_every =
      cfg.lr_decay_every != 0 ? cfg.lr_decay_every : std::max<std::size_t>(1, cfg.epochs / 2);

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainResult result{std::move(model), {}};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double reg_weight = cfg.anneal.weight(static_cast<double>(epoch));
    const double lr = cfg.learning_rate *
                      std::pow(cfg.lr_decay_factor, static_cast<double>(epoch / decay_every));

    Rng shuffle_rng(mix_seed(cfg.seed, 1 + epoch));
    for (std::size_t i = n; i-- > 1;) {
      std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t row = order[i];
        auto [loss, g] = sample_gradients(result.model, sample_inputs(data, row),
                                          data.labels[row], reg_weight, cfg.kind);
        epoch_loss += loss;
        for (std::size_t j = 0; j < total_params; ++j) grad[j] += g[j];
      }
      const double inv_batch = 1.0 / static_cast<double>(stop - start);

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      std::size_t j = 0;
      for (std::vector<double>* params : slots) {
        for (double& p : *params) {
          const double g = grad[j] * inv_batch;
          m_state[j] = cfg.beta1 * m_state[j] + (1.0 - cfg.beta1) * g;
          v_state[j] = cfg.beta2 * v_state[j] + (1.0 - cfg.beta2) * g * g;
          const double m_hat = m_state[j] / bc1;
          const double v_hat = v_state[j] / bc2;
          p -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p);
          ++j;
        }
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

Prediction predict_with_uncertainty(const MultiViewModel& model,
                                    const std::vector<std::vector<double>>& inputs) {
  MultiViewModel::Trace trace = model.forward(inputs);

  std::vector<Opinion> ops;
  ops.reserve(trace.views.size() + 1);
  for (const EvidenceNet::Trace& t : trace.views) ops.push_back(opinion_from_evidence(t.evidence));

  Prediction pred{ops, std::nullopt, Opinion::vacuous(model.num_classes()), 0};
  if (trace.pseudo) {
    pred.pseudo_opinion = opinion_from_evidence(trace.pseudo->evidence);
    ops.push_back(*pred.pseudo_opinion);
  }
  pred.fused = combine_all(ops);
  pred.predicted = argmax_lowest(pred.fused.beliefs);
  return pred;
}

Metrics metrics_from_predictions(const std::vector<std::size_t>& predicted,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes,
                                 const std::vector<double>& uncertainties) {
  if (predicted.size() != labels.size()) {
    throw DimensionError("metrics: predictions and labels differ in length");
  }
  if (predicted.empty()) throw ArgumentError("metrics: need at least one prediction");
  if (!uncertainties.empty() && uncertainties.size() != predicted.size()) {
    throw DimensionError("metrics: uncertainty list length does not match predictions");
  }

  Metrics m;
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] >= num_classes || labels[i] >= num_classes) {
      throw ArgumentError("metrics: class id out of range at row " + std::to_string(i + 1));
    }
    m.confusion[labels[i]][predicted[i]] += 1;
    hits += predicted[i] == labels[i];
  }
  m.accuracy = static_cast<double>(hits) / static_cast<double>(predicted.size());
  m.fused_accuracy = m.accuracy;

  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t tp = m.confusion[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < num_classes; ++o) {
      if (o == c) continue;
      fp += m.confusion[o][c];
      fn += m.confusion[c][o];
    }
    // Empty denominators count the class at zero rather than dropping it.
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.macro_precision += p;
    m.macro_recall += r;
    m.macro_f1 += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  m.macro_precision /= static_cast<double>(num_classes);
  m.macro_recall /= static_cast<double>(num_classes);
  m.macro_f1 /= static_cast<double>(num_classes);

  m.clustering_accuracy = clustering_accuracy(predicted, labels);
  if (!uncertainties.empty()) {
    double sum = 0.0;
    for (double u : uncertainties) sum += u;
    m.mean_fused_uncertainty = sum / static_cast<double>(uncertainties.size());
  }
  return m;
}

Metrics evaluate(const MultiViewModel& model, const MultiViewDataset& data) {
  data.validate();
  if (data.num_views() != model.num_views()) {
    throw DimensionError("evaluate: dataset has " + std::to_string(data.num_views()) +
                         " views, model expects " + std::to_string(model.num_views()));
  }

  std::vector<std::size_t> predicted(data.size());
  std::vector<double> uncertainties(data.size());
  std::vector<std::size_t> view_hits(model.num_views(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    Prediction p = predict_with_uncertainty(model, sample_inputs(data, i));
    predicted[i] = p.predicted;
    uncertainties[i] = p.fused.uncertainty;
    for (std::size_t v = 0; v < p.view_opinions.size(); ++v) {
      view_hits[v] += argmax_lowest(p.view_opinions[v].beliefs) == data.labels[i];
    }
  }

  Metrics m = metrics_from_predictions(predicted, data.labels, data.num_classes, uncertainties);
  m.view_accuracy.resize(model.num_views());
  for (std::size_t v = 0; v < view_hits.size(); ++v) {
    m.view_accuracy[v] = static_cast<double>(view_hits[v]) / static_cast<double>(data.size());
  }
  return m;
}

namespace {

// Hungarian assignment with potentials; maximizes the total weight of a
// perfect matching on a square matrix.
double max_assignment_total(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += w[match[j] - 1][j - 1];
  return total;
}

std::vector<std::size_t> dense_remap(const std::vector<std::size_t>& ids, const char* side) {
  std::map<std::size_t, std::size_t> seen;
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = seen.emplace(ids[i], seen.size()).first->second;
  }
  if (seen.size() > 20) {
    throw ArgumentError(std::string("clustering_accuracy: more than 20 distinct ") + side +
                        " ids");
  }
  return out;
}

}  // namespace

double clustering_accuracy(const std::vector<std::size_t>& predicted,
                           const std::vector<std::size_t>& labels) {
  if (predicted.size() != labels.size()) {
    throw DimensionError("clustering_accuracy: predictions and labels differ in length");
  }
  if (predicted.empty()) throw ArgumentError("clustering_accuracy: need at least one sample");

  const std::vector<std::size_t> p = dense_remap(predicted, "predicted");
  const std::vector<std::size_t> l = dense_remap(labels, "label");
  std::size_t dp = 0, dl = 0;
  for (std::size_t v : p) dp = std::max(dp, v + 1);
  for (std::size_t v : l) dl = std::max(dl, v + 1);
  const std::size_t n = std::max(dp, dl);

  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) counts[p[i]][l[i]] += 1.0;
  return max_assignment_total(counts) / static_cast<double>(p.size());
}

}  // namespace emvc
