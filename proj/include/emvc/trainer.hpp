#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "emvc/data.hpp"
#include "emvc/loss.hpp"
#include "emvc/network.hpp"
#include "emvc/opinion.hpp"

namespace emvc {

// Hidden-layer widths for the view nets (shared shape) and the pseudo view.
struct ArchSpec {
  std::vector<std::size_t> hidden = {16};
  std::vector<std::size_t> pseudo_hidden = {16};
  bool use_pseudo = true;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-2;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  DivergenceKind kind = DivergenceKind::holder(1.7);
  AnnealSchedule anneal;
  // Halving-style step schedule; 0 picks epochs / 2 as the period.
  std::size_t lr_decay_every = 0;
  double lr_decay_factor = 0.5;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MultiViewModel model;
  std::vector<double> epoch_losses;  // mean per-sample objective, one per epoch
};

// Minibatch AdamW on the full objective. Deterministic for a fixed seed:
// initialization and every epoch's shuffle derive their streams from it.
TrainResult train(const MultiViewDataset& data, const ArchSpec& arch, const TrainConfig& cfg);

// Objective value and parameter gradient for one labelled sample, gradients
// laid out as [view 0 params, view 1 params, ..., pseudo params].
std::pair<double, std::vector<double>> sample_gradients(
    const MultiViewModel& model, const std::vector<std::vector<double>>& inputs,
    std::size_t label, double reg_weight, const DivergenceKind& kind);

struct Prediction {
  std::vector<Opinion> view_opinions;
  std::optional<Opinion> pseudo_opinion;
  Opinion fused;
  std::size_t predicted;  // argmax of fused beliefs, ties to the lowest index
};

Prediction predict_with_uncertainty(const MultiViewModel& model,
                                    const std::vector<std::vector<double>>& inputs);

struct Metrics {
  double accuracy = 0.0;
  double fused_accuracy = 0.0;  // the same number under its explicit name
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double clustering_accuracy = 0.0;
  double mean_fused_uncertainty = 0.0;
  std::vector<double> view_accuracy;                // per view, from its own opinion
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

// Label metrics only; uncertainties may be empty. view_accuracy stays empty.
Metrics metrics_from_predictions(const std::vector<std::size_t>& predicted,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes,
                                 const std::vector<double>& uncertainties);

Metrics evaluate(const MultiViewModel& model, const MultiViewDataset& data);

// Fraction of samples kept by the best one-to-one matching of predicted
// clusters to labels (Hungarian assignment on the contingency table). Both
// sides may use arbitrary ids; at most 20 distinct values each.
double clustering_accuracy(const std::vector<std::size_t>& predicted,
                           const std::vector<std::size_t>& labels);

}  // namespace emvc
