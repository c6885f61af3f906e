#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

namespace emvc {

// Fully connected net shape: ReLU hidden layers, then a softplus head that
// emits nonnegative evidence, one value per class.
struct MlpConfig {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::vector<std::size_t> hidden;

  std::size_t param_count() const;
  // Width of the representation fed to the evidence head.
  std::size_t feature_dim() const { return hidden.empty() ? input_dim : hidden.back(); }
  void validate() const;
};

void to_json(nlohmann::json& j, const MlpConfig& c);
void from_json(const nlohmann::json& j, MlpConfig& c);

class EvidenceNet {
 public:
  explicit EvidenceNet(MlpConfig config);

  const MlpConfig& config() const { return config_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // He-normal weights (zero biases). Freshly constructed nets are all-zero,
  // which makes the head emit ln 2 per class.
  void init_params(std::uint64_t seed);

  // Everything backward() needs: act[0] is the input, act[l] for l >= 1 the
  // output of hidden layer l, pre[l] the pre-activation of layer l (the last
  // entry belongs to the head).
  struct Trace {
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> pre;
    std::vector<double> evidence;
  };

  Trace forward(const std::vector<double>& x) const;
  std::vector<double> evidence(const std::vector<double>& x) const {
    return forward(x).evidence;
  }
  // Representation consumed by the head (the input when there are no hidden
  // layers); this is what a pseudo view reads from each view net.
  const std::vector<double>& features(const Trace& t) const { return t.act.back(); }

  struct Grads {
    std::vector<double> params;
    std::vector<double> input;
  };

  // Reverse pass. g_evidence is the adjoint of the head output; g_features,
  // when given, is an extra adjoint on features(t) from a downstream consumer.
  Grads backward(const Trace& t, const std::vector<double>& g_evidence,
                 const std::vector<double>* g_features = nullptr) const;

 private:
  struct LayerDims {
    std::size_t in, out, weight_offset, bias_offset;
  };

  MlpConfig config_;
  std::vector<LayerDims> layers_;
  std::vector<double> params_;
};

// Per-view evidence nets plus an optional pseudo view whose input is the
// concatenation of the view nets' feature vectors. Gradients reaching the
// pseudo input flow back into the view nets.
class MultiViewModel {
 public:
  MultiViewModel(std::vector<MlpConfig> view_configs, std::vector<std::size_t> pseudo_hidden,
                 bool use_pseudo);

  std::size_t num_views() const { return views_.size(); }
  std::size_t num_classes() const { return views_.front().config().num_classes; }
  bool has_pseudo() const { return pseudo_.has_value(); }

  std::vector<EvidenceNet>& view_nets() { return views_; }
  const std::vector<EvidenceNet>& view_nets() const { return views_; }
  EvidenceNet* pseudo_net() { return pseudo_ ? &*pseudo_ : nullptr; }
  const EvidenceNet* pseudo_net() const { return pseudo_ ? &*pseudo_ : nullptr; }

  void init_params(std::uint64_t seed);

  struct Trace {
    std::vector<EvidenceNet::Trace> views;
    std::optional<EvidenceNet::Trace> pseudo;
  };

  Trace forward(const std::vector<std::vector<double>>& inputs) const;

  struct Grads {
    std::vector<std::vector<double>> views;
    std::vector<double> pseudo;  // empty when the pseudo view is disabled
  };

  // g_view_evidence must have one adjoint per view; g_pseudo_evidence may be
  // null (treated as zero) even when the pseudo view exists.
  Grads backward(const Trace& t, const std::vector<std::vector<double>>& g_view_evidence,
                 const std::vector<double>* g_pseudo_evidence = nullptr) const;

  nlohmann::json checkpoint() const;
  static MultiViewModel from_checkpoint(const nlohmann::json& j);

 private:
  std::vector<EvidenceNet> views_;
  std::optional<EvidenceNet> pseudo_;
};

}  // namespace emvc
