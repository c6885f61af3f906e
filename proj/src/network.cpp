#include "emvc/network.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "emvc/errors.hpp"
#include "emvc/rng.hpp"

namespace emvc {
namespace {

// softplus and its derivative, stable on both tails
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double t = std::exp(z);
  return t / (1.0 + t);
}

}  // namespace

std::size_t MlpConfig::param_count() const {
  std::size_t n = 0, in = input_dim;
  for (std::size_t h : hidden) {
    n += in * h + h;
    in = h;
  }
  return n + in * num_classes + num_classes;
}

void MlpConfig::validate() const {
  if (input_dim == 0) throw ArgumentError("MlpConfig: input_dim must be positive");
  if (num_classes < 2) {
    throw ArgumentError("MlpConfig: need at least 2 classes, got " +
                        std::to_string(num_classes));
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ArgumentError("MlpConfig: hidden layer width must be positive");
  }
}

void to_json(nlohmann::json& j, const MlpConfig& c) {
  j = nlohmann::json{
      {"input_dim", c.input_dim}, {"num_classes", c.num_classes}, {"hidden", c.hidden}};
}

void from_json(const nlohmann::json& j, MlpConfig& c) {
  j.at("input_dim").get_to(c.input_dim);
  j.at("num_classes").get_to(c.num_classes);
  j.at("hidden").get_to(c.hidden);
}

EvidenceNet::EvidenceNet(MlpConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t offset = 0, in = config_.input_dim;
  for (std::size_t l = 0; l <= config_.hidden.size(); ++l) {
    const std::size_t out = l < config_.hidden.size() ? config_.hidden[l] : config_.num_classes;
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  }
  params_.assign(offset, 0.0);
}

void EvidenceNet::init_params(std::uint64_t seed) {
  Rng rng(seed);
  for (const LayerDims& l : layers_) {
    const double scale = std::sqrt(2.0 / static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.in * l.out; ++i) {
      params_[l.weight_offset + i] = scale * rng.normal();
    }
    for (std::size_t i = 0; i < l.out; ++i) params_[l.bias_offset + i] = 0.0;
  }
}

EvidenceNet::Trace EvidenceNet::forward(const std::vector<double>& x) const {
  if (x.size() != config_.input_dim) {
    throw DimensionError("EvidenceNet::forward: expected input of size " +
                         std::to_string(config_.input_dim) + ", got " +
                         std::to_string(x.size()));
  }
  Trace t;
  t.act.push_back(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerDims& d = layers_[l];
    const std::vector<double>& a = t.act.back();
    std::vector<double> z(d.out);
    for (std::size_t j = 0; j < d.out; ++j) {
      double s = params_[d.bias_offset + j];
      const double* w = &params_[d.weight_offset + j * d.in];
      for (std::size_t i = 0; i < d.in; ++i) s += w[i] * a[i];
      z[j] = s;
    }
    if (l + 1 < layers_.size()) {
      std::vector<double> h(d.out);
      for (std::size_t j = 0; j < d.out; ++j) h[j] = std::max(z[j], 0.0);
      t.act.push_back(std::move(h));
    } else {
      t.evidence.resize(d.out);
      for (std::size_t j = 0; j < d.out; ++j) t.evidence[j] = softplus(z[j]);
    }
    t.pre.push_back(std::move(z));
  }
  return t;
}

EvidenceNet::Grads EvidenceNet::backward(const Trace& t, const std::vector<double>& g_evidence,
                                         const std::vector<double>* g_features) const {
  if (t.act.size() != layers_.size() || t.pre.size() != layers_.size()) {
    throw ContractError("EvidenceNet::backward: trace does not match this net");
  }
  if (g_evidence.size() != config_.num_classes) {
    throw DimensionError("EvidenceNet::backward: evidence adjoint has size " +
                         std::to_string(g_evidence.size()) + ", expected " +
                         std::to_string(config_.num_classes));
  }
  if (g_features != nullptr && g_features->size() != config_.feature_dim()) {
    throw DimensionError("EvidenceNet::backward: feature adjoint has size " +
                         std::to_string(g_features->size()) + ", expected " +
                         std::to_string(config_.feature_dim()));
  }

  Grads g;
  g.params.assign(params_.size(), 0.0);

  // Head first: d softplus = sigmoid.
  std::vector<double> g_z(config_.num_classes);
  for (std::size_t j = 0; j < g_z.size(); ++j) {
    g_z[j] = g_evidence[j] * sigmoid(t.pre.back()[j]);
  }

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerDims& d = layers_[l];
    const std::vector<double>& a = t.act[l];
    std::vector<double> g_a(d.in, 0.0);
    for (std::size_t j = 0; j < d.out; ++j) {
      const double gz = g_z[j];
      double* gw = &g.params[d.weight_offset + j * d.in];
      const double* w = &params_[d.weight_offset + j * d.in];
      for (std::size_t i = 0; i < d.in; ++i) {
        gw[i] += gz * a[i];
        g_a[i] += w[i] * gz;
      }
      g.params[d.bias_offset + j] += gz;
    }
    if (l == layers_.size() - 1 && g_features != nullptr) {
      for (std::size_t i = 0; i < d.in; ++i) g_a[i] += (*g_features)[i];
    }
    if (l == 0) {
      g.input = std::move(g_a);
    } else {
      // ReLU gate; the kink at exactly 0 is assigned slope 0.
      g_z.resize(d.in);
      for (std::size_t i = 0; i < d.in; ++i) {
        g_z[i] = t.pre[l - 1][i] > 0.0 ? g_a[i] : 0.0;
      }
    }
  }
  return g;
}

MultiViewModel::MultiViewModel(std::vector<MlpConfig> view_configs,
                               std::vector<std::size_t> pseudo_hidden, bool use_pseudo) {
  if (view_configs.empty()) {
    throw ArgumentError("MultiViewModel: need at least one view");
  }
  const std::size_t k = view_configs.front().num_classes;
  std::size_t feature_total = 0;
  for (const MlpConfig& c : view_configs) {
    if (c.num_classes != k) {
      throw DimensionError("MultiViewModel: views disagree on the number of classes");
    }
    views_.emplace_back(c);
    feature_total += c.feature_dim();
  }
  if (use_pseudo) {
    pseudo_.emplace(MlpConfig{feature_total, k, std::move(pseudo_hidden)});
  }
}

void MultiViewModel::init_params(std::uint64_t seed) {
  for (std::size_t v = 0; v < views_.size(); ++v) {
    views_[v].init_params(mix_seed(seed, v));
  }
  if (pseudo_) pseudo_->init_params(mix_seed(seed, views_.size()));
}

MultiViewModel::Trace MultiViewModel::forward(
    const std::vector<std::vector<double>>& inputs) const {
  if (inputs.size() != views_.size()) {
    throw DimensionError("MultiViewModel::forward: got " + std::to_string(inputs.size()) +
                         " views, model has " + std::to_string(views_.size()));
  }
  Trace t;
  for (std::size_t v = 0; v < views_.size(); ++v) {
    t.views.push_back(views_[v].forward(inputs[v]));
  }
  if (pseudo_) {
    std::vector<double> joint;
    for (std::size_t v = 0; v < views_.size(); ++v) {
      const std::vector<double>& f = views_[v].features(t.views[v]);
      joint.insert(joint.end(), f.begin(), f.end());
    }
    t.pseudo = pseudo_->forward(joint);
  }
  return t;
}

MultiViewModel::Grads MultiViewModel::backward(
    const Trace& t, const std::vector<std::vector<double>>& g_view_evidence,
    const std::vector<double>* g_pseudo_evidence) const {
  if (t.views.size() != views_.size() || t.pseudo.has_value() != pseudo_.has_value()) {
    throw ContractError("MultiViewModel::backward: trace does not match this model");
  }
  if (g_view_evidence.size() != views_.size()) {
    throw DimensionError("MultiViewModel::backward: need one evidence adjoint per view");
  }

  Grads g;
  std::vector<double> g_joint;
  if (pseudo_) {
    std::vector<double> g_pe =
        g_pseudo_evidence ? *g_pseudo_evidence : std::vector<double>(num_classes(), 0.0);
    EvidenceNet::Grads pg = pseudo_->backward(*t.pseudo, g_pe);
    g.pseudo = std::move(pg.params);
    g_joint = std::move(pg.input);
  }

  std::size_t offset = 0;
  for (std::size_t v = 0; v < views_.size(); ++v) {
    const std::size_t fd = views_[v].config().feature_dim();
    if (pseudo_) {
      std::vector<double> g_feat(g_joint.begin() + offset, g_joint.begin() + offset + fd);
      offset += fd;
      g.views.push_back(views_[v].backward(t.views[v], g_view_evidence[v], &g_feat).params);
    } else {
      g.views.push_back(views_[v].backward(t.views[v], g_view_evidence[v]).params);
    }
  }
  return g;
}

nlohmann::json MultiViewModel::checkpoint() const {
  nlohmann::json j;
  j["views"] = nlohmann::json::array();
  for (const EvidenceNet& net : views_) {
    j["views"].push_back({{"config", net.config()}, {"params", net.params()}});
  }
  if (pseudo_) {
    j["pseudo"] = {{"config", pseudo_->config()}, {"params", pseudo_->params()}};
  } else {
    j["pseudo"] = nullptr;
  }
  return j;
}

MultiViewModel MultiViewModel::from_checkpoint(const nlohmann::json& j) {
  try {
    std::vector<MlpConfig> configs;
    for (const nlohmann::json& v : j.at("views")) {
      configs.push_back(v.at("config").get<MlpConfig>());
    }
    const bool use_pseudo = !j.at("pseudo").is_null();
    std::vector<std::size_t> pseudo_hidden;
    if (use_pseudo) {
      pseudo_hidden = j.at("pseudo").at("config").at("hidden").get<std::vector<std::size_t>>();
    }
    MultiViewModel model(std::move(configs), std::move(pseudo_hidden), use_pseudo);

    for (std::size_t v = 0; v < model.views_.size(); ++v) {
      auto p = j.at("views")[v].at("params").get<std::vector<double>>();
      if (p.size() != model.views_[v].params().size()) {
        throw DataError("checkpoint: view " + std::to_string(v) + " has " +
                        std::to_string(p.size()) + " parameters, expected " +
                        std::to_string(model.views_[v].params().size()));
      }
      model.views_[v].params() = std::move(p);
    }
    if (use_pseudo) {
      auto p = j.at("pseudo").at("params").get<std::vector<double>>();
      if (p.size() != model.pseudo_->params().size()) {
        throw DataError("checkpoint: pseudo view has " + std::to_string(p.size()) +
                        " parameters, expected " +
                        std::to_string(model.pseudo_->params().size()));
      }
      model.pseudo_->params() = std::move(p);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

}  // namespace emvc
