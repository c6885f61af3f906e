#include "emvc/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "emvc/data.hpp"
#include "emvc/dirichlet.hpp"
#include "emvc/errors.hpp"
#include "emvc/network.hpp"
#include "emvc/opinion.hpp"
#include "emvc/oracle.hpp"
#include "emvc/rng.hpp"
#include "emvc/trainer.hpp"

namespace emvc {
namespace {

using nlohmann::json;

// Bad invocation (unknown flag, malformed value, missing requirement); exits 2
// where library failures exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kCommonKeys = {"config", "json-errors", "seed"};
const std::set<std::string> kBoolKeys = {"json-errors", "validate", "no-pseudo"};

const std::map<std::string, std::set<std::string>> kCommands = {
    {"gen-data",
     {"out", "classes", "per-class", "view-dims", "spread", "center-scale", "class-groups",
      "test-fraction", "split-seed"}},
    {"train",
     {"data", "out", "epochs", "batch", "lr", "weight-decay", "divergence", "gamma", "t-anneal",
      "hidden", "pseudo-hidden", "no-pseudo", "test-fraction", "lr-decay-every",
      "lr-decay-factor"}},
    {"eval", {"data", "model", "noise-sigma", "noise-view", "noise-seed"}},
    {"divergence", {"p", "q", "kind", "gamma", "samples", "oracle", "validate"}},
    {"fuse", {"opinions", "evidence"}},
    {"sweep-noise", {"data", "model", "variances", "view", "noise-seed"}},
    {"sweep-gamma",
     {"data", "gammas", "epochs", "batch", "lr", "weight-decay", "t-anneal", "hidden",
      "pseudo-hidden", "no-pseudo", "test-fraction", "lr-decay-every", "lr-decay-factor"}},
};

const char kUsage[] = R"(usage: emvc <command> [--flag value ...]

commands:
  gen-data     write a synthetic multi-view dataset (--out DIR; --classes,
               --per-class, --view-dims 4,4, --spread, --center-scale,
               --class-groups 0,1,1;0,0,1, --test-fraction, --split-seed)
  train        fit the evidential model (--data MANIFEST; --out MODEL.json,
               --epochs, --batch, --lr, --weight-decay, --divergence
               holder|kl|cauchy-schwarz, --gamma, --t-anneal, --hidden 16,8,
               --pseudo-hidden, --no-pseudo, --test-fraction,
               --lr-decay-every, --lr-decay-factor)
  eval         score a saved model (--data MANIFEST --model MODEL.json;
               --noise-sigma, --noise-view, --noise-seed)
  divergence   closed-form divergence between two Dirichlets with an
               independent numerical cross-check (--p 2,3 --q 4,1; --kind
               holder|kl|cauchy-schwarz|js, --gamma, --samples, --oracle
               auto|quadrature|mc|none, --validate)
  fuse         combine opinions (--opinions JSON | --evidence 1,2;3,4)
  sweep-noise  evaluate one model across feature-noise variances (--data
               --model; --variances 0,0.01, --view, --noise-seed)
  sweep-gamma  retrain across Hoelder exponents (--data; --gammas 1.2,1.7,
               plus the train flags)

common flags: --config FILE (JSON defaults, explicit flags win),
              --seed N (or the EMVC_SEED environment variable),
              --json-errors (machine-readable errors on stderr)
)";

// ---- flag access -----------------------------------------------------------

struct Args {
  json v;

  bool has(const std::string& k) const { return v.contains(k); }
  bool flag(const std::string& k) const { return v.contains(k) && v[k].is_boolean() && v[k]; }

  double number(const std::string& k) const {
    if (!has(k)) throw UsageError("missing required flag --" + k);
    return to_number(k);
  }
  double number(const std::string& k, double fallback) const {
    return has(k) ? to_number(k) : fallback;
  }

  std::size_t count(const std::string& k, std::size_t fallback) const {
    if (!has(k)) return fallback;
    const double d = to_number(k);
    if (d < 0.0 || d != std::floor(d)) {
      throw UsageError("--" + k + " expects a nonnegative integer");
    }
    return static_cast<std::size_t>(d);
  }

  std::string str(const std::string& k) const {
    if (!has(k)) throw UsageError("missing required flag --" + k);
    return str(k, "");
  }
  std::string str(const std::string& k, const std::string& fallback) const {
    if (!has(k)) return fallback;
    if (!v[k].is_string()) throw UsageError("--" + k + " expects a string");
    return v[k].get<std::string>();
  }

  std::vector<double> numbers(const std::string& k) const {
    if (!has(k)) throw UsageError("missing required flag --" + k);
    return numbers(k, {});
  }
  std::vector<double> numbers(const std::string& k, std::vector<double> fallback) const {
    if (!has(k)) return fallback;
    std::vector<double> out;
    if (v[k].is_array()) {
      for (const json& e : v[k]) {
        if (!e.is_number()) throw UsageError("--" + k + " expects numbers");
        out.push_back(e.get<double>());
      }
      return out;
    }
    for (const std::string& tok : split(text_of(k), ',')) out.push_back(parse_num(tok, k));
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& k, std::vector<std::size_t> fallback) const {
    if (!has(k)) return fallback;
    std::vector<std::size_t> out;
    for (double d : numbers(k, {})) {
      if (d < 0.0 || d != std::floor(d)) {
        throw UsageError("--" + k + " expects nonnegative integers");
      }
      out.push_back(static_cast<std::size_t>(d));
    }
    return out;
  }

  // "0,1,1;0,0,1" or a JSON array of arrays.
  std::vector<std::vector<std::size_t>> groups(const std::string& k) const {
    std::vector<std::vector<std::size_t>> out;
    if (!has(k)) return out;
    if (v[k].is_array()) {
      for (const json& row : v[k]) {
        std::vector<std::size_t> ids;
        for (const json& e : row) ids.push_back(e.get<std::size_t>());
        out.push_back(std::move(ids));
      }
      return out;
    }
    for (const std::string& part : split(text_of(k), ';')) {
      std::vector<std::size_t> ids;
      for (const std::string& tok : split(part, ',')) {
        const double d = parse_num(tok, k);
        if (d < 0.0 || d != std::floor(d)) {
          throw UsageError("--" + k + " expects nonnegative integers");
        }
        ids.push_back(static_cast<std::size_t>(d));
      }
      out.push_back(std::move(ids));
    }
    return out;
  }

  std::uint64_t seed_or(std::uint64_t fallback) const {
    if (!has("seed")) return fallback;
    if (v["seed"].is_number_unsigned()) return v["seed"].get<std::uint64_t>();
    const std::string s = text_of("seed");
    char* end = nullptr;
    const std::uint64_t val = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw UsageError("--seed expects an integer");
    return val;
  }

 private:
  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
  }

  static double parse_num(const std::string& s, const std::string& k) {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(d)) {
      throw UsageError("--" + k + ": '" + s + "' is not a number");
    }
    return d;
  }

  std::string text_of(const std::string& k) const {
    return v[k].is_string() ? v[k].get<std::string>() : v[k].dump();
  }

  double to_number(const std::string& k) const {
    if (v[k].is_number()) return v[k].get<double>();
    if (v[k].is_string()) return parse_num(v[k].get<std::string>(), k);
    throw UsageError("--" + k + " expects a number");
  }
};

// ---- shared pieces ---------------------------------------------------------

std::uint64_t resolve_seed(const Args& a) {
  if (a.has("seed")) return a.seed_or(0);
  if (const char* env = std::getenv("EMVC_SEED")) {
    char* end = nullptr;
    const std::uint64_t val = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw UsageError("EMVC_SEED is not an integer: '" + std::string(env) + "'");
    }
    return val;
  }
  return 0;
}

DivergenceKind parse_kind(const Args& a, const std::string& key, bool allow_js,
                          std::uint64_t seed) {
  const std::string name = a.str(key, "holder");
  if (name == "holder") return DivergenceKind::holder(a.number("gamma", 1.7));
  if (name == "kl") return DivergenceKind::kl();
  if (name == "cauchy-schwarz" || name == "cs") return DivergenceKind::cauchy_schwarz();
  if (name == "js" || name == "jensen-shannon") {
    if (!allow_js) {
      throw UsageError("--" + key + ": jensen-shannon is estimate-only and cannot train");
    }
    return DivergenceKind::jensen_shannon_mc(a.count("samples", 200000), seed);
  }
  throw UsageError("--" + key + ": unknown divergence '" + name + "'");
}

json kind_json(const DivergenceKind& kind) {
  switch (kind.tag) {
    case DivergenceKind::Tag::holder:
      return {{"kind", "holder"}, {"gamma", kind.gamma}};
    case DivergenceKind::Tag::kl:
      return {{"kind", "kl"}};
    case DivergenceKind::Tag::cauchy_schwarz:
      return {{"kind", "cauchy-schwarz"}, {"gamma", 2.0}};
    case DivergenceKind::Tag::jensen_shannon_mc:
      return {{"kind", "jensen-shannon-mc"}, {"samples", kind.sample_count}};
  }
  return {};
}

json metrics_json(const Metrics& m) {
  json j{{"accuracy", m.accuracy},
         {"fused_accuracy", m.fused_accuracy},
         {"macro_precision", m.macro_precision},
         {"macro_recall", m.macro_recall},
         {"macro_f1", m.macro_f1},
         {"clustering_accuracy", m.clustering_accuracy},
         {"mean_fused_uncertainty", m.mean_fused_uncertainty},
         {"confusion", m.confusion}};
  if (!m.view_accuracy.empty()) j["view_accuracy"] = m.view_accuracy;
  return j;
}

MultiViewModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model file not found or unreadable: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model file is not valid JSON: " + std::string(e.what()));
  }
  return MultiViewModel::from_checkpoint(j);
}

DirichletParams dirichlet_arg(const Args& a, const std::string& key) {
  return DirichletParams(a.numbers(key));
}

TrainConfig train_config(const Args& a, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = a.count("epochs", cfg.epochs);
  cfg.batch_size = a.count("batch", cfg.batch_size);
  cfg.learning_rate = a.number("lr", cfg.learning_rate);
  cfg.weight_decay = a.number("weight-decay", cfg.weight_decay);
  cfg.anneal.t_anneal = a.number("t-anneal", cfg.anneal.t_anneal);
  cfg.lr_decay_every = a.count("lr-decay-every", cfg.lr_decay_every);
  cfg.lr_decay_factor = a.number("lr-decay-factor", cfg.lr_decay_factor);
  cfg.seed = seed;
  return cfg;
}

ArchSpec arch_spec(const Args& a) {
  ArchSpec arch;
  arch.hidden = a.sizes("hidden", arch.hidden);
  arch.pseudo_hidden = a.sizes("pseudo-hidden", arch.pseudo_hidden);
  arch.use_pseudo = !a.flag("no-pseudo");
  return arch;
}

// Shared by train and sweep-gamma: optional stratified split, training, and
// evaluation on the held-out side (or the training data when not splitting).
struct FitResult {
  TrainResult result;
  Metrics metrics;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

FitResult fit_and_score(const MultiViewDataset& data, const ArchSpec& arch,
                        const TrainConfig& cfg, double test_fraction) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw UsageError("--test-fraction must lie in [0, 1)");
  }
  if (test_fraction > 0.0) {
    SplitResult split = stratified_split(data, test_fraction, mix_seed(cfg.seed, 0x517));
    TrainResult r = train(split.train, arch, cfg);
    Metrics m = evaluate(r.model, split.test);
    return {std::move(r), std::move(m), split.train.size(), split.test.size()};
  }
  TrainResult r = train(data, arch, cfg);
  Metrics m = evaluate(r.model, data);
  return {std::move(r), std::move(m), data.size(), 0};
}

// ---- commands --------------------------------------------------------------

int cmd_gen_data(const Args& a, std::ostream& out) {
  SyntheticSpec spec;
  spec.num_classes = a.count("classes", spec.num_classes);
  spec.samples_per_class = a.count("per-class", spec.samples_per_class);
  spec.view_dims = a.sizes("view-dims", spec.view_dims);
  spec.cluster_spread = a.number("spread", spec.cluster_spread);
  spec.center_scale = a.number("center-scale", spec.center_scale);
  spec.class_groups = a.groups("class-groups");

  const std::string dir = a.str("out");
  const std::uint64_t seed = resolve_seed(a);
  MultiViewDataset data = generate_synthetic(spec, seed);

  json report{{"samples", data.size()},
              {"views", data.num_views()},
              {"classes", data.num_classes},
              {"seed", seed}};
  const double fraction = a.number("test-fraction", 0.0);
  if (fraction > 0.0) {
    SplitResult split =
        stratified_split(data, fraction, a.count("split-seed", mix_seed(seed, 0x517)));
    report["train_manifest"] = save_dataset(split.train, dir + "/train");
    report["test_manifest"] = save_dataset(split.test, dir + "/test");
    report["train_samples"] = split.train.size();
    report["test_samples"] = split.test.size();
  } else {
    report["manifest"] = save_dataset(data, dir);
  }
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_train(const Args& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a);
  TrainConfig cfg = train_config(a, seed);
  cfg.kind = parse_kind(a, "divergence", false, seed);
  MultiViewDataset data = load_manifest(a.str("data"));

  FitResult fit = fit_and_score(data, arch_spec(a), cfg, a.number("test-fraction", 0.0));

  json report{{"divergence", kind_json(cfg.kind)},
              {"epochs", cfg.epochs},
              {"seed", seed},
              {"train_samples", fit.train_samples},
              {"test_samples", fit.test_samples},
              {"first_loss", fit.result.epoch_losses.front()},
              {"final_loss", fit.result.epoch_losses.back()},
              {"epoch_losses", fit.result.epoch_losses},
              {"metrics", metrics_json(fit.metrics)}};
  if (a.has("out")) {
    const std::string path = a.str("out");
    std::ofstream file(path);
    file << fit.result.model.checkpoint().dump(2) << "\n";
    if (!file) throw DataError("failed to write model file: " + path);
    report["model"] = path;
  }
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_eval(const Args& a, std::ostream& out) {
  MultiViewDataset data = load_manifest(a.str("data"));
  MultiViewModel model = load_model(a.str("model"));

  const double sigma = a.number("noise-sigma", 0.0);
  json noise = nullptr;
  if (sigma > 0.0) {
    const std::size_t view = a.count("noise-view", data.num_views() - 1);
    if (view >= data.num_views()) {
      throw UsageError("--noise-view " + std::to_string(view) + " is out of range; dataset has " +
                       std::to_string(data.num_views()) + " views");
    }
    const auto noise_seed = static_cast<std::uint64_t>(a.count("noise-seed", 0));
    inject_noise(data.views[view], sigma, noise_seed);
    noise = json{{"sigma", sigma}, {"view", view}, {"seed", noise_seed}};
  }

  Metrics m = evaluate(model, data);
  json report{{"samples", data.size()}, {"noise", noise}, {"metrics", metrics_json(m)}};
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_divergence(const Args& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a);
  const DirichletParams p = dirichlet_arg(a, "p");
  const DirichletParams q = dirichlet_arg(a, "q");
  const DivergenceKind kind = parse_kind(a, "kind", true, seed);

  json report = kind_json(kind);
  report["p"] = p.concentration;
  report["q"] = q.concentration;

  if (kind.tag == DivergenceKind::Tag::jensen_shannon_mc) {
    if (a.flag("validate")) {
      throw UsageError("--validate needs a closed form; jensen-shannon has none");
    }
    McEstimate est = js_divergence_mc(p, q, kind.sample_count, kind.seed);
    report["value"] = est.value;
    report["std_error"] = est.std_error;
    report["oracle"] = nullptr;
    out << report.dump(2) << "\n";
    return 0;
  }

  const double closed = divergence(kind, p, q);
  report["value"] = closed;

  std::string oracle = a.str("oracle", "auto");
  if (oracle == "auto") oracle = p.order() <= 3 ? "quadrature" : "mc";
  if (a.flag("validate") && oracle == "none") {
    throw UsageError("--validate requires an oracle; drop --oracle none");
  }

  bool within = true;
  if (oracle == "none") {
    report["oracle"] = nullptr;
  } else {
    OracleMethod method;
    if (oracle == "quadrature") {
      method = OracleMethod::quadrature;
    } else if (oracle == "mc") {
      method = OracleMethod::monte_carlo;
    } else {
      throw UsageError("--oracle must be auto, quadrature, mc or none");
    }
    OracleEstimate est =
        kind.tag == DivergenceKind::Tag::kl
            ? oracle_kl(p, q, method, 0, mix_seed(seed, 17))
            : oracle_holder(p, q,
                            HolderExponent(kind.tag == DivergenceKind::Tag::cauchy_schwarz
                                               ? 2.0
                                               : kind.gamma),
                            method, 0, mix_seed(seed, 17));
    // Slack for the closed form's own rounding on top of the oracle's bound.
    const double tol = est.error_bound + 1e-7 * std::max(1.0, std::fabs(closed));
    within = std::fabs(closed - est.value) <= tol;
    report["oracle"] = {{"method", oracle == "mc" ? "monte-carlo" : "quadrature"},
                        {"value", est.value},
                        {"error_bound", est.error_bound},
                        {"points", est.points}};
    report["within_bound"] = within;
  }
  out << report.dump(2) << "\n";
  if (a.flag("validate") && !within) return 1;
  return 0;
}

int cmd_fuse(const Args& a, std::ostream& out) {
  if (a.has("opinions") == a.has("evidence")) {
    throw UsageError("fuse needs exactly one of --opinions or --evidence");
  }

  std::vector<Opinion> ops;
  if (a.has("opinions")) {
    json parsed;
    try {
      parsed = json::parse(a.str("opinions"));
    } catch (const json::exception& e) {
      throw UsageError("--opinions is not valid JSON: " + std::string(e.what()));
    }
    if (!parsed.is_array() || parsed.empty()) {
      throw UsageError("--opinions expects a non-empty JSON array of opinions");
    }
    for (const json& o : parsed) ops.push_back(o.get<Opinion>());
  } else {
    std::stringstream ss(a.str("evidence"));
    std::string part;
    while (std::getline(ss, part, ';')) {
      Args one{json{{"evidence", part}}};
      ops.push_back(opinion_from_evidence(one.numbers("evidence")));
    }
    if (ops.empty()) throw UsageError("--evidence expects vectors like '1,2;0,3'");
  }

  out << json(combine_all(ops)).dump(2) << "\n";
  return 0;
}

int cmd_sweep_noise(const Args& a, std::ostream& out) {
  MultiViewDataset clean = load_manifest(a.str("data"));
  MultiViewModel model = load_model(a.str("model"));
  const std::vector<double> variances = a.numbers("variances", {0.0, 0.01, 0.02, 0.05});
  const std::size_t view = a.count("view", clean.num_views() - 1);
  if (view >= clean.num_views()) {
    throw UsageError("--view " + std::to_string(view) + " is out of range; dataset has " +
                     std::to_string(clean.num_views()) + " views");
  }
  const auto noise_seed = static_cast<std::uint64_t>(a.count("noise-seed", resolve_seed(a)));

  // One fixed seed across the grid: each variance rescales the same unit
  // perturbations, so the sweep is not confounded by resampled noise.
  json rows = json::array();
  for (double variance : variances) {
    if (variance < 0.0) throw DomainError("sweep-noise: variances must be >= 0");
    MultiViewDataset noisy = clean;
    inject_noise(noisy.views[view], std::sqrt(variance), noise_seed);
    Metrics m = evaluate(model, noisy);
    rows.push_back({{"variance", variance},
                    {"sigma", std::sqrt(variance)},
                    {"accuracy", m.accuracy},
                    {"fused_accuracy", m.fused_accuracy},
                    {"macro_f1", m.macro_f1},
                    {"mean_fused_uncertainty", m.mean_fused_uncertainty}});
  }
  json report{{"view", view},
              {"noise_seed", noise_seed},
              {"samples", clean.size()},
              {"results", rows}};
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_sweep_gamma(const Args& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a);
  MultiViewDataset data = load_manifest(a.str("data"));
  const std::vector<double> gammas = a.numbers("gammas", {1.2, 1.5, 1.7, 1.9, 2.0});
  const ArchSpec arch = arch_spec(a);
  const double fraction = a.number("test-fraction", 0.0);

  json rows = json::array();
  for (double gamma : gammas) {
    TrainConfig cfg = train_config(a, seed);
    cfg.kind = DivergenceKind::holder(gamma);
    FitResult fit = fit_and_score(data, arch, cfg, fraction);
    rows.push_back({{"gamma", gamma},
                    {"first_loss", fit.result.epoch_losses.front()},
                    {"final_loss", fit.result.epoch_losses.back()},
                    {"loss_decreased",
                     fit.result.epoch_losses.back() < fit.result.epoch_losses.front()},
                    {"metrics", metrics_json(fit.metrics)}});
  }
  json report{{"seed", seed}, {"results", rows}};
  out << report.dump(2) << "\n";
  return 0;
}

// ---- parsing and dispatch --------------------------------------------------

json parse_flags(const std::vector<std::string>& args, const std::set<std::string>& allowed,
                 const std::string& command) {
  json v = json::object();
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (tok.rfind("--", 0) != 0 || tok.size() == 2) {
      throw UsageError("unexpected argument '" + tok + "'; flags look like --name value");
    }
    std::string key = tok.substr(2);
    std::string value;
    bool has_value = false;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
      has_value = true;
    }
    if (allowed.find(key) == allowed.end() && kCommonKeys.find(key) == kCommonKeys.end()) {
      throw UsageError("unknown flag --" + key + " for '" + command + "'");
    }
    if (kBoolKeys.count(key) != 0) {
      if (has_value && value != "true" && value != "false") {
        throw UsageError("--" + key + " is a switch; it takes no value");
      }
      v[key] = !has_value || value == "true";
      continue;
    }
    if (!has_value) {
      if (i + 1 >= args.size()) throw UsageError("--" + key + " needs a value");
      value = args[++i];
    }
    v[key] = value;
  }
  return v;
}

void merge_config(json& v, const std::set<std::string>& allowed, const std::string& command) {
  if (!v.contains("config")) return;
  const std::string path = v["config"].get<std::string>();
  std::ifstream in(path);
  if (!in) throw DataError("config file not found or unreadable: " + path);
  json file;
  try {
    in >> file;
  } catch (const json::exception& e) {
    throw DataError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!file.is_object()) throw DataError("config file must hold a JSON object: " + path);
  for (const auto& [key, val] : file.items()) {
    if (allowed.find(key) == allowed.end() && kCommonKeys.find(key) == kCommonKeys.end()) {
      throw UsageError("unknown key '" + key + "' in config for '" + command + "'");
    }
    // Explicit flags win over file defaults.
    if (!v.contains(key)) v[key] = val;
  }
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const StratificationError*>(&e)) return "stratification";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const ConflictError*>(&e)) return "conflict";
  if (dynamic_cast<const UnsupportedError*>(&e)) return "unsupported";
  if (dynamic_cast<const SingularityError*>(&e)) return "singularity";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  if (dynamic_cast<const ContractError*>(&e)) return "contract";
  return "internal";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // The flag must work even when parsing itself fails.
  bool json_errors = false;
  for (const std::string& a : args) {
    if (a == "--json-errors" || a == "--json-errors=true") json_errors = true;
  }

  auto report = [&](const char* kind, const std::string& detail, int code) {
    if (json_errors) {
      err << json{{"error", kind}, {"detail", detail}}.dump() << "\n";
    } else {
      err << "error (" << kind << "): " << detail << "\n";
    }
    return code;
  };

  if (args.empty()) {
    err << kUsage;
    return 2;
  }
  if (args[0] == "--help" || args[0] == "help") {
    out << kUsage;
    return 0;
  }

  const auto cmd = kCommands.find(args[0]);
  if (cmd == kCommands.end()) {
    return report("usage", "unknown command '" + args[0] + "'; see --help", 2);
  }

  try {
    json values = parse_flags(args, cmd->second, cmd->first);
    merge_config(values, cmd->second, cmd->first);
    Args a{std::move(values)};
    if (a.flag("json-errors")) json_errors = true;

    if (cmd->first == "gen-data") return cmd_gen_data(a, out);
    if (cmd->first == "train") return cmd_train(a, out);
    if (cmd->first == "eval") return cmd_eval(a, out);
    if (cmd->first == "divergence") return cmd_divergence(a, out);
    if (cmd->first == "fuse") return cmd_fuse(a, out);
    if (cmd->first == "sweep-noise") return cmd_sweep_noise(a, out);
    return cmd_sweep_gamma(a, out);
  } catch (const UsageError& e) {
    return report("usage", e.what(), 2);
  } catch (const nlohmann::json::exception& e) {
    return report("data", e.what(), 1);
  } catch (const std::exception& e) {
    return report(error_kind(e), e.what(), 1);
  }
}

}  // namespace emvc
