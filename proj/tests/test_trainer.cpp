#include "emvc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "emvc/errors.hpp"
#include "emvc/rng.hpp"
#include "support.hpp"

using namespace emvc;

namespace {

// Exhaustive counterpart of the Hungarian matching: try every one-to-one
// relabeling of predicted clusters. Only viable for a handful of classes.
double brute_clustering_accuracy(const std::vector<std::size_t>& pred,
                                 const std::vector<std::size_t>& lab) {
  auto remap = [](const std::vector<std::size_t>& ids) {
    std::map<std::size_t, std::size_t> seen;
    std::vector<std::size_t> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out[i] = seen.emplace(ids[i], seen.size()).first->second;
    }
    return std::pair{out, seen.size()};
  };
  auto [p, dp] = remap(pred);
  auto [l, dl] = remap(lab);
  const std::size_t n = std::max(dp, dl);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.size(); ++i) hits += perm[p[i]] == l[i];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(p.size());
}

MultiViewDataset complementary_views(std::size_t per_class, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.samples_per_class = per_class;
  spec.view_dims = {3, 3};
  spec.cluster_spread = 0.3;
  // Neither view separates all three classes on its own.
  spec.class_groups = {{0, 1, 1}, {0, 0, 1}};
  return generate_synthetic(spec, seed);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("clustering accuracy reference cases") {
  CHECK(clustering_accuracy({0, 0, 1, 1}, {1, 1, 0, 2}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(clustering_accuracy({0, 1, 2, 0}, {0, 1, 2, 0}) == 1.0);
  // Consistent relabeling costs nothing.
  CHECK(clustering_accuracy({2, 2, 0, 0}, {0, 0, 1, 1}) == 1.0);
  // Ids need not be dense.
  CHECK(clustering_accuracy({7, 7, 13, 13}, {1, 1, 0, 2}) ==
        doctest::Approx(0.75).epsilon(1e-12));

  CHECK_THROWS_AS(clustering_accuracy({0, 1}, {0}), DimensionError);
  CHECK_THROWS_AS(clustering_accuracy({}, {}), ArgumentError);
}

TEST_CASE("clustering accuracy agrees with exhaustive matching") {
  Rng rng(501);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng.uniform_int(30);
    const std::size_t dp = 2 + rng.uniform_int(5);
    const std::size_t dl = 2 + rng.uniform_int(5);
    std::vector<std::size_t> pred(n), lab(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng.uniform_int(dp);
      lab[i] = rng.uniform_int(dl);
    }
    CHECK(clustering_accuracy(pred, lab) ==
          doctest::Approx(brute_clustering_accuracy(pred, lab)).epsilon(1e-12));
  }
}

TEST_CASE("label metrics on a worked confusion table") {
  const std::vector<std::size_t> pred = {0, 0, 1, 2, 1, 2, 2};
  const std::vector<std::size_t> lab = {0, 1, 1, 2, 2, 0, 2};
  Metrics m = metrics_from_predictions(pred, lab, 3, {});

  CHECK(m.accuracy == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(m.fused_accuracy == m.accuracy);
  // Classes 0 and 1 score 1/2 on both axes, class 2 scores 2/3.
  CHECK(m.macro_precision == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(m.macro_recall == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(m.macro_f1 == doctest::Approx(5.0 / 9.0).epsilon(1e-12));

  REQUIRE(m.confusion.size() == 3);
  CHECK(m.confusion[0] == std::vector<std::size_t>{1, 0, 1});
  CHECK(m.confusion[1] == std::vector<std::size_t>{1, 1, 0});
  CHECK(m.confusion[2] == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("classes that never occur score zero instead of poisoning the mean") {
  Metrics m = metrics_from_predictions({0, 1}, {0, 1}, 3, {0.25, 0.75});
  CHECK(m.macro_precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.mean_fused_uncertainty == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(metrics_from_predictions({0, 3}, {0, 1}, 3, {}), ArgumentError);
  CHECK_THROWS_AS(metrics_from_predictions({0}, {0, 1}, 3, {}), DimensionError);
  CHECK_THROWS_AS(metrics_from_predictions({}, {}, 3, {}), ArgumentError);
}

TEST_CASE("an untrained model is maximally uncertain per view") {
  MultiViewModel model({MlpConfig{3, 3, {4}}, MlpConfig{2, 3, {}}}, {4}, true);
  // No init: every net is all-zero, so each view emits ln 2 per class.
  Prediction p = predict_with_uncertainty(model, {{0.3, -1.0, 2.0}, {1.0, 1.0}});
  const double want_u = 1.0 / (1.0 + std::log(2.0));
  for (const Opinion& o : p.view_opinions) {
    CHECK(o.uncertainty == doctest::Approx(want_u).epsilon(1e-12));
  }
  REQUIRE(p.pseudo_opinion.has_value());
  CHECK(p.pseudo_opinion->uncertainty == doctest::Approx(want_u).epsilon(1e-12));
  // Fusing three agreeing sources sharpens the verdict.
  CHECK(p.fused.uncertainty < want_u);
  // All beliefs tie, so the argmax resolves to the first class.
  CHECK(p.predicted == 0);
}

TEST_CASE("per-sample parameter gradients match finite differences") {
  MultiViewModel model({MlpConfig{2, 2, {3}}, MlpConfig{3, 2, {}}}, {2}, true);
  model.init_params(601);
  Rng rng(602);
  std::vector<std::vector<double>> x = {{rng.normal(), rng.normal()},
                                        {rng.normal(), rng.normal(), rng.normal()}};
  const DivergenceKind kind = DivergenceKind::holder(1.7);

  auto [loss, flat] = sample_gradients(model, x, 1, 0.6, kind);
  CHECK(std::isfinite(loss));

  // Flat layout: view params in order, pseudo last.
  std::vector<std::vector<double>*> slots;
  for (EvidenceNet& net : model.view_nets()) slots.push_back(&net.params());
  slots.push_back(&model.pseudo_net()->params());
  std::size_t offset = 0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    auto fd = testsupport::fd_gradient(
        [&](const std::vector<double>& p) {
          MultiViewModel probe = model;
          std::vector<std::vector<double>*> ps;
          for (EvidenceNet& net : probe.view_nets()) ps.push_back(&net.params());
          ps.push_back(&probe.pseudo_net()->params());
          *ps[s] = p;
          return sample_gradients(probe, x, 1, 0.6, kind).first;
        },
        *slots[s]);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      CHECK(testsupport::rel_err(flat[offset + i], fd[i]) < 2e-5);
    }
    offset += slots[s]->size();
  }
  CHECK(offset == flat.size());
}

TEST_CASE("training is deterministic in the seed") {
  MultiViewDataset data = complementary_views(6, 21);
  ArchSpec arch{{4}, {4}, true};
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 33;

  TrainResult a = train(data, arch, cfg);
  TrainResult b = train(data, arch, cfg);
  CHECK(a.epoch_losses == b.epoch_losses);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(a.model.view_nets()[v].params() == b.model.view_nets()[v].params());
  }
  CHECK(a.model.pseudo_net()->params() == b.model.pseudo_net()->params());

  cfg.seed = 34;
  TrainResult c = train(data, arch, cfg);
  CHECK(a.epoch_losses != c.epoch_losses);
}

TEST_CASE("a zero learning rate leaves the parameters at initialization") {
  MultiViewDataset data = complementary_views(4, 22);
  ArchSpec arch{{3}, {}, true};
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.batch_size = 8;
  cfg.seed = 5;

  cfg.epochs = 1;
  TrainResult one = train(data, arch, cfg);
  cfg.epochs = 5;
  TrainResult five = train(data, arch, cfg);
  for (std::size_t v = 0; v < 2; ++v) {
    CHECK(one.model.view_nets()[v].params() == five.model.view_nets()[v].params());
  }
  CHECK(one.model.pseudo_net()->params() == five.model.pseudo_net()->params());
}

TEST_CASE("training on complementary views beats either view alone") {
  MultiViewDataset data = complementary_views(30, 23);
  ArchSpec arch{{8}, {8}, true};
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.02;
  cfg.anneal.t_anneal = 5.0;
  cfg.seed = 71;

  TrainResult r = train(data, arch, cfg);
  CHECK(r.epoch_losses.back() < r.epoch_losses.front());

  Metrics m = evaluate(r.model, data);
  REQUIRE(m.view_accuracy.size() == 2);
  // Each view aliases one class pair, capping it near 2/3; the fusion should
  // resolve nearly everything.
  CHECK(m.fused_accuracy >= 0.85);
  CHECK(m.fused_accuracy >= std::max(m.view_accuracy[0], m.view_accuracy[1]) - 0.01);
  CHECK(m.mean_fused_uncertainty > 0.0);
  CHECK(m.mean_fused_uncertainty < 1.0);
  CHECK(m.clustering_accuracy >= m.fused_accuracy - 1e-12);
}

TEST_CASE("trainer rejects broken configurations") {
  MultiViewDataset data = complementary_views(3, 24);
  ArchSpec arch;
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(data, arch, cfg), ArgumentError);
  cfg.epochs = 1;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(data, arch, cfg), ArgumentError);
  cfg.batch_size = 4;
  cfg.kind = DivergenceKind::jensen_shannon_mc(100, 1);
  CHECK_THROWS_AS(train(data, arch, cfg), UnsupportedError);
  cfg.kind = DivergenceKind::kl();
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(train(data, arch, cfg), DomainError);
}

}  // TEST_SUITE
