#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emvc {

// Dense row-major feature matrix for one view.
struct ViewMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {&values[r * cols], cols}; }
};

struct MultiViewDataset {
  std::vector<ViewMatrix> views;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  // Position in the dataset this one was derived from (identity after
  // generation or loading; meaningful after splits).
  std::vector<std::size_t> sample_ids;

  std::size_t size() const { return labels.size(); }
  std::size_t num_views() const { return views.size(); }
  void validate() const;
};

// Gaussian class clusters, one independent draw per view. class_groups lets a
// view alias classes: class_groups[v][c] names the cluster center view v uses
// for class c, so two classes can be indistinguishable in one view while
// another view separates them. Empty means every view separates all classes.
struct SyntheticSpec {
  std::size_t num_classes = 3;
  std::size_t samples_per_class = 100;
  std::vector<std::size_t> view_dims = {4, 4};
  double cluster_spread = 0.5;
  double center_scale = 2.0;
  std::vector<std::vector<std::size_t>> class_groups;
};

MultiViewDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Adds sigma * N(0,1) to every entry. The unit draws depend only on the seed,
// so the same seed at two sigmas yields proportional perturbations.
void inject_noise(ViewMatrix& view, double sigma, std::uint64_t seed);

// Writes view_<i>.csv (with a header row), labels.csv (bare integers) and
// manifest.json into dir; returns the manifest path.
std::string save_dataset(const MultiViewDataset& d, const std::string& dir);

// Reads a manifest ({"views": [...], "labels": "...", "num_classes": K}) with
// paths resolved against the manifest's directory. num_classes is optional
// and defaults to one past the largest label.
MultiViewDataset load_manifest(const std::string& manifest_path);

struct SplitResult {
  MultiViewDataset train;
  MultiViewDataset test;
};

// Per-class shuffle-and-cut: round(test_fraction * count) samples of every
// class go to the test side. Classes with fewer than 2 samples cannot be
// stratified.
SplitResult stratified_split(const MultiViewDataset& d, double test_fraction,
                             std::uint64_t seed);

}  // namespace emvc
