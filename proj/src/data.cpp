#include "emvc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "emvc/errors.hpp"
#include "emvc/rng.hpp"

namespace emvc {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(std::string(what) + " file not found or unreadable: " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_double(const std::string& cell, const std::string& where) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(v)) {
    throw DataError("non-numeric value '" + cell + "' at " + where);
  }
  return v;
}

ViewMatrix load_view_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "view");
  if (lines.size() < 2) {
    throw DataError("view file has no data rows: " + path);
  }
  ViewMatrix m;
  m.cols = split_csv_line(lines[0]).size();
  if (m.cols == 0) throw DataError("view file has an empty header: " + path);
  m.rows = lines.size() - 1;
  m.values.reserve(m.rows * m.cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = split_csv_line(lines[r]);
    if (cells.size() != m.cols) {
      throw DataError("row " + std::to_string(r + 1) + " of " + path + " has " +
                      std::to_string(cells.size()) + " columns, header has " +
                      std::to_string(m.cols));
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      m.values.push_back(
          parse_double(cells[c], path + ":" + std::to_string(r + 1) + ":" + std::to_string(c + 1)));
    }
  }
  return m;
}

std::vector<std::size_t> load_labels_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "labels");
  std::vector<std::size_t> labels;
  labels.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const char* s = lines[r].c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || lines[r].find('-') != std::string::npos) {
      throw DataError("label at " + path + ":" + std::to_string(r + 1) +
                      " is not a nonnegative integer: '" + lines[r] + "'");
    }
    labels.push_back(static_cast<std::size_t>(v));
  }
  if (labels.empty()) throw DataError("labels file is empty: " + path);
  return labels;
}

}  // namespace

void MultiViewDataset::validate() const {
  if (views.empty()) throw DataError("dataset has no views");
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows != labels.size()) {
      throw DataError("view " + std::to_string(v) + " has " + std::to_string(views[v].rows) +
                      " rows but there are " + std::to_string(labels.size()) + " labels");
    }
  }
  if (num_classes < 2) throw DataError("dataset needs at least 2 classes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i + 1) +
                      " is out of range for " + std::to_string(num_classes) + " classes");
    }
  }
  if (sample_ids.size() != labels.size()) {
    throw DataError("sample id list does not match the number of labels");
  }
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw ArgumentError("generate_synthetic: need at least 2 classes");
  if (spec.samples_per_class == 0) {
    throw ArgumentError("generate_synthetic: samples_per_class must be positive");
  }
  if (spec.view_dims.empty()) throw ArgumentError("generate_synthetic: need at least one view");
  if (!spec.class_groups.empty() && spec.class_groups.size() != spec.view_dims.size()) {
    throw ArgumentError("generate_synthetic: class_groups must have one entry per view");
  }
  for (const auto& g : spec.class_groups) {
    if (g.size() != spec.num_classes) {
      throw ArgumentError("generate_synthetic: each class_groups entry needs one group per class");
    }
  }

  const std::size_t n = spec.num_classes * spec.samples_per_class;
  MultiViewDataset d;
  d.num_classes = spec.num_classes;
  d.labels.reserve(n);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) d.labels.push_back(c);
  }
  d.sample_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.sample_ids[i] = i;

  for (std::size_t v = 0; v < spec.view_dims.size(); ++v) {
    const std::size_t dim = spec.view_dims[v];
    if (dim == 0) throw ArgumentError("generate_synthetic: view dimensions must be positive");
    std::vector<std::size_t> groups(spec.num_classes);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      groups[c] = spec.class_groups.empty() ? c : spec.class_groups[v][c];
    }
    const std::size_t num_groups = *std::max_element(groups.begin(), groups.end()) + 1;

    Rng rng(mix_seed(seed, v));
    std::vector<double> centers(num_groups * dim);
    for (double& x : centers) x = spec.center_scale * rng.normal();

    ViewMatrix m;
    m.rows = n;
    m.cols = dim;
    m.values.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
      const double* center = &centers[groups[d.labels[i]] * dim];
      for (std::size_t j = 0; j < dim; ++j) {
        m.at(i, j) = center[j] + spec.cluster_spread * rng.normal();
      }
    }
    d.views.push_back(std::move(m));
  }
  return d;
}

void inject_noise(ViewMatrix& view, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw DomainError("inject_noise: sigma must be >= 0, got " + std::to_string(sigma));
  }
  Rng rng(seed);
  for (double& x : view.values) x += sigma * rng.normal();
}

std::string save_dataset(const MultiViewDataset& d, const std::string& dir) {
  d.validate();
  fs::create_directories(dir);

  nlohmann::json manifest;
  manifest["views"] = nlohmann::json::array();
  char buf[64];
  for (std::size_t v = 0; v < d.views.size(); ++v) {
    const std::string name = "view_" + std::to_string(v) + ".csv";
    manifest["views"].push_back(name);
    std::ofstream out(fs::path(dir) / name);
    for (std::size_t c = 0; c < d.views[v].cols; ++c) {
      out << (c == 0 ? "f" : ",f") << c;
    }
    out << "\n";
    for (std::size_t r = 0; r < d.views[v].rows; ++r) {
      for (std::size_t c = 0; c < d.views[v].cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", d.views[v].at(r, c));
        out << (c == 0 ? "" : ",") << buf;
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(fs::path(dir) / "labels.csv");
    for (std::size_t l : d.labels) out << l << "\n";
  }
  manifest["labels"] = "labels.csv";
  manifest["num_classes"] = d.num_classes;

  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  if (!out) throw DataError("failed to write " + manifest_path);
  return manifest_path;
}

MultiViewDataset load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("manifest file not found or unreadable: " + manifest_path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!manifest.contains("views") || !manifest["views"].is_array() ||
      manifest["views"].empty()) {
    throw DataError("manifest needs a non-empty 'views' array: " + manifest_path);
  }
  if (!manifest.contains("labels") || !manifest["labels"].is_string()) {
    throw DataError("manifest needs a 'labels' path: " + manifest_path);
  }

  const fs::path base = fs::path(manifest_path).parent_path();
  MultiViewDataset d;
  for (const nlohmann::json& v : manifest["views"]) {
    if (!v.is_string()) throw DataError("manifest 'views' entries must be paths");
    d.views.push_back(load_view_csv((base / v.get<std::string>()).string()));
  }
  d.labels = load_labels_csv((base / manifest["labels"].get<std::string>()).string());

  if (manifest.contains("num_classes")) {
    if (!manifest["num_classes"].is_number_unsigned() || manifest["num_classes"] < 2) {
      throw DataError("manifest 'num_classes' must be an integer >= 2");
    }
    d.num_classes = manifest["num_classes"].get<std::size_t>();
  } else {
    d.num_classes = *std::max_element(d.labels.begin(), d.labels.end()) + 1;
    if (d.num_classes < 2) d.num_classes = 2;
  }

  d.sample_ids.resize(d.labels.size());
  for (std::size_t i = 0; i < d.sample_ids.size(); ++i) d.sample_ids[i] = i;
  d.validate();
  return d;
}

SplitResult stratified_split(const MultiViewDataset& d, double test_fraction,
                             std::uint64_t seed) {
  d.validate();
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw ArgumentError("stratified_split: test_fraction must lie in [0, 1], got " +
                        std::to_string(test_fraction));
  }

  std::vector<std::vector<std::size_t>> by_class(d.num_classes);
  for (std::size_t i = 0; i < d.labels.size(); ++i) by_class[d.labels[i]].push_back(i);

  std::vector<std::size_t> test_rows, train_rows;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    std::vector<std::size_t>& rows = by_class[c];
    if (rows.size() < 2) {
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(rows.size()) +
                                " samples; need at least 2 to stratify");
    }
    Rng rng(mix_seed(seed, c));
    for (std::size_t i = rows.size(); i-- > 1;) {
      std::swap(rows[i], rows[rng.uniform_int(i + 1)]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + n_test);
    train_rows.insert(train_rows.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  auto take = [&](const std::vector<std::size_t>& rows) {
    MultiViewDataset out;
    out.num_classes = d.num_classes;
    for (const ViewMatrix& m : d.views) {
      ViewMatrix sub;
      sub.rows = rows.size();
      sub.cols = m.cols;
      sub.values.reserve(rows.size() * m.cols);
      for (std::size_t r : rows) {
        sub.values.insert(sub.values.end(), &m.values[r * m.cols], &m.values[(r + 1) * m.cols]);
      }
      out.views.push_back(std::move(sub));
    }
    for (std::size_t r : rows) {
      out.labels.push_back(d.labels[r]);
      out.sample_ids.push_back(d.sample_ids[r]);
    }
    return out;
  };
  return {take(train_rows), take(test_rows)};
}

}  // namespace emvc
