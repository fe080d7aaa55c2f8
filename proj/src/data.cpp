// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/data.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fedgmr/common.hpp"

namespace fedgmr {

void DataShard::push(const double* x, int label) {
  features.insert(features.end(), x, x + dim);
  labels.push_back(label);
}

DataShard make_gaussian_mixture(std::size_t n_samples, std::size_t dim, int n_classes,
                                double separation, double noise_sigma, Rng& rng) {
  if (n_classes < 2) throw ConfigError("make_gaussian_mixture: need at least 2 classes");
  std::vector<double> means(static_cast<std::size_t>(n_classes) * dim);
  for (double& m : means) m = separation * rng.normal();

  DataShard d;
  d.dim = dim;
  d.features.reserve(n_samples * dim);
  d.labels.reserve(n_samples);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const int c = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_classes)));
    const double* mu = means.data() + static_cast<std::size_t>(c) * dim;
    for (std::size_t j = 0; j < dim; ++j) x[j] = mu[j] + noise_sigma * rng.normal();
    d.push(x.data(), c);
  }
  return d;
}

TrainValSplit split_train_val(const DataShard& d, double val_fraction, Rng& rng) {
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw ConfigError("split_train_val: fraction must be in [0,1)");
  }
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  const std::size_t n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(d.size()));
  TrainValSplit out;
  out.train.dim = d.dim;
  out.val.dim = d.dim;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    DataShard& dst = (i < d.size() - n_val) ? out.train : out.val;
    dst.push(d.row(idx[i]), d.labels[idx[i]]);
  }
  return out;
}

namespace {

std::vector<DataShard> shards_from_assignment(const DataShard& d,
                                              const std::vector<std::vector<std::size_t>>& assign) {
  std::vector<DataShard> shards(assign.size());
  for (std::size_t c = 0; c < assign.size(); ++c) {
    shards[c].dim = d.dim;
    shards[c].client_id = static_cast<int>(c);
    for (std::size_t i : assign[c]) shards[c].push(d.row(i), d.labels[i]);
  }
  return shards;
}

}  // namespace

std::vector<DataShard> partition_iid(const DataShard& d, std::size_t n_clients, Rng& rng) {
  if (d.size() < n_clients) throw ConfigError("partition: dataset smaller than client count");
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> assign(n_clients);
  const std::size_t base = d.size() / n_clients;
  const std::size_t extra = d.size() % n_clients;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < n_clients; ++c) {
    const std::size_t take = base + (c < extra ? 1 : 0);
    for (std::size_t i = 0; i < take; ++i) assign[c].push_back(idx[pos++]);
  }
  return shards_from_assignment(d, assign);
}

std::vector<DataShard> partition_dirichlet(const DataShard& d, std::size_t n_clients,
                                           double alpha, Rng& rng, int max_retries) {
  if (d.size() < n_clients) throw ConfigError("partition: dataset smaller than client count");
  if (alpha <= 0.0) throw ConfigError("partition: dirichlet alpha must be positive");

  int n_classes = 0;
  for (int y : d.labels) n_classes = std::max(n_classes, y + 1);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < d.size(); ++i) {
    by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);
  }

  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    std::vector<std::vector<std::size_t>> assign(n_clients);
    for (auto& cls : by_class) {
      if (cls.empty()) continue;
      std::vector<std::size_t> shuffled = cls;
      rng.shuffle(shuffled);
      const std::vector<double> p = rng.dirichlet(alpha, n_clients);
      // Largest-remainder apportionment of the class samples.
      std::vector<std::size_t> counts(n_clients, 0);
      std::vector<std::pair<double, std::size_t>> rem;
      std::size_t assigned = 0;
      for (std::size_t c = 0; c < n_clients; ++c) {
        const double want = p[c] * static_cast<double>(shuffled.size());
        counts[c] = static_cast<std::size_t>(want);
        assigned += counts[c];
        rem.emplace_back(want - static_cast<double>(counts[c]), c);
      }
      std::stable_sort(rem.begin(), rem.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t r = 0; assigned < shuffled.size(); ++r, ++assigned) {
        counts[rem[r % rem.size()].second] += 1;
      }
      std::size_t pos = 0;
      for (std::size_t c = 0; c < n_clients; ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i) assign[c].push_back(shuffled[pos++]);
      }
    }
    const bool any_empty =
        std::any_of(assign.begin(), assign.end(), [](const auto& a) { return a.empty(); });
    if (!any_empty) return shards_from_assignment(d, assign);
  }
  throw ConfigError("partition: dirichlet draw left an empty shard after retries");
}

std::vector<DataShard> partition(const DataShard& d, std::size_t n_clients,
                                 PartitionScheme scheme, double alpha, Rng& rng) {
  if (scheme == PartitionScheme::Iid) return partition_iid(d, n_clients, rng);
  return partition_dirichlet(d, n_clients, alpha, rng);
}

namespace {

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw StructuralError(std::string("idx: truncated ") + what);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

DataShard read_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw StructuralError("idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw StructuralError("idx: cannot open " + labels_path);

  if (read_be32(img, "image magic") != 0x00000803u) {
    throw StructuralError("idx: bad image magic (want 0x00000803)");
  }
  const std::uint32_t n_img = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "rows");
  const std::uint32_t cols = read_be32(img, "cols");

  if (read_be32(lab, "label magic") != 0x00000801u) {
    throw StructuralError("idx: bad label magic (want 0x00000801)");
  }
  const std::uint32_t n_lab = read_be32(lab, "label count");
  if (n_img != n_lab) throw StructuralError("idx: image/label count mismatch");

  DataShard d;
  d.dim = static_cast<std::size_t>(rows) * cols;
  d.features.resize(static_cast<std::size_t>(n_img) * d.dim);
  d.labels.resize(n_img);
  std::vector<unsigned char> px(d.dim);
  for (std::uint32_t i = 0; i < n_img; ++i) {
    if (!img.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()))) {
      throw StructuralError("idx: truncated image data");
    }
    for (std::size_t j = 0; j < d.dim; ++j) {
      d.features[i * d.dim + j] = static_cast<double>(px[j]) / 255.0;
    }
    char y;
    if (!lab.read(&y, 1)) throw StructuralError("idx: truncated label data");
    d.labels[i] = static_cast<int>(static_cast<unsigned char>(y));
  }
  return d;
}

DataShard read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw StructuralError("csv: empty file");

  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  std::ptrdiff_t label_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "label") label_col = static_cast<std::ptrdiff_t>(i);
  }
  if (label_col < 0) throw StructuralError("csv: no column named \"label\"");

  DataShard d;
  d.dim = cols.size() - 1;
  std::vector<double> x(d.dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    std::size_t xi = 0;
    int label = 0;
    while (std::getline(ss, cell, ',')) {
      if (static_cast<std::ptrdiff_t>(col) == label_col) {
        label = std::stoi(cell);
      } else {
        if (xi >= d.dim) throw StructuralError("csv: row wider than header");
        x[xi++] = std::stod(cell);
      }
      ++col;
    }
    if (col != cols.size()) throw StructuralError("csv: row narrower than header");
    d.push(x.data(), label);
  }
  return d;
}

}  // namespace fedgmr
