// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_DATA_HPP
#define FEDGMR_DATA_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "fedgmr/rng.hpp"

namespace fedgmr {

/// A labeled dataset slice. Features are stored row-major.
struct DataShard {
  std::vector<double> features;  // size() == n_samples * dim
  std::vector<int> labels;
  std::size_t dim = 0;
  int client_id = -1;

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return features.data() + i * dim; }

  void push(const double* x, int label);
};

/// Synthetic Gaussian-mixture classification data: one spherical cluster per
/// class, means drawn once from N(0, separation^2 I).
DataShard make_gaussian_mixture(std::size_t n_samples, std::size_t dim, int n_classes,
                                double separation, double noise_sigma, Rng& rng);

/// Splits off the last `fraction` of a shard (after a shuffle) as held-out data.
struct TrainValSplit {
  DataShard train;
  DataShard val;
};
TrainValSplit split_train_val(const DataShard& d, double val_fraction, Rng& rng);

enum class PartitionScheme { Iid, Dirichlet };

std::vector<DataShard> partition_iid(const DataShard& d, std::size_t n_clients, Rng& rng);

/// Dirichlet label partitioning: per class, client proportions ~ Dir(alpha).
/// Redraws (up to max_retries) if any client ends up empty.
std::vector<DataShard> partition_dirichlet(const DataShard& d, std::size_t n_clients,
                                           double alpha, Rng& rng, int max_retries = 20);

std::vector<DataShard> partition(const DataShard& d, std::size_t n_clients,
                                 PartitionScheme scheme, double alpha, Rng& rng);

/// IDX (MNIST-style) reader. Magic 0x00000803 for images, 0x00000801 for
/// labels, both big-endian. Pixels are scaled to [0,1].
DataShard read_idx(const std::string& images_path, const std::string& labels_path);

/// CSV reader: header row required, label column named "label", all other
/// columns parsed as features in file order.
DataShard read_csv(const std::string& path);

}  // namespace fedgmr

#endif  // FEDGMR_DATA_HPP
