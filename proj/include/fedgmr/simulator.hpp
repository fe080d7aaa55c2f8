// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_SIMULATOR_HPP
#define FEDGMR_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedgmr/aggregation.hpp"
#include "fedgmr/data.hpp"
#include "fedgmr/density.hpp"
#include "fedgmr/ims.hpp"
#include "fedgmr/model.hpp"
#include "fedgmr/pruning.hpp"
#include "fedgmr/sgd.hpp"

namespace fedgmr {

struct ClientLink {
  double down_MBps = 20.0;
  double up_MBps = 5.0;
  double preset_density = 1.0;
};

struct BandwidthProfile {
  std::vector<ClientLink> clients;
  double server_upload_MBps = 20.0;
  double model_bytes = 8e6;  // full-model transmission size A
  bool jitter = true;
  // Rate of the log-exponential jitter multiplier exp(E - ln2/rate),
  // E ~ Exp(rate). Median 1; the default puts the 95th percentile at 2.
  double jitter_rate = 3.321928094887362;
};

enum class Heterogeneity { High, Medium, Low };

/// Table-style bandwidth tiers (download/upload MB/s with a preset density
/// per tier); client counts scale proportionally for n != 10.
BandwidthProfile preset_bandwidths(Heterogeneity h, std::size_t n_clients = 10);

const char* heterogeneity_name(Heterogeneity h);

enum class Aggregator { MA, GA, FA };
const char* aggregator_name(Aggregator a);

enum class EsmMetric { SubnetValAcc, GlobalValAcc };

struct SyntheticDataConfig {
  std::size_t n_samples = 2500;
  std::size_t dim = 32;
  int n_classes = 10;
  double separation = 1.0;
  double noise_sigma = 0.6;
};

struct SimConfig {
  // Federation
  std::size_t n_clients = 10;
  Heterogeneity heterogeneity = Heterogeneity::High;
  BandwidthProfile bandwidth;   // ignored unless use_custom_bandwidth
  bool use_custom_bandwidth = false;
  double delta_t = 2.5;         // aggregation cadence (virtual seconds)
  double total_time = 1000.0;   // virtual horizon
  double alpha = 0.5;           // staleness exponent
  Aggregator aggregator = Aggregator::MA;
  bool force_sync = false;      // barrier aggregation (implied for GA/FA)
  bool gmr = true;
  bool ims = true;
  bool buffer = true;
  long max_staleness = 0;       // 0 = buffered records never expire
  std::uint64_t seed = 1;

  // Local training
  SgdOptions local;

  // Density controller
  std::vector<double> ladder = {0.05, 0.1, 0.2, 0.5, 1.0};
  double rho_min = 0.05;
  double lambda = 1.0;
  double rho_init = 1.0;        // Stage-1 starting density
  long stage1_max_rounds = 50;  // 0 = start in Stage 2 at the preset densities
  double eps_stab = 0.01;
  long w_stab = 3;
  long patience = 5;
  long eval_interval = 25;
  double tol = 1e-4;
  EsmMetric esm_metric = EsmMetric::SubnetValAcc;
  long mask_refresh_interval = 25;  // k_rest

  // Model and data
  ModelKind model_kind = ModelKind::Mlp;
  std::vector<std::size_t> hidden_dims = {32};
  SyntheticDataConfig data;
  std::string csv_path;         // optional external dataset
  std::string idx_images, idx_labels;
  PartitionScheme partition_scheme = PartitionScheme::Iid;
  double dirichlet_alpha = 0.6;
  double val_fraction = 0.2;

  // Time model. These scalar knobs are applied onto whichever link profile
  // is in use (preset or custom).
  double compute_c0 = 0.01;  // seconds per local step at rho = 0
  double compute_c1 = 0.04;  // extra seconds per local step at rho = 1
  bool jitter = true;
  double jitter_rate = 3.321928094887362;
  double model_bytes = 8e6;
  double server_upload_MBps = 20.0;
  bool ims_value_delta = false;  // optimistic: send only changed coordinates
};

/// Throws ConfigError on inconsistent settings (e.g. restoration enabled
/// with a ladder that never reaches 1.0).
void validate(const SimConfig& cfg);

struct RoundTimeBreakdown {
  double compute = 0.0;
  double upload = 0.0;
  double download = 0.0;
  double total = 0.0;
};

/// Multiplier exp(E - ln2/rate) with E ~ Exp(rate); median exactly 1.
double jitter_multiplier(Rng& rng, double rate);

/// One-round time model: upload rho*A/min(up, server), download of the full
/// sub-model, compute steps*(c0 + c1*rho). Jitter applied to the transfer
/// components when rng is non-null and the profile enables it.
RoundTimeBreakdown round_time(const BandwidthProfile& profile, std::size_t client, double rho,
                              const SgdOptions& local, double c0, double c1, Rng* rng = nullptr);

struct MetricsRow {
  double time_s = 0.0;
  long round = 0;
  std::vector<double> rho;
  double global_train_loss = 0.0;
  double global_val_acc = 0.0;
  std::vector<double> subnet_acc;
  double a_dagger = 0.0;
  double b_dagger = 0.0;
  int min_gamma = 0;
  double bytes_up_cum = 0.0;
  double bytes_down_cum = 0.0;
  std::string aggregator;
  std::uint64_t seed = 0;
};

struct MetricsLog {
  std::size_t n_clients = 0;
  std::vector<MetricsRow> rows;

  std::string header() const;
  std::string to_csv() const;
};

struct SimResult {
  MetricsLog log;
  ParamVector final_model;
  ImportanceVector final_scores;
  ModelSpec spec;
  std::vector<double> final_rho;
  std::vector<long> client_rounds;  // completed local rounds per client
  long uploads = 0;                 // upload_complete events processed
  long buffer_inserts = 0;          // buffer insertions performed
  DataShard train;                  // the server-side view of the full split
  DataShard val;
};

SimResult run_simulation(const SimConfig& cfg);

}  // namespace fedgmr

#endif  // FEDGMR_SIMULATOR_HPP
