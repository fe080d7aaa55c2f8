// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_AGGREGATION_HPP
#define FEDGMR_AGGREGATION_HPP

#include <map>
#include <vector>

#include "fedgmr/param_vector.hpp"
#include "fedgmr/pruning.hpp"

namespace fedgmr {

/// A client model waiting in the server buffer. model is zero outside mask;
/// trained_from_round is the global-model version the client started from.
struct UploadRecord {
  int client_id = -1;
  ParamVector model;
  Mask mask;
  long trained_from_round = 0;
  double arrival_time = 0.0;
};

/// Latest-upload-per-client buffer. A newer arrival replaces the older one.
class Buffer {
public:
  void insert(UploadRecord rec);
  void clear() { latest_.clear(); }
  void erase(int client_id) { latest_.erase(client_id); }
  std::size_t size() const { return latest_.size(); }
  bool empty() const { return latest_.empty(); }
  bool contains(int client_id) const { return latest_.count(client_id) != 0; }
  const UploadRecord& at(int client_id) const { return latest_.at(client_id); }

  auto begin() const { return latest_.begin(); }
  auto end() const { return latest_.end(); }

  /// Drops records older than max_staleness rounds relative to `round`.
  void expire(long round, long max_staleness);

private:
  std::map<int, UploadRecord> latest_;
};

/// Raw staleness weights s_i = (1 + (round - trained_from))^(-alpha).
std::map<int, double> staleness_weights(const Buffer& buffer, long round, double alpha);

/// Buffered mask-aware aggregation: per coordinate, the staleness-weighted
/// mean over covering clients; uncovered coordinates carry w_prev forward.
ParamVector buff_mask_fedavg(const Buffer& buffer, const ParamVector& w_prev, long round,
                             double alpha);

/// Gradient-average comparison aggregator in model-delta form:
/// W = w_prev + (1/C) Σ_i (w_i - w_prev ⊙ m_i). Synchronous-only: all
/// buffered records must share one trained_from_round.
ParamVector aggregate_ga(const Buffer& buffer, const ParamVector& w_prev, std::size_t n_clients);

/// Zero-padding FedAvg comparison aggregator: W[n] = (1/C) Σ_i w_i[n].
/// Synchronous-only and requires all clients present.
ParamVector aggregate_fa(const Buffer& buffer, std::size_t n_clients);

/// Coverage bookkeeping over a mask set. Groups are clients with identical
/// masks; gamma_star is the group's minimum per-coordinate coverage.
struct GroupCoverage {
  std::vector<int> clients;
  int gamma_star = 0;
};

struct CoverageStats {
  std::vector<int> gamma;  // per-coordinate covering-client count
  std::vector<GroupCoverage> groups;
  double a_dagger = 0.0;  // Σ_g |C_g| / Γ*_g
  double b_dagger = 0.0;  // Σ_g |C_g| / (Γ*_g)^2
  int min_gamma = 0;      // over coordinates covered by the union of masks
};

CoverageStats coverage_stats(const MaskSet& masks);

}  // namespace fedgmr

#endif  // FEDGMR_AGGREGATION_HPP
