// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedgmr/common.hpp"

namespace fedgmr {

void Buffer::insert(UploadRecord rec) {
  if (rec.model.size() != rec.mask.size()) {
    throw StructuralError("buffer: model/mask length mismatch");
  }
  if (!zero_outside(rec.model, rec.mask)) {
    throw StructuralError("buffer: upload has nonzero values outside its mask");
  }
  const auto it = latest_.find(rec.client_id);
  if (it == latest_.end() || rec.arrival_time >= it->second.arrival_time) {
    latest_[rec.client_id] = std::move(rec);
  }
}

void Buffer::expire(long round, long max_staleness) {
  for (auto it = latest_.begin(); it != latest_.end();) {
    if (round - it->second.trained_from_round > max_staleness) {
      it = latest_.erase(it);
    } else {
      ++it;
    }
  }
}

std::map<int, double> staleness_weights(const Buffer& buffer, long round, double alpha) {
  if (alpha < 0.0) throw ConfigError("staleness_weights: alpha must be >= 0");
  std::map<int, double> w;
  for (const auto& [client, rec] : buffer) {
    const long staleness = round - rec.trained_from_round;
    if (staleness < 0) throw ProtocolError("staleness_weights: upload from a future round");
    w[client] = std::pow(1.0 + static_cast<double>(staleness), -alpha);
  }
  return w;
}

ParamVector buff_mask_fedavg(const Buffer& buffer, const ParamVector& w_prev, long round,
                             double alpha) {
  if (buffer.empty()) return w_prev;
  const std::map<int, double> s = staleness_weights(buffer, round, alpha);

  const std::size_t n = w_prev.size();
  std::vector<double> num(n, 0.0);
  std::vector<double> den(n, 0.0);
  for (const auto& [client, rec] : buffer) {
    if (rec.model.size() != n) throw StructuralError("aggregate: upload length mismatch");
    const double si = s.at(client);
    for (std::size_t i = 0; i < n; ++i) {
      if (rec.mask.bits[i]) {
        num[i] += si * rec.model.v[i];
        den[i] += si;
      }
    }
  }
  ParamVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = den[i] > 0.0 ? num[i] / den[i] : w_prev.v[i];
  }
  return out;
}

ParamVector aggregate_ga(const Buffer& buffer, const ParamVector& w_prev, std::size_t n_clients) {
  if (buffer.empty()) return w_prev;
  long base_round = std::numeric_limits<long>::min();
  for (const auto& [client, rec] : buffer) {
    if (base_round == std::numeric_limits<long>::min()) {
      base_round = rec.trained_from_round;
    } else if (rec.trained_from_round != base_round) {
      throw ProtocolError("aggregate_ga: stale buffer entries (synchronous mode only)");
    }
  }
  const std::size_t n = w_prev.size();
  ParamVector out = w_prev;
  const double inv_c = 1.0 / static_cast<double>(n_clients);
  for (const auto& [client, rec] : buffer) {
    if (rec.model.size() != n) throw StructuralError("aggregate: upload length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (rec.mask.bits[i]) out.v[i] += inv_c * (rec.model.v[i] - w_prev.v[i]);
    }
  }
  return out;
}

ParamVector aggregate_fa(const Buffer& buffer, std::size_t n_clients) {
  if (buffer.size() != n_clients) {
    throw ProtocolError("aggregate_fa: all clients must be present (synchronous mode only)");
  }
  std::size_t n = 0;
  for (const auto& [client, rec] : buffer) {
    n = rec.model.size();
    break;
  }
  ParamVector out(n, 0.0);
  const double inv_c = 1.0 / static_cast<double>(n_clients);
  for (const auto& [client, rec] : buffer) {
    if (rec.model.size() != n) throw StructuralError("aggregate: upload length mismatch");
    for (std::size_t i = 0; i < n; ++i) out.v[i] += inv_c * rec.model.v[i];
  }
  return out;
}

CoverageStats coverage_stats(const MaskSet& masks) {
  if (masks.masks.empty()) throw ConfigError("coverage_stats: no clients");
  std::size_t n = 0;
  for (const auto& [client, m] : masks.masks) {
    n = m.size();
    break;
  }

  CoverageStats stats;
  stats.gamma.assign(n, 0);
  for (const auto& [client, m] : masks.masks) {
    if (m.size() != n) throw StructuralError("coverage_stats: mask length mismatch");
    for (std::size_t i = 0; i < n; ++i) stats.gamma[i] += m.bits[i] ? 1 : 0;
  }

  // Group clients by identical mask bits.
  std::map<std::vector<std::uint8_t>, GroupCoverage> groups;
  for (const auto& [client, m] : masks.masks) {
    groups[m.bits].clients.push_back(client);
  }
  stats.a_dagger = 0.0;
  stats.b_dagger = 0.0;
  for (auto& [bits, group] : groups) {
    int gamma_star = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < n; ++i) {
      if (bits[i]) gamma_star = std::min(gamma_star, stats.gamma[i]);
    }
    if (gamma_star == std::numeric_limits<int>::max()) gamma_star = 0;  // empty mask
    group.gamma_star = gamma_star;
    if (gamma_star > 0) {
      const double size = static_cast<double>(group.clients.size());
      stats.a_dagger += size / gamma_star;
      stats.b_dagger += size / (static_cast<double>(gamma_star) * gamma_star);
    }
    stats.groups.push_back(group);
  }

  int min_gamma = std::numeric_limits<int>::max();
  bool any_covered = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (stats.gamma[i] > 0) {
      min_gamma = std::min(min_gamma, stats.gamma[i]);
      any_covered = true;
    }
  }
  stats.min_gamma = any_covered ? min_gamma : 0;
  return stats;
}

}  // namespace fedgmr
