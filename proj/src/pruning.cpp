// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedgmr/common.hpp"

namespace fedgmr {

ImportanceVector importance(const ParamVector& w_now, const ParamVector& w_prev) {
  if (w_now.size() != w_prev.size()) throw StructuralError("importance: length mismatch");
  ImportanceVector out;
  out.scores.resize(w_now.size());
  for (std::size_t n = 0; n < w_now.size(); ++n) {
    const double g = (w_now.v[n] - w_prev.v[n]) * w_now.v[n];
    out.scores[n] = g * g;
  }
  return out;
}

ImportanceVector magnitude_importance(const ParamVector& w) {
  ImportanceVector out;
  out.scores.resize(w.size());
  for (std::size_t n = 0; n < w.size(); ++n) out.scores[n] = std::fabs(w.v[n]);
  return out;
}

std::vector<std::size_t> importance_order(const ImportanceVector& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores.scores[a] > scores.scores[b];
  });
  return order;
}

Mask mask_from_order(const std::vector<std::size_t>& order, double rho, std::size_t n_coords) {
  if (rho <= 0.0 || rho > 1.0) throw ConfigError("mask_from_order: density must be in (0,1]");
  if (order.size() != n_coords) throw StructuralError("mask_from_order: ordering length mismatch");
  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n_coords)));
  Mask m(n_coords, 0);
  for (std::size_t i = 0; i < keep && i < n_coords; ++i) m.bits[order[i]] = 1;
  return m;
}

Mask MaskSet::derive(double rho) const {
  return mask_from_order(order, rho, order.size());
}

MaskSet extract_masks(const ImportanceVector& scores, const std::map<int, double>& densities,
                      long round, std::uint32_t epoch) {
  if (densities.empty()) throw ConfigError("extract_masks: empty density map");
  MaskSet set;
  set.order = importance_order(scores);
  set.densities = densities;
  set.built_at_round = round;
  set.epoch = epoch;
  for (const auto& [client, rho] : densities) {
    set.masks.emplace(client, mask_from_order(set.order, rho, scores.size()));
  }
  return set;
}

void rebuild_masks(MaskSet& set, const std::map<int, double>& densities) {
  set.densities = densities;
  set.masks.clear();
  for (const auto& [client, rho] : densities) {
    set.masks.emplace(client, set.derive(rho));
  }
}

bool refresh_due(long round, long k_rest) {
  if (k_rest <= 0) throw ConfigError("refresh_due: k_rest must be positive");
  if (round < 1) throw ConfigError("refresh_due: round must be >= 1");
  return round % k_rest == 0;
}

}  // namespace fedgmr
