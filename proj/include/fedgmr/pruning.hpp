// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_PRUNING_HPP
#define FEDGMR_PRUNING_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "fedgmr/param_vector.hpp"

namespace fedgmr {

/// Per-coordinate nonnegative importance scores.
struct ImportanceVector {
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
};

/// scores[n] = ((w_now[n] - w_prev[n]) * w_now[n])^2
ImportanceVector importance(const ParamVector& w_now, const ParamVector& w_prev);

/// First-round fallback when no previous model exists: |w| elementwise.
ImportanceVector magnitude_importance(const ParamVector& w);

/// Stable descending order of coordinates by score; equal scores keep the
/// lower coordinate index first.
std::vector<std::size_t> importance_order(const ImportanceVector& scores);

/// Top ⌈rho*N⌉ coordinates of a shared ordering.
Mask mask_from_order(const std::vector<std::size_t>& order, double rho, std::size_t n_coords);

/// The masks extracted from one importance ordering for a set of client
/// densities. Nested by construction: rho_i <= rho_j implies mask_i ⊆ mask_j.
struct MaskSet {
  std::map<int, Mask> masks;
  std::map<int, double> densities;
  std::vector<std::size_t> order;  // the shared descending ordering
  long built_at_round = 0;
  std::uint32_t epoch = 0;

  /// Derives a mask for any density from the stored ordering (used between
  /// refreshes, preserving nesting).
  Mask derive(double rho) const;
};

MaskSet extract_masks(const ImportanceVector& scores, const std::map<int, double>& densities,
                      long round = 0, std::uint32_t epoch = 0);

/// Rebuilds the per-client masks of an existing set from its stored ordering
/// after densities changed (no re-sort, same epoch).
void rebuild_masks(MaskSet& set, const std::map<int, double>& densities);

/// True iff a mask refresh is due: round divisible by k_rest.
bool refresh_due(long round, long k_rest);

}  // namespace fedgmr

#endif  // FEDGMR_PRUNING_HPP
