// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_IMS_HPP
#define FEDGMR_IMS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "fedgmr/param_vector.hpp"
#include "fedgmr/pruning.hpp"

namespace fedgmr {

/// One sparse increment: the global model restricted to a ring of the nested
/// mask ladder, stored as (coordinate, value) pairs.
struct Increment {
  std::vector<std::uint32_t> idx;
  std::vector<double> val;

  std::size_t nnz() const { return idx.size(); }
};

/// The global model decomposed along the nested ladder. Increment j carries
/// exactly mask_j \ mask_{j-1}; a client at level L needs increments [0, L].
struct IncrementSet {
  std::vector<Increment> increments;           // ascending density order
  std::vector<double> level_densities;
  std::vector<std::size_t> level_popcounts;    // cumulative popcount per level
  std::map<int, std::size_t> client_level;     // client -> level index
  std::uint32_t epoch = 0;
  std::size_t n_coords = 0;
};

/// Splits w along the (nested) masks of a MaskSet.
IncrementSet split(const ParamVector& w, const MaskSet& masks);

/// Dense sum of increments [0, upto_level].
ParamVector sum_levels(const IncrementSet& inc, std::size_t upto_level);

/// Rebuilds client `client_id`'s sub-model: equals w ⊙ mask_client exactly.
ParamVector reconstruct(const IncrementSet& inc, int client_id);

/// What one client downloads this round: increments (from_level, to_level]
/// when restoring within an epoch, or [0, to_level] for a full sub-model.
struct DispatchEntry {
  int client_id = -1;
  std::size_t to_level = 0;
  bool delta_only = false;      // restoration delta within the same epoch
  std::size_t from_level = 0;   // meaningful when delta_only
};

struct ByteCount {
  double with_ims = 0.0;
  double without_ims = 0.0;
};

struct ByteOptions {
  bool broadcast = true;             // count each increment once server-side
  bool count_index_overhead = false; // add 4 bytes per scalar + 8 per increment
};

/// Transmission byte accounting for one dispatch round. without_ims sends
/// every client its full dense sub-model (popcount * bytes_per_scalar).
ByteCount bytes_saved(const IncrementSet& inc, const std::vector<DispatchEntry>& plan,
                      double bytes_per_scalar, const ByteOptions& opts = {});

/// Wire format: u32 count, u32 epoch, then count (u32 index, f64 value)
/// pairs, all little-endian.
void write_increment(std::ostream& out, const Increment& inc, std::uint32_t epoch);
Increment read_increment(std::istream& in, std::uint32_t& epoch);

}  // namespace fedgmr

#endif  // FEDGMR_IMS_HPP
