// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_SGD_HPP
#define FEDGMR_SGD_HPP

#include <cstddef>
#include <vector>

#include "fedgmr/data.hpp"
#include "fedgmr/model.hpp"
#include "fedgmr/param_vector.hpp"
#include "fedgmr/rng.hpp"

namespace fedgmr {

struct SgdOptions {
  std::size_t steps = 5;
  double lr = 0.25;
  std::size_t batch_size = 20;
  bool with_replacement = true;
};

/// Draws the minibatch for one step. Exposed so that oracles can replay the
/// exact sample sequence: with replacement, batch_size independent uniform
/// draws per step; without replacement, a per-call shuffle consumed in
/// consecutive blocks (wrapping reshuffles).
std::vector<std::size_t> draw_batch(std::size_t shard_size, const SgdOptions& opt, Rng& rng,
                                    std::vector<std::size_t>& perm, std::size_t& perm_pos);

/// T masked minibatch-SGD steps from w0. Requires w0 == w0 ⊙ mask; the
/// result has exact zeros on all masked-out coordinates.
ParamVector masked_sgd_steps(const ParamVector& w0, const Mask& mask, const ModelSpec& spec,
                             const DataShard& shard, const SgdOptions& opt, Rng& rng);

}  // namespace fedgmr

#endif  // FEDGMR_SGD_HPP
