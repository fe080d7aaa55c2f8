// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/sgd.hpp"

#include <numeric>

#include "fedgmr/common.hpp"

namespace fedgmr {

std::vector<std::size_t> draw_batch(std::size_t shard_size, const SgdOptions& opt, Rng& rng,
                                    std::vector<std::size_t>& perm, std::size_t& perm_pos) {
  std::vector<std::size_t> idx(opt.batch_size);
  if (opt.with_replacement) {
    for (std::size_t b = 0; b < opt.batch_size; ++b) idx[b] = rng.next_below(shard_size);
    return idx;
  }
  if (opt.batch_size > shard_size) {
    throw ConfigError("sgd: batch larger than shard with replacement disabled");
  }
  for (std::size_t b = 0; b < opt.batch_size; ++b) {
    if (perm.size() != shard_size || perm_pos >= shard_size) {
      perm.resize(shard_size);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      perm_pos = 0;
    }
    idx[b] = perm[perm_pos++];
  }
  return idx;
}

ParamVector masked_sgd_steps(const ParamVector& w0, const Mask& mask, const ModelSpec& spec,
                             const DataShard& shard, const SgdOptions& opt, Rng& rng) {
  if (w0.size() != mask.size()) throw StructuralError("sgd: mask length mismatch");
  if (!zero_outside(w0, mask)) {
    throw StructuralError("sgd: w0 must be zero on masked-out coordinates");
  }
  if (shard.size() == 0) throw ConfigError("sgd: empty shard");
  if (!opt.with_replacement && opt.batch_size > shard.size()) {
    throw ConfigError("sgd: batch larger than shard with replacement disabled");
  }

  ParamVector w = w0;
  ParamVector grad;
  std::vector<std::size_t> perm;
  std::size_t perm_pos = 0;
  for (std::size_t t = 0; t < opt.steps; ++t) {
    const std::vector<std::size_t> idx = draw_batch(shard.size(), opt, rng, perm, perm_pos);
    loss_and_grad(w, spec, shard, idx, grad);
    for (std::size_t n = 0; n < w.size(); ++n) {
      if (mask.bits[n]) w.v[n] -= opt.lr * grad.v[n];
    }
  }
  return w;
}

}  // namespace fedgmr
