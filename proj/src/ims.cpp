// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/ims.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>

#include "fedgmr/common.hpp"

namespace fedgmr {

IncrementSet split(const ParamVector& w, const MaskSet& masks) {
  if (masks.masks.empty()) throw ConfigError("ims: empty mask set");

  // Unique densities ascending; one ladder level per distinct density.
  std::vector<std::pair<double, const Mask*>> levels;
  for (const auto& [client, rho] : masks.densities) {
    const Mask& m = masks.masks.at(client);
    if (m.size() != w.size()) throw StructuralError("ims: mask length mismatch");
    bool seen = false;
    for (auto& [lr, lm] : levels) {
      if (lr == rho) {
        if (!(*lm == m)) throw StructuralError("ims: clients at equal density disagree on mask");
        seen = true;
      }
    }
    if (!seen) levels.emplace_back(rho, &m);
  }
  std::sort(levels.begin(), levels.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    if (!levels[j].second->is_subset_of(*levels[j + 1].second)) {
      throw StructuralError("ims: masks are not nested");
    }
  }

  IncrementSet out;
  out.n_coords = w.size();
  out.epoch = masks.epoch;
  const Mask* prev = nullptr;
  for (const auto& [rho, m] : levels) {
    Increment inc;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m->bits[i] && (!prev || !prev->bits[i])) {
        inc.idx.push_back(static_cast<std::uint32_t>(i));
        inc.val.push_back(w.v[i]);
      }
    }
    out.level_densities.push_back(rho);
    out.level_popcounts.push_back(m->popcount());
    out.increments.push_back(std::move(inc));
    prev = m;
  }
  for (const auto& [client, rho] : masks.densities) {
    const auto it = std::find(out.level_densities.begin(), out.level_densities.end(), rho);
    out.client_level[client] =
        static_cast<std::size_t>(it - out.level_densities.begin());
  }
  return out;
}

ParamVector sum_levels(const IncrementSet& inc, std::size_t upto_level) {
  if (upto_level >= inc.increments.size()) throw StructuralError("ims: level out of range");
  ParamVector out(inc.n_coords, 0.0);
  for (std::size_t j = 0; j <= upto_level; ++j) {
    const Increment& d = inc.increments[j];
    for (std::size_t k = 0; k < d.nnz(); ++k) out.v[d.idx[k]] += d.val[k];
  }
  return out;
}

ParamVector reconstruct(const IncrementSet& inc, int client_id) {
  const auto it = inc.client_level.find(client_id);
  if (it == inc.client_level.end()) throw ProtocolError("ims: unknown client");
  return sum_levels(inc, it->second);
}

ByteCount bytes_saved(const IncrementSet& inc, const std::vector<DispatchEntry>& plan,
                      double bytes_per_scalar, const ByteOptions& opts) {
  ByteCount out;
  const double per_scalar =
      bytes_per_scalar + (opts.count_index_overhead ? 4.0 : 0.0);
  const double per_increment = opts.count_index_overhead ? 8.0 : 0.0;

  std::set<std::size_t> union_needed;
  for (const DispatchEntry& e : plan) {
    if (e.to_level >= inc.increments.size()) throw StructuralError("ims: level out of range");
    const std::size_t first = e.delta_only ? e.from_level + 1 : 0;
    double client_bytes = 0.0;
    for (std::size_t j = first; j <= e.to_level; ++j) {
      client_bytes +=
          static_cast<double>(inc.increments[j].nnz()) * per_scalar + per_increment;
      union_needed.insert(j);
    }
    if (!opts.broadcast) out.with_ims += client_bytes;
    // Full dense sub-model at the client's target level, one per client.
    out.without_ims +=
        static_cast<double>(inc.level_popcounts[e.to_level]) * bytes_per_scalar;
  }
  if (opts.broadcast) {
    for (std::size_t j : union_needed) {
      out.with_ims +=
          static_cast<double>(inc.increments[j].nnz()) * per_scalar + per_increment;
    }
  }
  return out;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(buf, buf + sizeof(T));
#endif
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw StructuralError(std::string("ims wire: truncated ") + what);
  }
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(buf, buf + sizeof(T));
#endif
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_increment(std::ostream& out, const Increment& inc, std::uint32_t epoch) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(inc.nnz()));
  write_le<std::uint32_t>(out, epoch);
  for (std::size_t k = 0; k < inc.nnz(); ++k) {
    write_le<std::uint32_t>(out, inc.idx[k]);
    write_le<double>(out, inc.val[k]);
  }
}

Increment read_increment(std::istream& in, std::uint32_t& epoch) {
  const std::uint32_t count = read_le<std::uint32_t>(in, "count");
  epoch = read_le<std::uint32_t>(in, "epoch");
  Increment inc;
  inc.idx.reserve(count);
  inc.val.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    inc.idx.push_back(read_le<std::uint32_t>(in, "index"));
    inc.val.push_back(read_le<double>(in, "value"));
  }
  return inc;
}

}  // namespace fedgmr
