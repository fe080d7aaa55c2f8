// SPDX-License-Identifier: Apache-2.0

#include "fedgmr/param_vector.hpp"

#include <algorithm>
#include <cmath>

#include "fedgmr/common.hpp"

namespace fedgmr {

bool ParamVector::all_finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t Mask::popcount() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += (b != 0);
  return n;
}

double Mask::density() const {
  if (bits.empty()) return 0.0;
  return static_cast<double>(popcount()) / static_cast<double>(bits.size());
}

bool Mask::is_subset_of(const Mask& other) const {
  if (bits.size() != other.bits.size()) return false;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] && !other.bits[i]) return false;
  }
  return true;
}

ParamVector masked(const ParamVector& w, const Mask& m) {
  if (w.size() != m.size()) throw StructuralError("masked: length mismatch");
  ParamVector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out.v[i] = m.bits[i] ? w.v[i] : 0.0;
  return out;
}

void apply_mask(ParamVector& w, const Mask& m) {
  if (w.size() != m.size()) throw StructuralError("apply_mask: length mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!m.bits[i]) w.v[i] = 0.0;
  }
}

bool zero_outside(const ParamVector& w, const Mask& m) {
  if (w.size() != m.size()) return false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!m.bits[i] && w.v[i] != 0.0) return false;
  }
  return true;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw StructuralError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace fedgmr
