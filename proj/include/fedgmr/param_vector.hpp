// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_PARAM_VECTOR_HPP
#define FEDGMR_PARAM_VECTOR_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fedgmr {

/// Flat model parameters, coordinate-indexed 0..N-1.
struct ParamVector {
  std::vector<double> v;

  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : v(n, fill) {}
  explicit ParamVector(std::vector<double> values) : v(std::move(values)) {}

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  bool all_finite() const;
};

/// Binary retention mask over the same coordinate space.
struct Mask {
  std::vector<std::uint8_t> bits;

  Mask() = default;
  explicit Mask(std::size_t n, std::uint8_t fill = 0) : bits(n, fill) {}

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  double density() const;

  /// True when every retained coordinate of *this is retained by other.
  bool is_subset_of(const Mask& other) const;

  bool operator==(const Mask& other) const { return bits == other.bits; }
};

/// w ⊙ m
ParamVector masked(const ParamVector& w, const Mask& m);

/// In-place w ← w ⊙ m.
void apply_mask(ParamVector& w, const Mask& m);

/// True iff w has exact zeros on every coordinate masked out by m.
bool zero_outside(const ParamVector& w, const Mask& m);

double max_abs_diff(const ParamVector& a, const ParamVector& b);

}  // namespace fedgmr

#endif  // FEDGMR_PARAM_VECTOR_HPP
