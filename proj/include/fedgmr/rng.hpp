// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_RNG_HPP
#define FEDGMR_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fedgmr {

/// Deterministic random stream (splitmix64). The standard <random>
/// distributions are implementation-defined, so every draw used by the
/// simulator goes through this class to keep runs bit-reproducible across
/// compilers and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double next_double();

  /// Uniform in (0, 1]; never returns zero (safe for logs).
  double next_open();

  double uniform(double lo, double hi);

  /// Unbiased uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller; caches the second deviate.
  double normal();

  double exponential(double rate);

  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  /// Symmetric Dirichlet(alpha) over n components.
  std::vector<double> dirichlet(double alpha, std::size_t n);

  void shuffle(std::vector<std::size_t>& v);

  /// Derives an independent stream seed from a root seed and a path of
  /// integers (client id, round index, purpose tag). Same path, same stream.
  static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

private:
  std::uint64_t state_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Stream-purpose tags for Rng::derive. The simulator and any oracle that
// replays its draws must agree on these.
namespace rng_tag {
inline constexpr std::uint64_t kInit = 0x11;
inline constexpr std::uint64_t kData = 0x22;
inline constexpr std::uint64_t kPartition = 0x33;
inline constexpr std::uint64_t kTrain = 0x44;
inline constexpr std::uint64_t kJitterUp = 0x55;
inline constexpr std::uint64_t kJitterDown = 0x66;
inline constexpr std::uint64_t kValSplit = 0x77;
}  // namespace rng_tag

}  // namespace fedgmr

#endif  // FEDGMR_RNG_HPP
