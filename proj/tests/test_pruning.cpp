// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "fedgmr/common.hpp"
#include "fedgmr/pruning.hpp"
#include "fedgmr/rng.hpp"

using namespace fedgmr;

TEST_CASE("importance matches the metric on hand arithmetic") {
  const ParamVector now(std::vector<double>{1.0, -2.0});
  const ParamVector prev(std::vector<double>{0.5, -1.0});
  const ImportanceVector s = importance(now, prev);
  CHECK(s.scores[0] == doctest::Approx(0.25));
  CHECK(s.scores[1] == doctest::Approx(4.0));
}

TEST_CASE("identical models give all-zero importance") {
  Rng rng(4);
  ParamVector w(50);
  for (auto& x : w.v) x = rng.normal();
  const ImportanceVector s = importance(w, w);
  for (double x : s.scores) CHECK(x == 0.0);
}

TEST_CASE("importance equals an elementwise reference on random vectors") {
  Rng rng(7);
  ParamVector now(100), prev(100);
  for (std::size_t i = 0; i < 100; ++i) {
    now[i] = rng.normal();
    prev[i] = rng.normal();
  }
  const ImportanceVector s = importance(now, prev);
  for (std::size_t i = 0; i < 100; ++i) {
    const double g = (now[i] - prev[i]) * now[i];
    CHECK(s.scores[i] == doctest::Approx(g * g).epsilon(1e-15));
  }
}

TEST_CASE("importance rejects mismatched lengths") {
  CHECK_THROWS_AS(importance(ParamVector(3), ParamVector(4)), StructuralError);
}

TEST_CASE("top-half mask picks the positions of the two largest scores") {
  ImportanceVector s;
  s.scores = {4.0, 1.0, 3.0, 2.0};
  const MaskSet set = extract_masks(s, {{0, 0.5}});
  const Mask& m = set.masks.at(0);
  CHECK(m.bits == std::vector<std::uint8_t>{1, 0, 1, 0});
}

TEST_CASE("density one keeps everything") {
  ImportanceVector s;
  s.scores = {0.1, 0.0, 5.0};
  const MaskSet set = extract_masks(s, {{3, 1.0}});
  CHECK(set.masks.at(3).popcount() == 3);
}

TEST_CASE("ties break toward the lower coordinate index") {
  ImportanceVector s;
  s.scores = {2.0, 2.0, 2.0, 2.0};
  const MaskSet set = extract_masks(s, {{0, 0.5}});
  CHECK(set.masks.at(0).bits == std::vector<std::uint8_t>{1, 1, 0, 0});

  // Exhaustive over all score multisets from a tiny alphabet on <= 8 dims:
  // the selected set must be the lexicographically-first argmax set.
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    Rng rng(trial);
    const std::size_t n = 2 + trial % 7;
    ImportanceVector sc;
    for (std::size_t i = 0; i < n; ++i) {
      sc.scores.push_back(static_cast<double>(rng.next_below(3)));
    }
    const double rho = 0.5;
    const Mask m = mask_from_order(importance_order(sc), rho, n);
    const std::size_t keep = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n)));
    CHECK(m.popcount() == keep);
    // No unselected coordinate may beat a selected one; among equal scores
    // the selected ones must have lower indices.
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (m.bits[a] && !m.bits[b]) {
          CHECK(sc.scores[a] >= sc.scores[b]);
          if (sc.scores[a] == sc.scores[b]) CHECK(a < b);
        }
      }
    }
  }
}

TEST_CASE("masks built from one ordering are nested with exact cardinality") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 64 + rng.next_below(128);
    ImportanceVector s;
    for (std::size_t i = 0; i < n; ++i) s.scores.push_back(rng.next_double());
    std::map<int, double> dens;
    for (int c = 0; c < 5; ++c) dens[c] = ladder[static_cast<std::size_t>(c)];
    const MaskSet set = extract_masks(s, dens);
    for (int a = 0; a < 5; ++a) {
      const double rho = ladder[static_cast<std::size_t>(a)];
      CHECK(set.masks.at(a).popcount() ==
            static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n))));
      for (int b = a + 1; b < 5; ++b) {
        CHECK(set.masks.at(a).is_subset_of(set.masks.at(b)));
      }
    }
  }
}

TEST_CASE("permuting the density map does not change any mask") {
  Rng rng(11);
  ImportanceVector s;
  for (int i = 0; i < 100; ++i) s.scores.push_back(rng.next_double());
  std::map<int, double> a{{0, 0.3}, {1, 0.7}, {2, 0.1}};
  std::map<int, double> b{{2, 0.1}, {0, 0.3}, {1, 0.7}};  // same content
  const MaskSet ma = extract_masks(s, a);
  const MaskSet mb = extract_masks(s, b);
  for (int c = 0; c < 3; ++c) CHECK(ma.masks.at(c).bits == mb.masks.at(c).bits);
}

TEST_CASE("refresh policy fires on exact multiples of k_rest") {
  CHECK(refresh_due(50, 25));
  CHECK_FALSE(refresh_due(51, 25));
  CHECK(refresh_due(25, 25));
  CHECK_THROWS_AS(refresh_due(10, 0), ConfigError);
}

TEST_CASE("a density restored between refreshes reuses the stored ordering") {
  // Ordering computed at round 25 (k_rest = 25); at round 30 a client moves
  // from 0.1 to 0.2. The new mask must come from the same ordering, so it is
  // a superset of the old one.
  Rng rng(21);
  ImportanceVector s;
  for (int i = 0; i < 200; ++i) s.scores.push_back(rng.next_double());
  MaskSet set = extract_masks(s, {{0, 0.1}}, 25);
  const Mask before = set.masks.at(0);
  CHECK_FALSE(refresh_due(30, 25));
  rebuild_masks(set, {{0, 0.2}});
  const Mask after = set.masks.at(0);
  CHECK(before.is_subset_of(after));
  CHECK(after.popcount() == 40);
}

TEST_CASE("rising density within one ordering strictly grows the mask") {
  Rng rng(31);
  ImportanceVector s;
  for (int i = 0; i < 97; ++i) s.scores.push_back(rng.next_double());
  const MaskSet set = extract_masks(s, {{0, 0.4}});
  const Mask lo = set.derive(0.4);
  const Mask hi = set.derive(0.9);
  CHECK(lo.is_subset_of(hi));
  CHECK(hi.popcount() > lo.popcount());
}

TEST_CASE("empty density map is rejected") {
  ImportanceVector s;
  s.scores = {1.0};
  CHECK_THROWS_AS(extract_masks(s, {}), ConfigError);
}
