// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fedgmr/common.hpp"
#include "fedgmr/ims.hpp"
#include "fedgmr/rng.hpp"

using namespace fedgmr;

namespace {

MaskSet nested_set(const ImportanceVector& scores, const std::map<int, double>& dens) {
  return extract_masks(scores, dens);
}

ImportanceVector random_scores(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ImportanceVector s;
  for (std::size_t i = 0; i < n; ++i) s.scores.push_back(rng.next_double());
  return s;
}

}  // namespace

TEST_CASE("a single full-density level produces one increment equal to the model") {
  ParamVector w(std::vector<double>{1.0, 2.0, 3.0});
  const MaskSet set = nested_set(random_scores(3, 1), {{0, 1.0}});
  const IncrementSet inc = split(w, set);
  REQUIRE(inc.increments.size() == 1);
  CHECK(max_abs_diff(sum_levels(inc, 0), w) == 0.0);
}

TEST_CASE("the two-level ladder splits into ring differences") {
  ParamVector w(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  ImportanceVector s;
  s.scores = {4.0, 3.0, 2.0, 1.0};  // ordering 0,1,2,3
  const MaskSet set = nested_set(s, {{0, 0.5}, {1, 1.0}});
  const IncrementSet inc = split(w, set);
  REQUIRE(inc.increments.size() == 2);
  const ParamVector first = sum_levels(inc, 0);
  CHECK(first.v == std::vector<double>{1.0, 2.0, 0.0, 0.0});
  ParamVector second(4, 0.0);
  for (std::size_t k = 0; k < inc.increments[1].nnz(); ++k) {
    second[inc.increments[1].idx[k]] = inc.increments[1].val[k];
  }
  CHECK(second.v == std::vector<double>{0.0, 0.0, 3.0, 4.0});
}

TEST_CASE("random nested ladders have disjoint supports that sum exactly") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 128;
    ParamVector w(n);
    for (auto& x : w.v) x = rng.normal();
    std::map<int, double> dens;
    for (int c = 0; c < 5; ++c) dens[c] = ladder[static_cast<std::size_t>(c)];
    const MaskSet set = nested_set(random_scores(n, 100 + seed), dens);
    const IncrementSet inc = split(w, set);

    std::vector<int> support(n, 0);
    for (const Increment& d : inc.increments) {
      for (std::uint32_t i : d.idx) support[i] += 1;
    }
    for (int touched : support) CHECK(touched <= 1);

    const ParamVector total = sum_levels(inc, inc.increments.size() - 1);
    const ParamVector want = masked(w, set.masks.at(4));  // largest mask
    CHECK(max_abs_diff(total, want) == 0.0);
  }
}

TEST_CASE("reconstruction equals the masked global model with zero tolerance") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(777 + seed);
    const std::size_t n = 96;
    ParamVector w(n);
    for (auto& x : w.v) x = rng.normal();
    std::map<int, double> dens;
    for (int c = 0; c < 8; ++c) dens[c] = ladder[rng.next_below(5)];
    const MaskSet set = nested_set(random_scores(n, 800 + seed), dens);
    const IncrementSet inc = split(w, set);
    for (const auto& [client, rho] : dens) {
      const ParamVector got = reconstruct(inc, client);
      const ParamVector want = masked(w, set.masks.at(client));
      CHECK(max_abs_diff(got, want) == 0.0);
    }
  }
}

TEST_CASE("lowest and top densities reconstruct from the expected levels") {
  ParamVector w(std::vector<double>{5.0, -1.0, 2.0, 0.5});
  ImportanceVector s;
  s.scores = {4.0, 3.0, 2.0, 1.0};
  const MaskSet set = nested_set(s, {{0, 0.25}, {1, 1.0}});
  const IncrementSet inc = split(w, set);
  const ParamVector low = reconstruct(inc, 0);
  CHECK(low.v == std::vector<double>{5.0, 0.0, 0.0, 0.0});
  const ParamVector top = reconstruct(inc, 1);
  CHECK(max_abs_diff(top, w) == 0.0);
}

TEST_CASE("non-nested masks are rejected") {
  MaskSet set;
  Mask a(4, 0), b(4, 0);
  a.bits = {1, 1, 0, 0};
  b.bits = {0, 0, 1, 1};
  set.masks[0] = a;
  set.masks[1] = b;
  set.densities[0] = 0.5;
  set.densities[1] = 0.6;
  ParamVector w(4, 1.0);
  CHECK_THROWS_AS(split(w, set), StructuralError);
}

TEST_CASE("byte accounting: one client saves nothing") {
  ParamVector w(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  const MaskSet set = nested_set(random_scores(4, 3), {{0, 0.5}});
  const IncrementSet inc = split(w, set);
  const std::vector<DispatchEntry> plan{{0, 0, false, 0}};
  const ByteCount bc = bytes_saved(inc, plan, 8.0);
  CHECK(bc.with_ims == doctest::Approx(bc.without_ims));
}

TEST_CASE("byte accounting: two clients at one density halve the broadcast") {
  ParamVector w(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  ImportanceVector s = random_scores(4, 5);
  const MaskSet set = extract_masks(s, {{0, 0.5}, {1, 0.5}});
  const IncrementSet inc = split(w, set);
  const std::vector<DispatchEntry> plan{{0, 0, false, 0}, {1, 0, false, 0}};
  const ByteCount bc = bytes_saved(inc, plan, 8.0);
  CHECK(bc.with_ims == doctest::Approx(0.5 * bc.without_ims));
}

TEST_CASE("byte accounting: the heterogeneous preset saves bytes with ten clients") {
  const double ladder[5] = {1.0, 0.5, 0.2, 0.1, 0.05};
  const int counts[5] = {1, 1, 1, 1, 6};  // high heterogeneity
  Rng rng(9);
  const std::size_t n = 400;
  ParamVector w(n);
  for (auto& x : w.v) x = rng.normal();
  std::map<int, double> dens;
  int client = 0;
  for (int t = 0; t < 5; ++t) {
    for (int i = 0; i < counts[t]; ++i) dens[client++] = ladder[t];
  }
  const MaskSet set = nested_set(random_scores(n, 10), dens);
  const IncrementSet inc = split(w, set);
  std::vector<DispatchEntry> plan;
  for (const auto& [c, rho] : dens) {
    plan.push_back({c, inc.client_level.at(c), false, 0});
  }
  const ByteCount bc = bytes_saved(inc, plan, 8.0);
  CHECK(bc.with_ims < bc.without_ims);
}

TEST_CASE("monotone savings holds for random dispatch plans") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(40 + seed);
    const std::size_t n = 64;
    ParamVector w(n);
    for (auto& x : w.v) x = rng.normal();
    std::map<int, double> dens;
    const int clients = 2 + static_cast<int>(rng.next_below(8));
    for (int c = 0; c < clients; ++c) dens[c] = ladder[rng.next_below(5)];
    const MaskSet set = nested_set(random_scores(n, 50 + seed), dens);
    const IncrementSet inc = split(w, set);
    std::vector<DispatchEntry> plan;
    for (const auto& [c, rho] : dens) {
      if (rng.next_double() < 0.7) plan.push_back({c, inc.client_level.at(c), false, 0});
    }
    if (plan.empty()) continue;
    const ByteCount bc = bytes_saved(inc, plan, 8.0);
    CHECK(bc.with_ims <= bc.without_ims + 1e-9);
  }
}

TEST_CASE("a one-level restoration needs exactly the ring increments") {
  ParamVector w(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  ImportanceVector s;
  for (int i = 0; i < 10; ++i) s.scores.push_back(10.0 - i);
  const MaskSet set = extract_masks(s, {{0, 0.2}, {1, 0.5}, {2, 1.0}});
  const IncrementSet inc = split(w, set);
  // Client 0 moves from level 0 (rho 0.2) to level 1 (rho 0.5): the delta
  // download is increment 1 alone.
  const std::vector<DispatchEntry> plan{{0, 1, true, 0}};
  const ByteCount bc = bytes_saved(inc, plan, 8.0);
  CHECK(bc.with_ims == doctest::Approx(static_cast<double>(inc.increments[1].nnz()) * 8.0));
  // Rebuilding level 1 from level 0 plus the delta matches a fresh download.
  ParamVector have = sum_levels(inc, 0);
  for (std::size_t k = 0; k < inc.increments[1].nnz(); ++k) {
    have[inc.increments[1].idx[k]] += inc.increments[1].val[k];
  }
  CHECK(max_abs_diff(have, reconstruct(inc, 1)) == 0.0);
}

TEST_CASE("index overhead mode adds four bytes per scalar and eight per increment") {
  ParamVector w(std::vector<double>{1.0, 2.0});
  const MaskSet set = nested_set(random_scores(2, 6), {{0, 1.0}});
  const IncrementSet inc = split(w, set);
  const std::vector<DispatchEntry> plan{{0, 0, false, 0}};
  ByteOptions opts;
  opts.count_index_overhead = true;
  const ByteCount bc = bytes_saved(inc, plan, 8.0, opts);
  CHECK(bc.with_ims == doctest::Approx(2 * 12.0 + 8.0));
  CHECK(bc.without_ims == doctest::Approx(16.0));
}

TEST_CASE("unicast counting sums per-client needs") {
  ParamVector w(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  ImportanceVector s = random_scores(4, 5);
  const MaskSet set = extract_masks(s, {{0, 0.5}, {1, 0.5}});
  const IncrementSet inc = split(w, set);
  const std::vector<DispatchEntry> plan{{0, 0, false, 0}, {1, 0, false, 0}};
  ByteOptions opts;
  opts.broadcast = false;
  const ByteCount bc = bytes_saved(inc, plan, 8.0, opts);
  CHECK(bc.with_ims == doctest::Approx(bc.without_ims));
}

TEST_CASE("the wire format round-trips an increment") {
  Increment inc;
  inc.idx = {3, 17, 200000};
  inc.val = {0.5, -2.25, 1e-9};
  std::stringstream ss;
  write_increment(ss, inc, 42);
  std::uint32_t epoch = 0;
  const Increment back = read_increment(ss, epoch);
  CHECK(epoch == 42);
  CHECK(back.idx == inc.idx);
  CHECK(back.val == inc.val);
}

TEST_CASE("the wire format is little-endian with the documented layout") {
  Increment inc;
  inc.idx = {1};
  inc.val = {1.0};
  std::stringstream ss;
  write_increment(ss, inc, 0x01020304);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8);
  // count = 1 little-endian
  CHECK(static_cast<unsigned char>(bytes[0]) == 1);
  CHECK(static_cast<unsigned char>(bytes[1]) == 0);
  // epoch 0x01020304 little-endian
  CHECK(static_cast<unsigned char>(bytes[4]) == 0x04);
  CHECK(static_cast<unsigned char>(bytes[7]) == 0x01);
  // index 1
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);
  // f64 1.0 = 0x3FF0000000000000 little-endian: last byte 0x3F
  CHECK(static_cast<unsigned char>(bytes[19]) == 0x3F);
}

TEST_CASE("truncated wire data is a structural error") {
  std::stringstream ss;
  const unsigned char partial[] = {5, 0, 0, 0};
  ss.write(reinterpret_cast<const char*>(partial), 4);
  std::uint32_t epoch;
  CHECK_THROWS_AS(read_increment(ss, epoch), StructuralError);
}
