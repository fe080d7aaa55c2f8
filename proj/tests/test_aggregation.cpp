// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fedgmr/aggregation.hpp"
#include "fedgmr/common.hpp"
#include "fedgmr/model.hpp"
#include "fedgmr/rng.hpp"
#include "fedgmr/sgd.hpp"

using namespace fedgmr;

namespace {

UploadRecord make_record(int client, std::vector<double> values, std::vector<std::uint8_t> bits,
                         long from_round, double arrival = 0.0) {
  UploadRecord rec;
  rec.client_id = client;
  rec.mask.bits = std::move(bits);
  rec.model = ParamVector(std::move(values));
  for (std::size_t i = 0; i < rec.model.size(); ++i) {
    if (!rec.mask.bits[i]) rec.model[i] = 0.0;
  }
  rec.trained_from_round = from_round;
  rec.arrival_time = arrival;
  return rec;
}

// Literal per-coordinate reference for the buffered mask-aware rule.
ParamVector ref_mask_fedavg(const std::vector<UploadRecord>& recs, const ParamVector& w_prev,
                            long round, double alpha) {
  ParamVector out(w_prev.size());
  for (std::size_t n = 0; n < w_prev.size(); ++n) {
    double num = 0.0, den = 0.0;
    for (const UploadRecord& r : recs) {
      if (!r.mask.bits[n]) continue;
      const double s = std::pow(1.0 + static_cast<double>(round - r.trained_from_round), -alpha);
      num += s * r.model[n];
      den += s;
    }
    out[n] = den > 0.0 ? num / den : w_prev[n];
  }
  return out;
}

Buffer to_buffer(const std::vector<UploadRecord>& recs) {
  Buffer b;
  for (const UploadRecord& r : recs) b.insert(r);
  return b;
}

}  // namespace

TEST_CASE("staleness weights follow (1 + lag)^(-alpha)") {
  Buffer b;
  b.insert(make_record(0, {1.0}, {1}, 10));
  b.insert(make_record(1, {1.0}, {1}, 7));

  SUBCASE("zero staleness gives weight one") {
    const auto w = staleness_weights(b, 10, 0.7);
    CHECK(w.at(0) == doctest::Approx(1.0));
  }
  SUBCASE("alpha zero flattens everything") {
    const auto w = staleness_weights(b, 10, 0.0);
    CHECK(w.at(0) == doctest::Approx(1.0));
    CHECK(w.at(1) == doctest::Approx(1.0));
  }
  SUBCASE("lag 3 at alpha 0.5 gives a half") {
    const auto w = staleness_weights(b, 10, 0.5);
    CHECK(w.at(1) == doctest::Approx(0.5));
  }
  SUBCASE("uploads from the future are protocol errors") {
    CHECK_THROWS_AS(staleness_weights(b, 5, 0.5), ProtocolError);
  }
}

TEST_CASE("covered coordinates average only the covering clients") {
  const std::vector<UploadRecord> recs{
      make_record(0, {2.0, 7.5}, {1, 0}, 5),
      make_record(1, {4.0, 7.5}, {1, 0}, 5),
      make_record(2, {9.0, 7.5}, {0, 0}, 5),
  };
  const ParamVector prev(std::vector<double>{0.0, 7.0});
  const ParamVector out = buff_mask_fedavg(to_buffer(recs), prev, 5, 0.5);
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == doctest::Approx(7.0));  // carry-forward
}

TEST_CASE("empty buffer carries the previous model forward") {
  const ParamVector prev(std::vector<double>{1.0, 2.0, 3.0});
  const ParamVector out = buff_mask_fedavg(Buffer{}, prev, 3, 0.5);
  CHECK(out.v == prev.v);
}

TEST_CASE("buffered aggregation matches the per-coordinate oracle on random instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 64;
    const std::size_t clients = 2 + rng.next_below(4);  // up to 5
    const long round = 10;
    std::vector<UploadRecord> recs;
    for (std::size_t c = 0; c < clients; ++c) {
      std::vector<double> vals(n);
      std::vector<std::uint8_t> bits(n);
      for (std::size_t i = 0; i < n; ++i) {
        bits[i] = rng.next_double() < 0.6 ? 1 : 0;
        vals[i] = rng.normal();
      }
      recs.push_back(make_record(static_cast<int>(c), std::move(vals), std::move(bits),
                                 round - static_cast<long>(rng.next_below(5))));
    }
    ParamVector prev(n);
    for (auto& x : prev.v) x = rng.normal();
    const double alpha = rng.next_double();
    const ParamVector got = buff_mask_fedavg(to_buffer(recs), prev, round, alpha);
    const ParamVector want = ref_mask_fedavg(recs, prev, round, alpha);
    CHECK(max_abs_diff(got, want) <= 1e-12);
  }
}

TEST_CASE("per-coordinate effective weights sum to one on covered coordinates") {
  Rng rng(77);
  const std::size_t n = 32;
  std::vector<UploadRecord> recs;
  for (int c = 0; c < 4; ++c) {
    std::vector<double> vals(n, 1.0);  // all-ones values expose the weight sum
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = rng.next_double() < 0.5 ? 1 : 0;
    recs.push_back(make_record(c, std::move(vals), std::move(bits), 10 - c));
  }
  const ParamVector prev(n, -99.0);
  const ParamVector out = buff_mask_fedavg(to_buffer(recs), prev, 10, 0.8);
  for (std::size_t i = 0; i < n; ++i) {
    bool covered = false;
    for (const auto& r : recs) covered |= r.mask.bits[i] != 0;
    if (covered) {
      CHECK(std::fabs(out[i] - 1.0) <= 1e-12);
    } else {
      CHECK(out[i] == -99.0);
    }
  }
}

TEST_CASE("buffer keeps only the later record per client") {
  Buffer b;
  b.insert(make_record(3, {1.0}, {1}, 4, 10.0));
  b.insert(make_record(3, {2.0}, {1}, 5, 11.0));
  CHECK(b.size() == 1);
  CHECK(b.at(3).model[0] == doctest::Approx(2.0));
  // An older arrival does not displace a newer one.
  b.insert(make_record(3, {9.0}, {1}, 2, 5.0));
  CHECK(b.at(3).model[0] == doctest::Approx(2.0));
}

TEST_CASE("buffer expiry drops records beyond max staleness") {
  Buffer b;
  b.insert(make_record(0, {1.0}, {1}, 10));
  b.insert(make_record(1, {1.0}, {1}, 2));
  b.expire(12, 5);
  CHECK(b.contains(0));
  CHECK_FALSE(b.contains(1));
}

TEST_CASE("uploads with values outside their mask are rejected") {
  Buffer b;
  UploadRecord rec;
  rec.client_id = 0;
  rec.model = ParamVector(std::vector<double>{1.0, 2.0});
  rec.mask.bits = {1, 0};
  CHECK_THROWS_AS(b.insert(rec), StructuralError);
}

TEST_CASE("gradient-average aggregation on hand instances") {
  SUBCASE("full masks reduce to plain delta averaging") {
    const ParamVector prev(std::vector<double>{1.0, -1.0});
    const std::vector<UploadRecord> recs{
        make_record(0, {2.0, 0.0}, {1, 1}, 5),
        make_record(1, {4.0, 1.0}, {1, 1}, 5),
    };
    const ParamVector out = aggregate_ga(to_buffer(recs), prev, 2);
    CHECK(out[0] == doctest::Approx(3.0));
    CHECK(out[1] == doctest::Approx(0.5));
  }
  SUBCASE("a lone covering client contributes delta over C") {
    const ParamVector prev(std::vector<double>{1.0});
    std::vector<UploadRecord> recs;
    recs.push_back(make_record(0, {1.0 + 4.0}, {1}, 5));  // delta d = 4
    for (int c = 1; c < 4; ++c) recs.push_back(make_record(c, {0.0}, {0}, 5));
    const ParamVector out = aggregate_ga(to_buffer(recs), prev, 4);
    CHECK(out[0] == doctest::Approx(1.0 + 4.0 / 4.0));
  }
  SUBCASE("stale entries are a protocol error") {
    const ParamVector prev(std::vector<double>{0.0});
    const std::vector<UploadRecord> recs{
        make_record(0, {1.0}, {1}, 5),
        make_record(1, {1.0}, {1}, 4),
    };
    CHECK_THROWS_AS(aggregate_ga(to_buffer(recs), prev, 2), ProtocolError);
  }
}

TEST_CASE("gradient-average matches a coordinate-wise oracle on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t n = 48;
    const std::size_t clients = 3 + rng.next_below(3);
    ParamVector prev(n);
    for (auto& x : prev.v) x = rng.normal();
    std::vector<UploadRecord> recs;
    for (std::size_t c = 0; c < clients; ++c) {
      std::vector<double> vals(n);
      std::vector<std::uint8_t> bits(n);
      for (std::size_t i = 0; i < n; ++i) {
        bits[i] = rng.next_double() < 0.5 ? 1 : 0;
        vals[i] = rng.normal();
      }
      recs.push_back(make_record(static_cast<int>(c), std::move(vals), std::move(bits), 3));
    }
    const ParamVector got = aggregate_ga(to_buffer(recs), prev, clients);
    for (std::size_t i = 0; i < n; ++i) {
      double want = prev[i];
      for (const auto& r : recs) {
        if (r.mask.bits[i]) want += (r.model[i] - prev[i]) / static_cast<double>(clients);
      }
      CHECK(std::fabs(got[i] - want) <= 1e-12);
    }
  }
}

TEST_CASE("zero-padding fedavg dilutes uncovered coordinates") {
  const std::vector<UploadRecord> recs{
      make_record(0, {2.0}, {1}, 5),
      make_record(1, {4.0}, {1}, 5),
      make_record(2, {9.0}, {0}, 5),
  };
  const ParamVector out = aggregate_fa(to_buffer(recs), 3);
  CHECK(out[0] == doctest::Approx(2.0));  // (2 + 4 + 0) / 3
}

TEST_CASE("fa requires every client in comparison mode") {
  const std::vector<UploadRecord> recs{make_record(0, {2.0}, {1}, 5)};
  CHECK_THROWS_AS(aggregate_fa(to_buffer(recs), 3), ProtocolError);
}

TEST_CASE("fa equals coverage-scaled mask-aware aggregation exactly") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(2000 + seed);
    const std::size_t n = 40;
    const std::size_t clients = 4;
    std::vector<UploadRecord> recs;
    for (std::size_t c = 0; c < clients; ++c) {
      std::vector<double> vals(n);
      std::vector<std::uint8_t> bits(n);
      for (std::size_t i = 0; i < n; ++i) {
        bits[i] = rng.next_double() < 0.6 ? 1 : 0;
        vals[i] = rng.normal();
      }
      recs.push_back(make_record(static_cast<int>(c), std::move(vals), std::move(bits), 5));
    }
    const Buffer buf = to_buffer(recs);
    const ParamVector prev(n, 0.0);
    const ParamVector fa = aggregate_fa(buf, clients);
    const ParamVector ma = buff_mask_fedavg(buf, prev, 5, 0.0);  // zero staleness
    for (std::size_t i = 0; i < n; ++i) {
      int gamma = 0;
      for (const auto& r : recs) gamma += r.mask.bits[i] ? 1 : 0;
      const double want = static_cast<double>(gamma) / static_cast<double>(clients) * ma[i];
      CHECK(std::fabs(fa[i] - want) <= 1e-12);
    }
  }
}

TEST_CASE("model-space aggregation equals the gradient-form update for one synchronous round") {
  // One round: every client trains from w ⊙ m_i; the mask-aware mean must
  // equal w - Σ_i (β_i ⊙ m_i) ⊙ (γ Σ_τ grad_i), with β = 1/Γ per coordinate.
  const ModelSpec spec = ModelSpec::mlp(5, {6}, 3);
  Rng gen(42);
  const DataShard data = make_gaussian_mixture(120, 5, 3, 1.0, 0.5, gen);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng init(300 + seed);
    const ParamVector w = init_params(spec, init);
    const std::size_t n = spec.n_coords;
    SgdOptions opt;
    opt.steps = 3;
    opt.lr = 0.1;
    opt.batch_size = 10;

    std::vector<UploadRecord> recs;
    std::vector<Mask> masks;
    const std::size_t clients = 4;
    for (std::size_t c = 0; c < clients; ++c) {
      Rng mrng(Rng::derive(seed, {0xAA, c}));
      Mask m(n);
      for (auto& b : m.bits) b = mrng.next_double() < 0.7 ? 1 : 0;
      masks.push_back(m);
      Rng trng(Rng::derive(seed, {0xBB, c}));
      UploadRecord rec;
      rec.client_id = static_cast<int>(c);
      rec.mask = m;
      rec.model = masked_sgd_steps(masked(w, m), m, spec, data, opt, trng);
      rec.trained_from_round = 9;
      recs.push_back(std::move(rec));
    }
    const ParamVector got = buff_mask_fedavg(to_buffer(recs), w, 9, 0.5);

    // Gradient form: replay each client's steps, accumulating the masked
    // per-step gradients evaluated along the same trajectory.
    ParamVector grad_accum_sum(n, 0.0);
    std::vector<int> gamma(n, 0);
    std::vector<ParamVector> accums;
    for (std::size_t c = 0; c < clients; ++c) {
      Rng trng(Rng::derive(seed, {0xBB, c}));
      ParamVector wc = masked(w, masks[c]);
      ParamVector accum(n, 0.0);
      std::vector<std::size_t> perm;
      std::size_t pos = 0;
      for (std::size_t t = 0; t < opt.steps; ++t) {
        const auto idx = draw_batch(data.size(), opt, trng, perm, pos);
        ParamVector g;
        loss_and_grad(wc, spec, data, idx, g);
        for (std::size_t i = 0; i < n; ++i) {
          if (masks[c].bits[i]) {
            accum[i] += g[i];
            wc[i] -= opt.lr * g[i];
          }
        }
      }
      accums.push_back(accum);
      for (std::size_t i = 0; i < n; ++i) gamma[i] += masks[c].bits[i] ? 1 : 0;
    }
    ParamVector want = w;
    for (std::size_t i = 0; i < n; ++i) {
      if (gamma[i] == 0) continue;
      double step = 0.0;
      for (std::size_t c = 0; c < clients; ++c) {
        if (masks[c].bits[i]) step += accums[c][i] / static_cast<double>(gamma[i]);
      }
      want[i] = w[i] - opt.lr * step;
    }
    CHECK(max_abs_diff(got, want) <= 1e-10);
  }
}

namespace {

MaskSet mask_set_of(const std::vector<Mask>& masks) {
  MaskSet set;
  for (std::size_t c = 0; c < masks.size(); ++c) {
    set.masks[static_cast<int>(c)] = masks[c];
    set.densities[static_cast<int>(c)] = masks[c].density();
  }
  return set;
}

// Brute-force coverage functionals straight from the definitions.
std::pair<double, double> brute_daggers(const std::vector<Mask>& masks) {
  const std::size_t n = masks.front().size();
  std::vector<int> gamma(n, 0);
  for (const Mask& m : masks) {
    for (std::size_t i = 0; i < n; ++i) gamma[i] += m.bits[i] ? 1 : 0;
  }
  std::map<std::vector<std::uint8_t>, int> group_sizes;
  for (const Mask& m : masks) group_sizes[m.bits] += 1;
  double a = 0.0, b = 0.0;
  for (const auto& [bits, size] : group_sizes) {
    int star = 1 << 30;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits[i]) star = std::min(star, gamma[i]);
    }
    if (star == (1 << 30) || star == 0) continue;
    a += static_cast<double>(size) / star;
    b += static_cast<double>(size) / (static_cast<double>(star) * star);
  }
  return {a, b};
}

}  // namespace

TEST_CASE("full-density coverage gives the limit values") {
  std::vector<Mask> masks(10, Mask(16, 1));
  const CoverageStats cov = coverage_stats(mask_set_of(masks));
  CHECK(cov.a_dagger == doctest::Approx(1.0));
  CHECK(cov.b_dagger == doctest::Approx(0.1));
  CHECK(cov.min_gamma == 10);
  for (int g : cov.gamma) CHECK(g == 10);
}

TEST_CASE("the hand-enumerated nested four-client instance gives 1.25") {
  // Three clients share the large mask; one client holds the small nested
  // mask. Small-mask coords are covered by all four, the extra coords by 3.
  Mask small(8, 0);
  for (int i = 0; i < 3; ++i) small.bits[i] = 1;
  Mask large(8, 0);
  for (int i = 0; i < 6; ++i) large.bits[i] = 1;
  const std::vector<Mask> masks{large, large, large, small};
  const CoverageStats cov = coverage_stats(mask_set_of(masks));
  CHECK(cov.a_dagger == doctest::Approx(3.0 / 3.0 + 1.0 / 4.0));
  const auto [a, b] = brute_daggers(masks);
  CHECK(cov.a_dagger == doctest::Approx(a));
  CHECK(cov.b_dagger == doctest::Approx(b));
}

TEST_CASE("a lone client at half density has unit coverage factors") {
  Mask m(10, 0);
  for (int i = 0; i < 5; ++i) m.bits[i] = 1;
  const CoverageStats cov = coverage_stats(mask_set_of({m}));
  CHECK(cov.a_dagger == doctest::Approx(1.0));
  CHECK(cov.b_dagger == doctest::Approx(1.0));
  CHECK(cov.min_gamma == 1);
  for (std::size_t i = 0; i < 10; ++i) CHECK(cov.gamma[i] == (i < 5 ? 1 : 0));
}

TEST_CASE("coverage stats match brute force on random nested ladders") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(3000 + seed);
    ImportanceVector s;
    for (int i = 0; i < 60; ++i) s.scores.push_back(rng.next_double());
    std::map<int, double> dens;
    std::vector<Mask> masks;
    const MaskSet tmp = extract_masks(s, {{0, 1.0}});
    for (int c = 0; c < 8; ++c) {
      dens[c] = ladder[rng.next_below(5)];
      masks.push_back(tmp.derive(dens[c]));
    }
    const MaskSet set = extract_masks(s, dens);
    const CoverageStats cov = coverage_stats(set);
    const auto [a, b] = brute_daggers(masks);
    CHECK(cov.a_dagger == doctest::Approx(a).epsilon(1e-12));
    CHECK(cov.b_dagger == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("raising a client's density never lowers any coordinate coverage") {
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.5, 1.0};
  Rng rng(4000);
  ImportanceVector s;
  for (int i = 0; i < 50; ++i) s.scores.push_back(rng.next_double());
  std::map<int, double> dens{{0, 0.05}, {1, 0.1}, {2, 0.2}, {3, 1.0}};
  const MaskSet before = extract_masks(s, dens);
  const CoverageStats cov0 = coverage_stats(before);
  dens[1] = 0.2;
  const MaskSet after = extract_masks(s, dens);
  const CoverageStats cov1 = coverage_stats(after);
  for (std::size_t i = 0; i < 50; ++i) CHECK(cov1.gamma[i] >= cov0.gamma[i]);
}
