// Copyright 2026 The TokenMix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tokenmix/mask_sampler.hpp"
#include "tokenmix/rng.hpp"
#include "tokenmix/targets.hpp"
#include "tokenmix/teacher.hpp"

namespace tokenmix {
namespace {

RowArray<double> random_grid(int h, int w, std::uint64_t seed, double lo = 0.0) {
  RngStream rng(seed, 0, Purpose::kSynth);
  RowArray<double> g(h, w);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = lo + (1.0 - lo) * rng.uniform();
  return g;
}

ActivationMap uniform_map(int h, int w) {
  return normalize_map(RowArray<double>::Ones(h, w));
}

TEST(NormalizeMap, EqualPositiveIsUniform) {
  const ActivationMap m = normalize_map(RowArray<double>::Constant(3, 5, 2.5), 4);
  EXPECT_TRUE((m.values == 1.0 / 15).all());
  EXPECT_EQ(m.class_id, 4);
  EXPECT_TRUE(m.normalized);
}

TEST(NormalizeMap, DegenerateFallsBackToUniform) {
  EXPECT_TRUE((normalize_map(RowArray<double>::Zero(2, 2)).values == 0.25).all());
  EXPECT_TRUE((normalize_map(RowArray<double>::Constant(2, 2, -1)).values == 0.25).all());
}

TEST(NormalizeMap, MixedSignMatchesClampThenDivide) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RowArray<double> raw = random_grid(7, 7, s, -1.0);
    const RowArray<double> clamped = raw.max(0.0);
    const ActivationMap m = normalize_map(raw);
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      EXPECT_NEAR(m.values.data()[i], clamped.data()[i] / clamped.sum(), 1e-12);
    }
    EXPECT_NEAR(m.values.sum(), 1.0, 1e-9);
    EXPECT_TRUE(m.valid());
  }
}

TEST(NormalizeMap, RejectsNonFinite) {
  RowArray<double> raw = RowArray<double>::Ones(2, 2);
  raw(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(normalize_map(raw), std::invalid_argument);
  raw(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(normalize_map(raw), std::invalid_argument);
}

TEST(ResizeMap, SameSizeIsIdentity) {
  const ActivationMap m = normalize_map(random_grid(6, 5, 3));
  const ActivationMap r = resize_map(m, 6, 5);
  EXPECT_TRUE(((r.values - m.values).abs() < 1e-9).all());
}

TEST(ResizeMap, UniformStaysUniform) {
  for (auto [h, w] : {std::pair{3, 3}, std::pair{14, 14}, std::pair{5, 9}}) {
    const ActivationMap r = resize_map(uniform_map(8, 8), h, w);
    EXPECT_TRUE(((r.values - 1.0 / (h * w)).abs() < 1e-12).all());
  }
}

TEST(ResizeMap, DeltaUpsampleMatchesBilinearOracle) {
  for (int cell = 0; cell < 4; ++cell) {
    RowArray<double> delta = RowArray<double>::Zero(2, 2);
    delta(cell / 2, cell % 2) = 1.0;
    const ActivationMap r = resize_map(normalize_map(delta), 4, 4);
    Eigen::ArrayXXd expect = oracle::bilinear(delta, 4, 4);
    expect /= expect.sum();
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) EXPECT_NEAR(r.values(i, j), expect(i, j), 1e-9);
    }
  }
}

TEST(ResizeMap, RandomDownsampleMatchesOracle) {
  const RowArray<double> raw = random_grid(8, 8, 9);
  const ActivationMap r = resize_map(normalize_map(raw), 14, 5);
  Eigen::ArrayXXd expect = oracle::bilinear(raw / raw.sum(), 14, 5);
  expect /= expect.sum();
  EXPECT_LT((r.values - expect).abs().maxCoeff(), 1e-9);
}

TEST(TokenMixTarget, UniformMapsGiveAreaFractions) {
  const PatchLayout l = PatchLayout::grid(14, 14);
  for (std::uint64_t s = 0; s < 200; ++s) {
    RngStream rng(s, 0, Purpose::kMask);
    const TokenMask m = sample_block_mask(l, 0.5, SamplerConfig{}, rng);
    const SoftTarget t = tokenmix_target(m, uniform_map(14, 14), uniform_map(14, 14), 2, 5, 8);
    const SoftTarget lin = linear_target(m.coverage(), 2, 5, 8);
    EXPECT_NEAR(t.score(2), lin.score(2), 1e-12);
    EXPECT_NEAR(t.score(5), lin.score(5), 1e-12);
  }
}

TEST(TokenMixTarget, DisjointSupportsGiveOneAndOne) {
  TokenMask m(2, 2);
  m.set(0);
  m.set(1);
  const ActivationMap a = normalize_map((RowArray<double>(2, 2) << 1, 3, 0, 0).finished());
  const ActivationMap b = normalize_map((RowArray<double>(2, 2) << 0, 0, 2, 2).finished());
  const SoftTarget t = tokenmix_target(m, a, b, 0, 1, 3);
  EXPECT_DOUBLE_EQ(t.score(0), 1.0);
  EXPECT_DOUBLE_EQ(t.score(1), 1.0);
  EXPECT_DOUBLE_EQ(t.score(2), 0.0);
}

TEST(TokenMixTarget, MatchesBruteForceSummation) {
  const PatchLayout l = PatchLayout::grid(8, 8);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const ActivationMap a = normalize_map(random_grid(8, 8, 3 * s));
    const ActivationMap b = normalize_map(random_grid(8, 8, 3 * s + 1));
    RngStream rng(s, 0, Purpose::kMask);
    const TokenMask m = sample_random_mask(l, rng.uniform(), rng);
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (m.test(i, j)) {
          sa += a.values(i, j);
        } else {
          sb += b.values(i, j);
        }
      }
    }
    const SoftTarget t = tokenmix_target(m, a, b, 1, 6, 8);
    EXPECT_NEAR(t.score(1), sa, 1e-12);
    EXPECT_NEAR(t.score(6), sb, 1e-12);
    EXPECT_LE(t.entries.size(), 2u);
    for (const auto& [c, v] : t.entries) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(TokenMixTarget, SameClassAccumulatesAndClamps) {
  TokenMask m(2, 2);
  m.set(0);
  const ActivationMap a = normalize_map((RowArray<double>(2, 2) << 1, 0, 0, 0).finished());
  const ActivationMap b = normalize_map((RowArray<double>(2, 2) << 0, 1, 1, 0).finished());
  const SoftTarget t = tokenmix_target(m, a, b, 3, 3, 4);
  EXPECT_DOUBLE_EQ(t.score(3), 1.0);
  EXPECT_EQ(t.entries.size(), 1u);
}

TEST(TokenMixTarget, Errors) {
  const ActivationMap u = uniform_map(4, 4);
  EXPECT_THROW(tokenmix_target(TokenMask(3, 3), u, u, 0, 1, 2), std::invalid_argument);
  ActivationMap raw;
  raw.values = RowArray<double>::Ones(4, 4);
  raw.normalized = false;
  EXPECT_THROW(tokenmix_target(TokenMask(4, 4), raw, u, 0, 1, 2), std::invalid_argument);
  EXPECT_THROW(tokenmix_target(TokenMask(4, 4), u, u, 0, 2, 2), std::invalid_argument);
}

TEST(LinearTarget, Examples) {
  const SoftTarget t = linear_target(0.5, 3, 7, 8);
  EXPECT_DOUBLE_EQ(t.score(3), 0.5);
  EXPECT_DOUBLE_EQ(t.score(7), 0.5);
  const SoftTarget one = linear_target(1.0, 3, 7, 8);
  EXPECT_EQ(one.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(one.score(3), 1.0);
  const SoftTarget same = linear_target(0.3, 2, 2, 8);
  EXPECT_EQ(same.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(same.score(2), 1.0);
  EXPECT_DOUBLE_EQ(same.dense().sum(), 1.0);
}

TEST(OracleMap, Shapes) {
  const ActivationMap full = oracle_map(TokenMask(3, 3, true), 1);
  EXPECT_TRUE(((full.values - 1.0 / 9).abs() < 1e-15).all());
  TokenMask one(3, 3);
  one.set(4);
  const ActivationMap delta = oracle_map(one);
  EXPECT_EQ(delta.values(1, 1), 1.0);
  EXPECT_EQ(delta.values.sum(), 1.0);
  EXPECT_TRUE(((oracle_map(TokenMask(2, 2)).values - 0.25).abs() < 1e-15).all());
}

TEST(OracleMap, ScoreIsIntersectionFraction) {
  const PatchLayout l = PatchLayout::grid(8, 8);
  for (std::uint64_t s = 0; s < 200; ++s) {
    RngStream rng(s, 0, Purpose::kMask);
    TokenMask fg = sample_random_mask(l, 0.05 + 0.9 * rng.uniform(), rng);
    const TokenMask m = sample_block_mask(l, 0.5, SamplerConfig{}, rng);
    int inter = 0;
    for (int t = 0; t < 64; ++t) inter += m.test(t) && fg.test(t);
    const SoftTarget t = tokenmix_target(m, oracle_map(fg), oracle_map(TokenMask(8, 8, true)), 0,
                                         1, 2);
    EXPECT_EQ(std::lround(t.score(0) * fg.count()), inter);
    EXPECT_NEAR(t.score(0), static_cast<double>(inter) / fg.count(), 64 * 0x1p-52);
  }
}

}  // namespace
}  // namespace tokenmix
