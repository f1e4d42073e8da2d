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

#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "tokenmix/grid.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {
namespace {

Image<float> random_image(int c, int h, int w, std::uint64_t seed) {
  RngStream rng(seed, 0, Purpose::kSynth);
  Image<float> img(c, h, w);
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
    img.pixels.data()[i] = static_cast<float>(rng.uniform());
  }
  return img;
}

TEST(PatchLayout, Validation) {
  EXPECT_THROW(PatchLayout::make(64, 64, 3, 7), std::invalid_argument);
  EXPECT_THROW(PatchLayout::make(0, 64, 3, 8), std::invalid_argument);
  EXPECT_THROW(PatchLayout::make(64, 64, 0, 8), std::invalid_argument);
  const PatchLayout l = PatchLayout::make(64, 32, 3, 8);
  EXPECT_EQ(l.grid_h(), 8);
  EXPECT_EQ(l.grid_w(), 4);
  EXPECT_EQ(l.num_tokens(), 32);
  EXPECT_EQ(l.token_dim(), 192);
}

TEST(Patchify, FirstTokenOfCountingImage) {
  Image<float> img(1, 4, 4);
  for (int i = 0; i < 16; ++i) img.pixels(i / 4, i % 4) = static_cast<float>(i);
  const PatchImage<float> p = patchify(img, PatchLayout::make(4, 4, 1, 2));
  ASSERT_EQ(p.tokens.rows(), 4);
  EXPECT_EQ(p.tokens.row(0), (Eigen::RowVector4f() << 0, 1, 4, 5).finished());
  EXPECT_EQ(p.tokens.row(1), (Eigen::RowVector4f() << 2, 3, 6, 7).finished());
  EXPECT_EQ(p.tokens.row(3), (Eigen::RowVector4f() << 10, 11, 14, 15).finished());
}

TEST(Patchify, ChannelMajorWithinToken) {
  Image<float> img(2, 2, 2);
  img(0, 0, 0) = 1;
  img(1, 0, 0) = 2;
  const PatchImage<float> p = patchify(img, PatchLayout::make(2, 2, 2, 2));
  EXPECT_EQ(p.tokens(0, 0), 1);
  EXPECT_EQ(p.tokens(0, 4), 2);
}

TEST(Patchify, RoundTripIsBitExact) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int p = 1 + static_cast<int>(s % 4);
    const PatchLayout l = PatchLayout::make(p * 3, p * 5, 1 + static_cast<int>(s % 3), p);
    const Image<float> img = random_image(l.channels, l.image_h, l.image_w, s);
    EXPECT_EQ(unpatchify(patchify(img, l)), img);
  }
}

TEST(Patchify, LayoutMismatchThrows) {
  const Image<float> img(3, 16, 16);
  EXPECT_THROW(patchify(img, PatchLayout::make(32, 32, 3, 8)), std::invalid_argument);
}

TEST(TokenMask, CountTracksSetAndClear) {
  TokenMask m(3, 3);
  m.set(0);
  m.set(0);
  m.set(4);
  EXPECT_EQ(m.count(), 2);
  m.set(0, false);
  EXPECT_EQ(m.count(), 1);
  EXPECT_DOUBLE_EQ(m.coverage(), 1.0 / 9);
  EXPECT_EQ(mask_complement(m).count(), 8);
}

TEST(TokenMask, HexRoundTrip) {
  RngStream rng(2, 0, Purpose::kMask);
  for (int t = 0; t < 50; ++t) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, 15));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, 15));
    TokenMask m(h, w);
    for (int i = 0; i < m.size(); ++i) m.set(i, rng.uniform() < 0.5);
    EXPECT_EQ(TokenMask::from_hex(h, w, m.to_hex()), m);
  }
  TokenMask m(1, 5);
  m.set(0);
  m.set(4);
  EXPECT_EQ(m.to_hex(), "88");
  EXPECT_THROW(TokenMask::from_hex(1, 5, "8"), std::invalid_argument);
  EXPECT_THROW(TokenMask::from_hex(1, 5, "zz"), std::invalid_argument);
}

TEST(MaskStats, MatchesUnionFindOracle) {
  RngStream rng(4, 0, Purpose::kMask);
  for (int t = 0; t < 300; ++t) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, 15));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, 15));
    const double p = rng.uniform();
    TokenMask m(h, w);
    std::vector<int> cells(static_cast<std::size_t>(h * w));
    for (int i = 0; i < m.size(); ++i) {
      const bool on = rng.uniform() < p;
      m.set(i, on);
      cells[static_cast<std::size_t>(i)] = on;
    }
    const MaskStats s = mask_stats(m);
    EXPECT_EQ(s.components, oracle::count_components(cells, h, w, 1));
    EXPECT_EQ(s.count, m.count());
    int total = 0;
    for (int c : s.component_sizes) total += c;
    EXPECT_EQ(total, m.count());
  }
}

TEST(MaskStats, DiagonalCellsAreSeparate) {
  const TokenMask m = TokenMask::from_bits(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(mask_stats(m).components, 2);
}

}  // namespace
}  // namespace tokenmix
