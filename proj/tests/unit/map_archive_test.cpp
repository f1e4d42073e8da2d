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

#include <cstdio>
#include <filesystem>
#include <string>

#include "tokenmix/binary_io.hpp"
#include "tokenmix/map_archive.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {
namespace {

ActivationMap random_map(int h, int w, RngStream& rng, int cls) {
  RowArray<double> raw(h, w);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = rng.uniform();
  ActivationMap m = normalize_map(raw, cls);
  // Stored as f32, so compare against the f32-representable values.
  m.values = m.values.cast<float>().cast<double>();
  return m;
}

MapArchive random_archive(std::uint64_t seed, int n) {
  RngStream rng(seed, 0, Purpose::kSynth);
  MapArchive a;
  for (int i = 0; i < n; ++i) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, 9));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, 9));
    a.records.push_back({"s" + std::to_string(i), random_map(h, w, rng, i % 8)});
  }
  return a;
}

TEST(MapArchive, RoundTripIsBitExact) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const MapArchive a = random_archive(s, 1 + static_cast<int>(s));
    const auto bytes = encode_archive(a);
    EXPECT_EQ(decode_archive(bytes), a);
    EXPECT_EQ(encode_archive(decode_archive(bytes)), bytes);
  }
}

TEST(MapArchive, EmptyArchive) {
  const MapArchive empty;
  EXPECT_EQ(decode_archive(encode_archive(empty)).records.size(), 0u);
}

TEST(MapArchive, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "tokenmix_archive_test.tmap").string();
  const MapArchive a = random_archive(3, 4);
  write_archive(a, path);
  EXPECT_EQ(read_archive(path), a);
  std::remove(path.c_str());
  EXPECT_THROW(read_archive(path), std::runtime_error);
}

TEST(MapArchive, BadMagicNamesOffsetZero) {
  auto bytes = encode_archive(random_archive(1, 2));
  bytes[0] = 'X';
  try {
    decode_archive(bytes);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(MapArchive, UnsupportedVersion) {
  auto bytes = encode_archive(random_archive(1, 1));
  bytes[4] = 9;
  EXPECT_THROW(decode_archive(bytes), ParseError);
}

TEST(MapArchive, EveryTruncationIsAParseError) {
  const auto bytes = encode_archive(random_archive(2, 3));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(decode_archive(std::span(bytes.data(), n)), ParseError) << n;
  }
}

TEST(MapArchive, TrailingBytesRejected) {
  auto bytes = encode_archive(random_archive(2, 1));
  bytes.push_back(0);
  EXPECT_THROW(decode_archive(bytes), ParseError);
}

TEST(MapArchive, DuplicateIdsRejected) {
  MapArchive a = random_archive(4, 2);
  a.records[1].sample_id = a.records[0].sample_id;
  EXPECT_THROW(decode_archive(encode_archive(a)), ParseError);
}

TEST(MapArchive, UnnormalizedMapRejected) {
  MapArchive a = random_archive(4, 1);
  a.records[0].map.values *= 2.0;
  EXPECT_THROW(decode_archive(encode_archive(a)), ParseError);
}

TEST(MapArchive, RandomCorruptionNeverCrashes) {
  const auto clean = encode_archive(random_archive(5, 4));
  RngStream rng(6, 0, Purpose::kSynth);
  int rejected = 0;
  for (int t = 0; t < 500; ++t) {
    auto bytes = clean;
    const int flips = 1 + static_cast<int>(rng.uniform_int(0, 3));
    for (int f = 0; f < flips; ++f) {
      const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()) - 1));
      bytes[at] = static_cast<std::uint8_t>(rng.next_u32());
    }
    try {
      const MapArchive a = decode_archive(bytes);
      for (const auto& r : a.records) EXPECT_TRUE(r.map.valid(kArchiveSumTolerance));
    } catch (const ParseError&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(MapArchive, IndexResamplesToLayout) {
  MapArchive a = random_archive(7, 3);
  const auto index = index_archive(a, PatchLayout::grid(5, 6));
  ASSERT_EQ(index.size(), 3u);
  for (const auto& [id, m] : index) {
    EXPECT_EQ(m.grid_h(), 5);
    EXPECT_EQ(m.grid_w(), 6);
    EXPECT_NEAR(m.values.sum(), 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace tokenmix
