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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tokenmix/binary_io.hpp"
#include "tokenmix/targets.hpp"

namespace tokenmix {

// TMAP layout, all integers little-endian:
//   "TMAP" | u16 version (=1) | u32 record count
//   per record: u16 id length | id bytes (UTF-8) | u32 class_id |
//               u16 grid_h | u16 grid_w | grid_h*grid_w f32, row-major
inline constexpr char kMapMagic[4] = {'T', 'M', 'A', 'P'};
inline constexpr std::uint16_t kMapVersion = 1;

struct MapRecord {
  std::string sample_id;
  ActivationMap map;  // map.class_id mirrors the record's class

  friend bool operator==(const MapRecord& a, const MapRecord& b) {
    return a.sample_id == b.sample_id && a.map.class_id == b.map.class_id &&
           a.map.normalized == b.map.normalized &&
           a.map.values.rows() == b.map.values.rows() &&
           a.map.values.cols() == b.map.values.cols() &&
           (a.map.values == b.map.values).all();
  }
};

struct MapArchive {
  std::vector<MapRecord> records;

  friend bool operator==(const MapArchive&, const MapArchive&) = default;
};

// Float32 storage means a map is accepted as normalized when its stored sum
// is within this distance of 1.
inline constexpr double kArchiveSumTolerance = 1e-5;

std::vector<std::uint8_t> encode_archive(const MapArchive& archive);
// Throws ParseError (with byte offset) on bad magic, unsupported version,
// truncation, duplicate ids, unnormalized or non-finite maps, trailing bytes.
MapArchive decode_archive(std::span<const std::uint8_t> bytes);

void write_archive(const MapArchive& archive, const std::string& path);
MapArchive read_archive(const std::string& path);

// Resamples every record onto the student token grid, keyed by sample id.
std::unordered_map<std::string, ActivationMap> index_archive(
    const MapArchive& archive, const PatchLayout& layout);

}  // namespace tokenmix
