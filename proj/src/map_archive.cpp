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

#include "tokenmix/map_archive.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace tokenmix {

std::vector<std::uint8_t> encode_archive(const MapArchive& archive) {
  ByteWriter w;
  w.bytes(std::string_view(kMapMagic, 4));
  w.u16(kMapVersion);
  w.u32(static_cast<std::uint32_t>(archive.records.size()));
  for (const MapRecord& rec : archive.records) {
    const auto& v = rec.map.values;
    if (rec.sample_id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("sample id too long: " + rec.sample_id.substr(0, 32));
    }
    if (v.rows() > std::numeric_limits<std::uint16_t>::max() ||
        v.cols() > std::numeric_limits<std::uint16_t>::max() || rec.map.class_id < 0) {
      throw std::invalid_argument("record '" + rec.sample_id + "' cannot be encoded");
    }
    w.u16(static_cast<std::uint16_t>(rec.sample_id.size()));
    w.bytes(rec.sample_id);
    w.u32(static_cast<std::uint32_t>(rec.map.class_id));
    w.u16(static_cast<std::uint16_t>(v.rows()));
    w.u16(static_cast<std::uint16_t>(v.cols()));
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) w.f32(static_cast<float>(v(r, c)));
    }
  }
  return w.buffer();
}

MapArchive decode_archive(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4, "magic") != std::string_view(kMapMagic, 4)) {
    throw ParseError("bad magic (expected \"TMAP\")", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint16_t version = r.u16("version");
  if (version != kMapVersion) {
    throw ParseError("unsupported TMAP version " + std::to_string(version), version_at);
  }
  const std::uint32_t count = r.u32("record count");
  MapArchive archive;
  // Each record needs at least 10 bytes; reject absurd counts before reserving.
  if (count > r.remaining() / 10 + 1) {
    throw ParseError("record count " + std::to_string(count) + " exceeds file size",
                     r.offset() - 4);
  }
  archive.records.reserve(count);
  std::unordered_set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t record_at = r.offset();
    MapRecord rec;
    const std::uint16_t id_len = r.u16("id length");
    rec.sample_id = r.bytes(id_len, "sample id");
    rec.map.class_id = static_cast<int>(r.u32("class id"));
    if (rec.map.class_id < 0) throw ParseError("class id out of range", record_at);
    const int gh = r.u16("grid_h");
    const int gw = r.u16("grid_w");
    if (gh == 0 || gw == 0) {
      throw ParseError("empty grid in record '" + rec.sample_id + "'", record_at);
    }
    if (r.remaining() / 4 < static_cast<std::size_t>(gh) * gw) {
      throw ParseError("truncated input while reading map values of '" + rec.sample_id + "'",
                       r.offset());
    }
    rec.map.values.resize(gh, gw);
    for (int y = 0; y < gh; ++y) {
      for (int x = 0; x < gw; ++x) rec.map.values(y, x) = r.f32("map value");
    }
    rec.map.normalized = true;
    if (!rec.map.valid(kArchiveSumTolerance)) {
      throw ParseError("map of '" + rec.sample_id + "' is not a normalized non-negative map",
                       record_at);
    }
    if (!seen.insert(rec.sample_id).second) {
      throw ParseError("duplicate sample id '" + rec.sample_id + "'", record_at);
    }
    archive.records.push_back(std::move(rec));
  }
  if (!r.at_end()) r.fail("trailing bytes after last record");
  return archive;
}

void write_archive(const MapArchive& archive, const std::string& path) {
  write_file_bytes(path, encode_archive(archive));
}

MapArchive read_archive(const std::string& path) {
  return decode_archive(read_file_bytes(path));
}

std::unordered_map<std::string, ActivationMap> index_archive(
    const MapArchive& archive, const PatchLayout& layout) {
  std::unordered_map<std::string, ActivationMap> out;
  out.reserve(archive.records.size());
  for (const MapRecord& rec : archive.records) {
    out.emplace(rec.sample_id, resize_map(rec.map, layout));
  }
  return out;
}

}  // namespace tokenmix
