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

#include "tokenmix/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tokenmix/binary_io.hpp"

namespace tokenmix {
namespace {

std::uint8_t quantize(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

// Reads one whitespace-delimited header integer, skipping '#' comments.
int header_int(std::span<const std::uint8_t> b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  long v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1 << 20) throw ParseError("PPM header value too large", start);
    ++pos;
  }
  if (pos == start) throw ParseError("malformed PPM header", start);
  return static_cast<int>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_ppm(const Image<float>& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("PPM supports 1 or 3 channels");
  }
  const std::string header = std::string(img.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(img.channels) * img.height * img.width);
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      for (int c = 0; c < img.channels; ++c) out.push_back(quantize(img(c, i, j)));
    }
  }
  return out;
}

Image<float> decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw ParseError("bad magic (expected P5 or P6)", 0);
  }
  const int channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const int w = header_int(bytes, pos);
  const int h = header_int(bytes, pos);
  const int maxval = header_int(bytes, pos);
  if (maxval != 255) throw ParseError("only 8-bit PPM is supported", pos);
  if (w <= 0 || h <= 0) throw ParseError("empty PPM image", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ParseError("missing header terminator", pos);
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - pos < need) throw ParseError("truncated PPM pixel data", bytes.size());
  Image<float> img(channels, h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < channels; ++c) img(c, i, j) = bytes[pos++] / 255.0f;
    }
  }
  return img;
}

void write_ppm(const std::string& path, const Image<float>& img) {
  write_file_bytes(path, encode_ppm(img));
}

Image<float> read_ppm(const std::string& path) { return decode_ppm(read_file_bytes(path)); }

}  // namespace tokenmix
