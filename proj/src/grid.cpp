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

#include "tokenmix/grid.hpp"

#include <algorithm>
#include <numeric>

namespace tokenmix {

PatchLayout PatchLayout::make(int image_h, int image_w, int channels,
                              int patch_size) {
  PatchLayout l{image_h, image_w, channels, patch_size};
  if (image_h <= 0 || image_w <= 0 || channels <= 0 || patch_size <= 0) {
    throw std::invalid_argument("layout fields must be positive: " +
                                to_string(l));
  }
  if (image_h % patch_size != 0 || image_w % patch_size != 0) {
    throw std::invalid_argument("patch size must divide the image: " +
                                to_string(l));
  }
  return l;
}

PatchLayout PatchLayout::grid(int grid_h, int grid_w) {
  return make(grid_h, grid_w, 1, 1);
}

std::string to_string(const PatchLayout& l) {
  return std::to_string(l.image_h) + "x" + std::to_string(l.image_w) + "x" +
         std::to_string(l.channels) + "/P" + std::to_string(l.patch_size);
}

TokenMask::TokenMask(int grid_h, int grid_w, bool fill)
    : grid_h_(grid_h), grid_w_(grid_w) {
  if (grid_h < 0 || grid_w < 0) {
    throw std::invalid_argument("TokenMask: negative grid");
  }
  bits_.assign(static_cast<std::size_t>(grid_h) * grid_w, fill ? 1 : 0);
  count_ = fill ? size() : 0;
}

TokenMask TokenMask::from_bits(int grid_h, int grid_w,
                               std::vector<std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(grid_h) * grid_w) {
    throw std::invalid_argument("TokenMask: bit count does not match grid");
  }
  TokenMask m(grid_h, grid_w);
  for (auto& b : bits) b = b ? 1 : 0;
  m.count_ = static_cast<int>(std::accumulate(bits.begin(), bits.end(), 0));
  m.bits_ = std::move(bits);
  return m;
}

void TokenMask::set(int index, bool value) {
  std::uint8_t& b = bits_.at(index);
  const std::uint8_t v = value ? 1 : 0;
  count_ += static_cast<int>(v) - static_cast<int>(b);
  b = v;
}

std::string TokenMask::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits_.size() + 3) / 4);
  for (std::size_t i = 0; i < bits_.size(); i += 4) {
    int nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      nibble <<= 1;
      if (i + k < bits_.size()) nibble |= bits_[i + k];
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

TokenMask TokenMask::from_hex(int grid_h, int grid_w, const std::string& hex) {
  const std::size_t n = static_cast<std::size_t>(grid_h) * grid_w;
  if (hex.size() != (n + 3) / 4) {
    throw std::invalid_argument("mask hex has wrong length");
  }
  std::vector<std::uint8_t> bits(n);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char ch = hex[d];
    int nibble;
    if (ch >= '0' && ch <= '9') {
      nibble = ch - '0';
    } else if (ch >= 'a' && ch <= 'f') {
      nibble = ch - 'a' + 10;
    } else {
      throw std::invalid_argument("mask hex has invalid digit");
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t i = d * 4 + k;
      if (i < n) bits[i] = (nibble >> (3 - k)) & 1;
    }
  }
  return from_bits(grid_h, grid_w, std::move(bits));
}

TokenMask mask_complement(const TokenMask& mask) {
  std::vector<std::uint8_t> bits(mask.bits().begin(), mask.bits().end());
  for (auto& b : bits) b ^= 1;
  return TokenMask::from_bits(mask.grid_h(), mask.grid_w(), std::move(bits));
}

MaskStats mask_stats(const TokenMask& mask) {
  MaskStats stats;
  stats.count = mask.count();
  stats.coverage = mask.coverage();
  const int h = mask.grid_h();
  const int w = mask.grid_w();
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<int> stack;
  for (int start = 0; start < mask.size(); ++start) {
    if (!mask.test(start) || seen[start]) continue;
    int size = 0;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      ++size;
      const int r = cur / w;
      const int c = cur % w;
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& rc : nbr) {
        if (rc[0] < 0 || rc[0] >= h || rc[1] < 0 || rc[1] >= w) continue;
        const int idx = rc[0] * w + rc[1];
        if (mask.test(idx) && !seen[idx]) {
          seen[idx] = 1;
          stack.push_back(idx);
        }
      }
    }
    stats.component_sizes.push_back(size);
  }
  stats.components = static_cast<int>(stats.component_sizes.size());
  return stats;
}

}  // namespace tokenmix
