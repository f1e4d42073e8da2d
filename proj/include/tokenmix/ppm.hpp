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
#include <vector>

#include "tokenmix/grid.hpp"

namespace tokenmix {

// Binary 8-bit portable pixmap: P6 for 3 channels, P5 for 1. Values are
// clamped to [0, 1] and rounded to the nearest of 256 levels.
std::vector<std::uint8_t> encode_ppm(const Image<float>& img);
Image<float> decode_ppm(std::span<const std::uint8_t> bytes);

void write_ppm(const std::string& path, const Image<float>& img);
Image<float> read_ppm(const std::string& path);

}  // namespace tokenmix
