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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tokenmix/grid.hpp"

namespace tokenmix {

enum class Shape { kDisk, kSquare, kTriangle, kCross, kRing, kBarH, kBarV, kChecker };
inline constexpr int kNumShapes = 8;

std::string to_string(Shape s);

struct SynthOptions {
  int image_size = 64;
  int channels = 3;
  int patch_size = 8;
  // Shape extent as a fraction of the frame side.
  double scale_min = 0.4;
  double scale_max = 0.75;
  // Minimum fraction of a patch the shape must cover for the token to count
  // as foreground.
  double fg_threshold = 0.25;

  PatchLayout layout() const {
    return PatchLayout::make(image_size, image_size, channels, patch_size);
  }
};

struct ShapeParams {
  Shape shape = Shape::kDisk;
  double center_x = 0.0;  // pixels
  double center_y = 0.0;
  double extent = 0.0;    // pixels, full side of the bounding square
  std::array<float, 3> color{};
};

// Pixel-centre inside test for the shape described by `params`.
bool shape_contains(const ShapeParams& params, double x, double y);

// Binary raster (1 = shape) of size image_size x image_size.
RowArray<std::uint8_t> shape_raster(const ShapeParams& params, int image_size);

struct SynthSample {
  std::string id;
  Image<float> image;
  int label = 0;
  TokenMask fg_mask;
  std::uint64_t gen_seed = 0;
  ShapeParams params;
};

// Parameters drawn for (label, seed). Deterministic.
ShapeParams draw_shape(int label, std::uint64_t seed, const SynthOptions& opts = {});

/// One labelled image: flat-coloured shape over a low-contrast noise
/// background. fg_mask marks tokens whose patch is covered by the shape to at
/// least fg_threshold; if no patch qualifies the best-covered token is used.
SynthSample gen_sample(int label, std::uint64_t seed, const SynthOptions& opts = {});

std::uint64_t sample_seed(std::uint64_t dataset_seed, int label, int index);
std::string sample_id(int label, int index);

// n_per_class samples per class, ordered by index then class.
std::vector<SynthSample> gen_dataset(int n_per_class, std::uint64_t seed,
                                     const SynthOptions& opts = {},
                                     int num_classes = kNumShapes);

// Foreground tokens from a raster given the layout and threshold.
TokenMask foreground_tokens(const RowArray<std::uint8_t>& raster,
                            const PatchLayout& layout, double threshold);

}  // namespace tokenmix
