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

#include "tokenmix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tokenmix/rng.hpp"

namespace tokenmix {

std::string to_string(Shape s) {
  switch (s) {
    case Shape::kDisk: return "disk";
    case Shape::kSquare: return "square";
    case Shape::kTriangle: return "triangle";
    case Shape::kCross: return "cross";
    case Shape::kRing: return "ring";
    case Shape::kBarH: return "bar-h";
    case Shape::kBarV: return "bar-v";
    case Shape::kChecker: return "checker";
  }
  return "?";
}

bool shape_contains(const ShapeParams& p, double x, double y) {
  const double half = 0.5 * p.extent;
  const double u = (x - p.center_x) / half;
  const double v = (y - p.center_y) / half;
  const double au = std::abs(u);
  const double av = std::abs(v);
  switch (p.shape) {
    case Shape::kDisk:
      return u * u + v * v <= 1.0;
    case Shape::kSquare:
      return au <= 0.8 && av <= 0.8;
    case Shape::kTriangle:
      // apex up
      return v >= -0.9 && v <= 0.8 && au <= 0.9 * (v + 0.9) / 1.7;
    case Shape::kCross:
      return (au <= 0.25 && av <= 0.9) || (av <= 0.25 && au <= 0.9);
    case Shape::kRing: {
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.36;
    }
    case Shape::kBarH:
      return av <= 0.25 && au <= 1.0;
    case Shape::kBarV:
      return au <= 0.25 && av <= 1.0;
    case Shape::kChecker: {
      if (au > 0.9 || av > 0.9) return false;
      const int cu = std::min(3, static_cast<int>((u + 0.9) / 0.45));
      const int cv = std::min(3, static_cast<int>((v + 0.9) / 0.45));
      return (cu + cv) % 2 == 0;
    }
  }
  return false;
}

RowArray<std::uint8_t> shape_raster(const ShapeParams& params, int image_size) {
  RowArray<std::uint8_t> raster(image_size, image_size);
  for (int i = 0; i < image_size; ++i) {
    for (int j = 0; j < image_size; ++j) {
      raster(i, j) = shape_contains(params, j + 0.5, i + 0.5) ? 1 : 0;
    }
  }
  return raster;
}

ShapeParams draw_shape(int label, std::uint64_t seed, const SynthOptions& opts) {
  if (label < 0 || label >= kNumShapes) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range");
  }
  RngStream rng(seed, 0, Purpose::kSynth);
  ShapeParams p;
  p.shape = static_cast<Shape>(label);
  const double size = opts.image_size;
  p.extent = size * (opts.scale_min + (opts.scale_max - opts.scale_min) * rng.uniform());
  const double half = 0.5 * p.extent;
  p.center_x = half + (size - p.extent) * rng.uniform();
  p.center_y = half + (size - p.extent) * rng.uniform();
  for (auto& c : p.color) c = static_cast<float>(rng.uniform());
  return p;
}

TokenMask foreground_tokens(const RowArray<std::uint8_t>& raster,
                            const PatchLayout& layout, double threshold) {
  const int ps = layout.patch_size;
  TokenMask fg(layout.grid_h(), layout.grid_w());
  int best = -1;
  int best_count = 0;
  for (int r = 0; r < layout.grid_h(); ++r) {
    for (int c = 0; c < layout.grid_w(); ++c) {
      const int covered = raster.block(r * ps, c * ps, ps, ps).cast<int>().sum();
      if (covered >= threshold * ps * ps) fg.set(r, c);
      if (covered > best_count) {
        best_count = covered;
        best = r * layout.grid_w() + c;
      }
    }
  }
  if (fg.count() == 0 && best >= 0) fg.set(best);
  return fg;
}

SynthSample gen_sample(int label, std::uint64_t seed, const SynthOptions& opts) {
  const PatchLayout layout = opts.layout();
  SynthSample s;
  s.label = label;
  s.gen_seed = seed;
  s.params = draw_shape(label, seed, opts);

  // Background: per-channel grey level plus small per-pixel jitter.
  RngStream bg(seed, 1, Purpose::kSynth);
  const int n = opts.image_size;
  s.image = Image<float>(opts.channels, n, n);
  std::array<double, 3> base{};
  for (auto& b : base) b = 0.35 + 0.3 * bg.uniform();
  for (int ch = 0; ch < opts.channels; ++ch) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s.image(ch, i, j) = static_cast<float>(base[ch % 3] + 0.2 * (bg.uniform() - 0.5));
      }
    }
  }

  const RowArray<std::uint8_t> raster = shape_raster(s.params, n);
  for (int ch = 0; ch < opts.channels; ++ch) {
    s.image.plane(ch) = (raster == 1).select(s.params.color[ch % 3], s.image.plane(ch));
  }
  s.fg_mask = foreground_tokens(raster, layout, opts.fg_threshold);
  return s;
}

std::uint64_t sample_seed(std::uint64_t dataset_seed, int label, int index) {
  return hash_combine(hash_combine(dataset_seed, static_cast<std::uint64_t>(label)),
                      static_cast<std::uint64_t>(index));
}

std::string sample_id(int label, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%d_%05d", label, index);
  return buf;
}

std::vector<SynthSample> gen_dataset(int n_per_class, std::uint64_t seed,
                                     const SynthOptions& opts, int num_classes) {
  if (n_per_class < 1) throw std::invalid_argument("empty dataset");
  if (num_classes < 1 || num_classes > kNumShapes) {
    throw std::invalid_argument("num_classes must be in [1, 8]");
  }
  std::vector<SynthSample> out;
  out.reserve(static_cast<std::size_t>(n_per_class) * num_classes);
  for (int i = 0; i < n_per_class; ++i) {
    for (int c = 0; c < num_classes; ++c) {
      SynthSample s = gen_sample(c, sample_seed(seed, c, i), opts);
      s.id = sample_id(c, i);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace tokenmix
