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

#include <optional>
#include <string>
#include <vector>

#include "tokenmix/grid.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {

enum class MaskStrategy { kRegion, kRandom, kBlock };

std::string to_string(MaskStrategy s);
MaskStrategy parse_mask_strategy(const std::string& s);

/// Mixing-ratio distribution: a constant or a symmetric Beta(alpha, alpha).
struct LambdaMode {
  enum class Kind { kFixed, kBeta };
  Kind kind = Kind::kFixed;
  double value = 0.5;  // the constant, or alpha

  static LambdaMode fixed(double v) { return {Kind::kFixed, v}; }
  static LambdaMode beta(double alpha) { return {Kind::kBeta, alpha}; }

  // Accepts "0.5" or "beta:1.0".
  static LambdaMode parse(const std::string& s);
  std::string str() const;
};

struct SamplerConfig {
  MaskStrategy strategy = MaskStrategy::kBlock;
  LambdaMode lambda = LambdaMode::fixed(0.5);
  // 0 selects max(1, round(14 * N / 196)) for an N-token grid.
  int min_block_tokens = 0;
  double aspect_low = 0.3;
  double aspect_high = 1.0 / 0.3;

  void validate() const;
  int resolved_min_block_tokens(int num_tokens) const;
};

// round(lambda * num_tokens), the exact set-bit count every sampler hits.
int target_count(double lambda, int num_tokens);

double sample_lambda(const SamplerConfig& cfg, RngStream& rng);

// One rectangle placed by the block sampler.
struct BlockPlacement {
  int size_drawn = 0;
  double aspect = 1.0;
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
  int newly_set = 0;
  bool clamped = false;  // h or w hit the grid bound
};

struct BlockTrace {
  std::vector<BlockPlacement> placements;
  int trimmed = 0;
  int fallback_filled = 0;
};

/// Union of random rectangles, each targeting at least min_block_tokens
/// tokens with a log-uniform aspect ratio, repeated until round(lambda*N)
/// tokens are set. Overshoot from the last rectangle is trimmed at random
/// among the bits it set, so the count is always exact.
TokenMask sample_block_mask(const PatchLayout& layout, double lambda,
                            const SamplerConfig& cfg, RngStream& rng,
                            BlockTrace* trace = nullptr);

// Exactly round(lambda*N) tokens, uniformly without replacement.
TokenMask sample_random_mask(const PatchLayout& layout, double lambda,
                             RngStream& rng);

struct RegionMask {
  TokenMask mask;
  double lambda_actual = 0.0;
};

// CutMix-style: everything set except one clipped rectangle of side
// round(g * sqrt(1 - lambda)) centred on a uniformly drawn token.
RegionMask sample_region_mask(const PatchLayout& layout, double lambda,
                              RngStream& rng);

// Strategy dispatch. lambda_actual is always the realised coverage.
RegionMask sample_mask(const PatchLayout& layout, double lambda,
                       const SamplerConfig& cfg, RngStream& rng);

}  // namespace tokenmix
