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

#include "tokenmix/grid.hpp"
#include "tokenmix/mask_sampler.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {

enum class MixStrategy { kNone, kMixup, kCutMix, kTokenMix };

std::string to_string(MixStrategy s);
MixStrategy parse_mix_strategy(const std::string& s);

/// Everything needed to replay one mixed sample bit-exactly.
struct MixRecipe {
  MixStrategy strategy = MixStrategy::kNone;
  double lambda = 1.0;
  std::optional<TokenMask> mask;
  int index_a = 0;
  int index_b = 0;
  RngKey rng_key;

  // mask present iff strategy is CutMix or TokenMix; lambda in [0, 1].
  bool valid() const;
};

/// Rows of `a` where the mask is set, rows of `b` elsewhere.
template <typename Scalar>
PatchImage<Scalar> token_mix(const PatchImage<Scalar>& a,
                             const PatchImage<Scalar>& b,
                             const TokenMask& mask) {
  if (!(a.layout == b.layout) || !mask.matches(a.layout)) {
    throw std::invalid_argument("token_mix: layout mismatch");
  }
  PatchImage<Scalar> out = b;
  for (int i = 0; i < mask.size(); ++i) {
    if (mask.test(i)) out.tokens.row(i) = a.tokens.row(i);
  }
  return out;
}

template <typename Scalar>
Image<Scalar> mixup(const Image<Scalar>& a, const Image<Scalar>& b,
                    double lambda) {
  if (a.channels != b.channels || a.height != b.height ||
      a.width != b.width) {
    throw std::invalid_argument("mixup: dimension mismatch");
  }
  if (lambda == 1.0) return a;
  if (lambda == 0.0) return b;
  const auto l = static_cast<Scalar>(lambda);
  Image<Scalar> out = a;
  out.pixels = l * a.pixels + (Scalar(1) - l) * b.pixels;
  return out;
}

template <typename Scalar>
struct CutMixResult {
  Image<Scalar> image;
  double lambda_actual = 0.0;
  TokenMask mask;
};

/// Rectangle paste on the token grid of `layout`; lambda_actual is the
/// fraction of tokens kept from `a` after clipping.
template <typename Scalar>
CutMixResult<Scalar> cutmix(const Image<Scalar>& a, const Image<Scalar>& b,
                            const PatchLayout& layout, double lambda,
                            RngStream& rng) {
  RegionMask region = sample_region_mask(layout, lambda, rng);
  const PatchImage<Scalar> mixed =
      token_mix(patchify(a, layout), patchify(b, layout), region.mask);
  return {unpatchify(mixed), region.lambda_actual, std::move(region.mask)};
}

}  // namespace tokenmix
