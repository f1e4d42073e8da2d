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
#include <string>
#include <vector>

#include "tokenmix/grid.hpp"
#include "tokenmix/loss.hpp"
#include "tokenmix/mask_sampler.hpp"
#include "tokenmix/trainer.hpp"
#include "tokenmix/vit.hpp"

namespace tokenmix {

// Tokens chosen for dropping at `ratio`. Draws from the same stream are
// nested: a smaller ratio drops a subset of what a larger one drops.
TokenMask occlusion_mask(const PatchLayout& layout, double ratio, RngStream& rng);

/// Zeroes exactly round(ratio * N) uniformly chosen token rows.
template <typename Scalar>
RowMatrix<Scalar> occlude(const RowMatrix<Scalar>& tokens, const PatchLayout& layout,
                          double ratio, RngStream& rng) {
  const TokenMask drop = occlusion_mask(layout, ratio, rng);
  RowMatrix<Scalar> out = tokens;
  for (int t = 0; t < drop.size(); ++t) {
    if (drop.test(t)) out.row(t).setZero();
  }
  return out;
}

PatchImage<float> occlude(const PatchImage<float>& p, double ratio, RngStream& rng);

// Stream used for sample `index` under occlusion seed `seed`.
inline RngStream occlusion_stream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(seed, index, Purpose::kOcclusion);
}

struct OcclusionCurve {
  std::vector<double> ratios;
  std::vector<std::uint64_t> seeds;
  // accuracy[r][s]
  std::vector<std::vector<double>> accuracy;
  std::vector<double> mean;
  std::vector<double> stddev;

  // ratio<TAB>seed<TAB>accuracy, one row per (ratio, seed).
  std::string long_format() const;
  // ratio<TAB>mean<TAB>std
  std::string summary() const;
};

/// Accuracy under token dropping. Occlusion is applied to the normalised
/// model input, so a dropped token enters the patch embedding as zeros.
template <typename Scalar>
OcclusionCurve occlusion_sweep(const TinyViT<Scalar>& model, const Dataset& data,
                               const std::vector<double>& ratios,
                               const std::vector<std::uint64_t>& seeds, int threads = 1);

struct ConfidenceTable {
  std::vector<std::string> ids;
  std::vector<double> ratios;
  // values(sample, ratio), ground-truth-class confidence in [0, 1].
  Eigen::MatrixXd values;

  std::string to_tsv() const;
};

// Sigmoid confidences for BCE models, softmax for CE.
template <typename Scalar>
ConfidenceTable confidence_report(const TinyViT<Scalar>& model, const Dataset& data,
                                  const std::vector<double>& ratios, LossKind loss,
                                  std::uint64_t seed);

// Fraction of one attention row's patch-token mass that falls on `fg`.
// The row covers the full sequence; with a class token, entry 0 is skipped
// and the rest renormalised.
double foreground_fraction(const Eigen::Ref<const Eigen::RowVectorXd>& row, const TokenMask& fg,
                           bool class_token);

/// Per layer: mean over samples and heads of the class-token attention
/// fraction on foreground tokens.
template <typename Scalar>
std::vector<double> foreground_attention_score(const TinyViT<Scalar>& model,
                                               const Dataset& data,
                                               const std::vector<TokenMask>& fg_masks);

// "0:0.9:0.1" (inclusive range) or "0,0.25,0.5".
std::vector<double> parse_ratios(const std::string& text);

}  // namespace tokenmix
