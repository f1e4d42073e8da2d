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
#include <functional>
#include <span>
#include <vector>

#include "tokenmix/grid.hpp"
#include "tokenmix/params.hpp"

namespace tokenmix {

struct TinyViTConfig {
  PatchLayout layout = PatchLayout::make(64, 64, 3, 8);
  int embed_dim = 64;
  int depth = 4;
  int heads = 4;
  int mlp_ratio = 4;
  int num_classes = 8;
  // Pool with a learned class token; otherwise average the patch tokens.
  bool class_token = true;
  bool final_norm = true;

  void validate() const;
  int sequence_length() const { return layout.num_tokens() + (class_token ? 1 : 0); }
  int head_dim() const { return embed_dim / heads; }
};

// depth 0, mean pooling, no norm: logits are an affine function of the input.
TinyViTConfig linear_probe_config(const PatchLayout& layout, int embed_dim, int num_classes);

/// Pre-norm vision transformer with a hand-written reverse pass.
///
/// All parameters live in one flat vector described by layout(); gradients
/// use the same packing, so optimisers and finite-difference checks operate
/// on plain vectors.
template <typename Scalar>
class TinyViT {
 public:
  using Mat = RowMatrix<Scalar>;
  using Vec = Vector<Scalar>;

  explicit TinyViT(TinyViTConfig cfg);

  const TinyViTConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  Eigen::Map<Mat> param(const std::string& name) { return layout_.view(params_, layout_.find(name)); }
  Eigen::Map<const Mat> param(const std::string& name) const {
    return layout_.view(params_, layout_.find(name));
  }

  // Weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), embeddings N(0, 0.02^2),
  // zero biases, unit norm gains.
  void init(std::uint64_t seed);

  struct Output {
    Vec logits;
    // Per layer: heads x sequence_length attention row of the class token
    // (the pooled query row when there is no class token).
    std::vector<Mat> cls_attention;
  };

  // tokens: num_tokens x token_dim, already normalised.
  Output forward(const Mat& tokens, bool keep_attention = false) const;

  // Loss callback: receives logits, writes dL/dlogits, returns L.
  using LossFn = std::function<Scalar(const Vec& logits, Vec& dlogits)>;

  // Forward + reverse pass; adds dL/dparams into `grad` (size layout().size()).
  Scalar accumulate_gradient(const Mat& tokens, const LossFn& loss, Vec& grad,
                             Vec* logits_out = nullptr) const;

  template <typename Other>
  TinyViT<Other> cast() const {
    TinyViT<Other> out(cfg_);
    out.params() = params_.template cast<Other>();
    return out;
  }

 private:
  struct BlockIds {
    int ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b, ln2_g, ln2_b, fc1_w, fc1_b, fc2_w, fc2_b;
  };
  struct Cache;

  Mat embed(const Mat& tokens) const;
  Output run(const Mat& tokens, bool keep_attention, Cache* cache) const;

  TinyViTConfig cfg_;
  ParamLayout layout_;
  int patch_w_ = 0, patch_b_ = 0, cls_ = -1, pos_ = 0;
  std::vector<BlockIds> blocks_;
  int norm_g_ = -1, norm_b_ = -1, head_w_ = 0, head_b_ = 0;
  Vec params_;
};

// (x - mean) / std per pixel, cast to the model's scalar type.
template <typename Scalar>
RowMatrix<Scalar> model_input(const PatchImage<float>& patches) {
  return ((patches.tokens.array() - kPixelMean) / kPixelStd).template cast<Scalar>().matrix();
}

extern template class TinyViT<float>;
extern template class TinyViT<double>;

std::vector<std::uint8_t> encode_model(const TinyViT<float>& model);
TinyViT<float> decode_model(std::span<const std::uint8_t> bytes);

}  // namespace tokenmix
