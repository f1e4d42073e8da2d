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
#include <map>
#include <string>

#include "tokenmix/loss.hpp"
#include "tokenmix/vit.hpp"

namespace tokenmix {

struct GradCheckOptions {
  double step = 1e-5;
  // Coordinates sampled per parameter kind (e.g. all "attn.qkv.weight"
  // tensors across blocks form one kind). Kinds with fewer entries are
  // checked exhaustively.
  int coords_per_kind = 200;
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double denom_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_kind;
  long coordinates = 0;
  std::map<std::string, double> max_rel_error_by_kind;
  double tolerance = 0.0;
  bool passed = false;
};

// "block3.attn.qkv.weight" -> "attn.qkv.weight".
std::string param_kind(const std::string& name);

/// Compares analytic parameter gradients against central differences on a
/// random subset of coordinates. Always 64-bit.
GradCheckReport grad_check(const TinyViT<double>& model, const RowMatrix<double>& tokens,
                           const TinyViT<double>::LossFn& loss, double tolerance,
                           const GradCheckOptions& opts = {});

GradCheckReport grad_check(const TinyViT<double>& model, const RowMatrix<double>& tokens,
                           const Vector<double>& target, LossKind kind, double tolerance,
                           const GradCheckOptions& opts = {});

}  // namespace tokenmix
