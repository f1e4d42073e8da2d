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

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tokenmix/grid.hpp"

namespace tokenmix {

/// Non-negative per-token score grid for one image's ground-truth class.
struct ActivationMap {
  RowArray<double> values;  // grid_h x grid_w
  int class_id = -1;
  bool normalized = false;

  int grid_h() const { return static_cast<int>(values.rows()); }
  int grid_w() const { return static_cast<int>(values.cols()); }
  int size() const { return static_cast<int>(values.size()); }
  double at(int token) const { return values(token / grid_w(), token % grid_w()); }

  // Non-negative, finite and, when flagged normalized, summing to 1 within
  // `tol`.
  bool valid(double tol = 1e-9) const;
};

/// Sparse class -> score label; scores lie in [0, 1] and need not sum to 1.
struct SoftTarget {
  int num_classes = 0;
  std::vector<std::pair<int, double>> entries;

  double score(int class_id) const;
  Eigen::VectorXd dense() const;
  static SoftTarget one_hot(int class_id, int num_classes);
};

// Clamp negatives to zero, then divide by the sum. A sum <= 1e-12 falls back
// to the uniform map. Throws std::invalid_argument on non-finite input.
ActivationMap normalize_map(const RowArray<double>& raw, int class_id = -1);

// Bilinear resample (half-pixel centres, edge clamp) to grid_h x grid_w,
// followed by clamp-at-zero and renormalisation.
ActivationMap resize_map(const ActivationMap& map, int grid_h, int grid_w);
inline ActivationMap resize_map(const ActivationMap& map,
                                const PatchLayout& target) {
  return resize_map(map, target.grid_h(), target.grid_w());
}

/// Activation-mass target for a token-mixed pair: class_a receives the mass
/// of map_a under the set bits, class_b the mass of map_b under the cleared
/// bits. Equal classes accumulate and clamp at 1.
SoftTarget tokenmix_target(const TokenMask& mask, const ActivationMap& map_a,
                           const ActivationMap& map_b, int class_a,
                           int class_b, int num_classes);

// lambda * y_a + (1 - lambda) * y_b.
SoftTarget linear_target(double lambda, int class_a, int class_b,
                         int num_classes);

}  // namespace tokenmix
