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

#include "tokenmix/targets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tokenmix {
namespace {

void check_class(int c, int num_classes) {
  if (c < 0 || c >= num_classes) {
    throw std::invalid_argument("class id " + std::to_string(c) +
                                " out of range [0, " +
                                std::to_string(num_classes) + ")");
  }
}

SoftTarget make_pair_target(double score_a, double score_b, int class_a,
                            int class_b, int num_classes) {
  check_class(class_a, num_classes);
  check_class(class_b, num_classes);
  SoftTarget t;
  t.num_classes = num_classes;
  if (class_a == class_b) {
    t.entries.emplace_back(class_a, std::clamp(score_a + score_b, 0.0, 1.0));
  } else {
    t.entries.emplace_back(class_a, std::clamp(score_a, 0.0, 1.0));
    t.entries.emplace_back(class_b, std::clamp(score_b, 0.0, 1.0));
  }
  return t;
}

}  // namespace

bool ActivationMap::valid(double tol) const {
  if (values.size() == 0) return false;
  if (!values.isFinite().all() || (values < 0.0).any()) return false;
  return !normalized || std::abs(values.sum() - 1.0) <= tol;
}

double SoftTarget::score(int class_id) const {
  for (const auto& [c, s] : entries) {
    if (c == class_id) return s;
  }
  return 0.0;
}

Eigen::VectorXd SoftTarget::dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_classes);
  for (const auto& [c, s] : entries) v(c) += s;
  return v;
}

SoftTarget SoftTarget::one_hot(int class_id, int num_classes) {
  check_class(class_id, num_classes);
  return SoftTarget{num_classes, {{class_id, 1.0}}};
}

ActivationMap normalize_map(const RowArray<double>& raw, int class_id) {
  if (raw.size() == 0) throw std::invalid_argument("normalize_map: empty map");
  if (!raw.isFinite().all()) {
    throw std::invalid_argument("normalize_map: non-finite activation");
  }
  ActivationMap map;
  map.class_id = class_id;
  map.normalized = true;
  map.values = raw.max(0.0);
  const double total = map.values.sum();
  if (total <= 1e-12) {
    map.values.setConstant(1.0 / static_cast<double>(raw.size()));
  } else {
    map.values /= total;
  }
  return map;
}

ActivationMap resize_map(const ActivationMap& map, int grid_h, int grid_w) {
  if (grid_h <= 0 || grid_w <= 0) {
    throw std::invalid_argument("resize_map: target grid must be positive");
  }
  const int in_h = map.grid_h();
  const int in_w = map.grid_w();
  if (in_h == grid_h && in_w == grid_w) return normalize_map(map.values, map.class_id);

  // Source coordinate and blend weight along one axis.
  auto axis = [](int dst, int in, int out, int& i0, int& i1, double& t) {
    const double scale = static_cast<double>(in) / out;
    const double src =
        std::clamp((dst + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    i0 = static_cast<int>(std::floor(src));
    i1 = std::min(i0 + 1, in - 1);
    t = src - i0;
  };

  RowArray<double> out(grid_h, grid_w);
  for (int r = 0; r < grid_h; ++r) {
    int r0, r1;
    double tr;
    axis(r, in_h, grid_h, r0, r1, tr);
    for (int c = 0; c < grid_w; ++c) {
      int c0, c1;
      double tc;
      axis(c, in_w, grid_w, c0, c1, tc);
      const double top = (1.0 - tc) * map.values(r0, c0) + tc * map.values(r0, c1);
      const double bot = (1.0 - tc) * map.values(r1, c0) + tc * map.values(r1, c1);
      out(r, c) = (1.0 - tr) * top + tr * bot;
    }
  }
  return normalize_map(out, map.class_id);
}

SoftTarget tokenmix_target(const TokenMask& mask, const ActivationMap& map_a,
                           const ActivationMap& map_b, int class_a,
                           int class_b, int num_classes) {
  for (const ActivationMap* m : {&map_a, &map_b}) {
    if (m->grid_h() != mask.grid_h() || m->grid_w() != mask.grid_w()) {
      throw std::invalid_argument("tokenmix_target: map grid " +
                                  std::to_string(m->grid_h()) + "x" +
                                  std::to_string(m->grid_w()) +
                                  " does not match mask grid");
    }
    if (!m->normalized || !m->valid(1e-6)) {
      throw std::invalid_argument("tokenmix_target: activation map is not normalized");
    }
  }
  double score_a = 0.0;
  double score_b = 0.0;
  for (int i = 0; i < mask.size(); ++i) {
    if (mask.test(i)) {
      score_a += map_a.at(i);
    } else {
      score_b += map_b.at(i);
    }
  }
  return make_pair_target(score_a, score_b, class_a, class_b, num_classes);
}

SoftTarget linear_target(double lambda, int class_a, int class_b,
                         int num_classes) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("linear_target: lambda outside [0, 1]");
  }
  SoftTarget t = make_pair_target(lambda, 1.0 - lambda, class_a, class_b,
                                  num_classes);
  // Drop the zero-weight side so lambda = 1 yields a single entry.
  std::erase_if(t.entries, [](const auto& e) { return e.second == 0.0; });
  return t;
}

}  // namespace tokenmix
