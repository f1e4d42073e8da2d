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

// Reference implementations used only as test oracles. Each one is written
// independently of the library code it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace tokenmix::oracle {

// Union-find count of 4-connected components among cells equal to value.
inline int count_components(const std::vector<int>& cells, int h, int w, int value) {
  std::vector<int> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int i = r * w + c;
      if (cells[i] != value) continue;
      if (c + 1 < w && cells[i + 1] == value) unite(i, i + 1);
      if (r + 1 < h && cells[i + w] == value) unite(i, i + w);
    }
  }
  int n = 0;
  for (int i = 0; i < h * w; ++i) n += cells[i] == value && find(i) == i;
  return n;
}

// Regularised incomplete beta by composite Simpson quadrature. The
// substitution u = t^a removes the t^(a-1) singularity at 0; the upper tail
// uses I_x(a, b) = 1 - I_{1-x}(b, a) so the (1-t)^(b-1) factor stays bounded.
inline double beta_cdf(double x, double a, double b, int intervals = 4000) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > 0.5) return 1.0 - beta_cdf(1.0 - x, b, a, intervals);
  const double upper = std::pow(x, a);
  auto f = [&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), b - 1.0); };
  const double hstep = upper / intervals;
  double s = f(0.0) + f(upper);
  for (int i = 1; i < intervals; ++i) s += f(i * hstep) * (i % 2 ? 4.0 : 2.0);
  const double integral = s * hstep / 3.0 / a;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return integral / std::exp(log_beta);
}

// Kolmogorov-Smirnov distance between a sample and a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Bilinear resample with half-pixel centres and edge clamping, computed per
// output cell from first principles.
inline Eigen::ArrayXXd bilinear(const Eigen::ArrayXXd& src, int out_h, int out_w) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  Eigen::ArrayXXd out(out_h, out_w);
  for (int i = 0; i < out_h; ++i) {
    for (int j = 0; j < out_w; ++j) {
      const double y = std::clamp((i + 0.5) * h / out_h - 0.5, 0.0, h - 1.0);
      const double x = std::clamp((j + 0.5) * w / out_w - 0.5, 0.0, w - 1.0);
      const int y0 = static_cast<int>(std::floor(y));
      const int x0 = static_cast<int>(std::floor(x));
      const int y1 = std::min(y0 + 1, h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double fy = y - y0;
      const double fx = x - x0;
      out(i, j) = (1 - fy) * ((1 - fx) * src(y0, x0) + fx * src(y0, x1)) +
                  fy * ((1 - fx) * src(y1, x0) + fx * src(y1, x1));
    }
  }
  return out;
}

}  // namespace tokenmix::oracle
