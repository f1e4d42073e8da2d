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

#include "tokenmix/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tokenmix/rng.hpp"

namespace tokenmix {

std::string param_kind(const std::string& name) {
  if (name.rfind("block", 0) == 0) {
    const auto dot = name.find('.');
    if (dot != std::string::npos) return name.substr(dot + 1);
  }
  return name;
}

GradCheckReport grad_check(const TinyViT<double>& model, const RowMatrix<double>& tokens,
                           const TinyViT<double>::LossFn& loss, double tolerance,
                           const GradCheckOptions& opts) {
  Vector<double> analytic = Vector<double>::Zero(model.layout().size());
  model.accumulate_gradient(tokens, loss, analytic);

  std::map<std::string, std::vector<Eigen::Index>> by_kind;
  for (const auto& e : model.layout().entries()) {
    auto& coords = by_kind[param_kind(e.name)];
    for (Eigen::Index i = 0; i < e.rows * e.cols; ++i) coords.push_back(e.offset + i);
  }

  GradCheckReport report;
  report.tolerance = tolerance;
  TinyViT<double> probe = model;
  auto eval = [&](Eigen::Index coord, double value) {
    const double saved = probe.params()(coord);
    probe.params()(coord) = value;
    Vector<double> scratch;
    const double l = loss(probe.forward(tokens).logits, scratch);
    probe.params()(coord) = saved;
    return l;
  };

  std::uint64_t kind_index = 0;
  for (auto& [kind, coords] : by_kind) {
    RngStream rng(opts.seed, kind_index++, Purpose::kShuffle);
    const int take = std::min<int>(opts.coords_per_kind, static_cast<int>(coords.size()));
    for (int i = 0; i < take; ++i) {
      std::swap(coords[i], coords[static_cast<std::size_t>(
                               rng.uniform_int(i, static_cast<std::int64_t>(coords.size()) - 1))]);
    }
    double worst = 0.0;
    for (int i = 0; i < take; ++i) {
      const Eigen::Index coord = coords[i];
      const double x = model.params()(coord);
      const double numeric = (eval(coord, x + opts.step) - eval(coord, x - opts.step)) /
                             (2.0 * opts.step);
      const double a = analytic(coord);
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.denom_floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.coordinates += take;
    report.max_rel_error_by_kind[kind] = worst;
    if (worst >= report.max_rel_error) {
      report.max_rel_error = worst;
      report.worst_kind = kind;
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

GradCheckReport grad_check(const TinyViT<double>& model, const RowMatrix<double>& tokens,
                           const Vector<double>& target, LossKind kind, double tolerance,
                           const GradCheckOptions& opts) {
  auto loss = [&](const Vector<double>& z, Vector<double>& dz) {
    return apply_loss(kind, z, target, dz);
  };
  return grad_check(model, tokens, loss, tolerance, opts);
}

}  // namespace tokenmix
