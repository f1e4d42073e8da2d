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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tokenmix/grid.hpp"

namespace tokenmix {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Named row-major tensors packed into one flat parameter vector.
class ParamLayout {
 public:
  struct Entry {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    bool decay = true;  // subject to weight decay
  };

  int add(std::string name, Eigen::Index rows, Eigen::Index cols, bool decay) {
    entries_.push_back({std::move(name), size_, rows, cols, decay});
    size_ += rows * cols;
    return static_cast<int>(entries_.size()) - 1;
  }

  Eigen::Index size() const { return size_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(int id) const { return entries_.at(id); }
  int find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return static_cast<int>(i);
    }
    throw std::out_of_range("no parameter named '" + name + "'");
  }

  template <typename Scalar>
  Eigen::Map<RowMatrix<Scalar>> view(Vector<Scalar>& flat, int id) const {
    const Entry& e = entries_[id];
    return {flat.data() + e.offset, e.rows, e.cols};
  }
  template <typename Scalar>
  Eigen::Map<const RowMatrix<Scalar>> view(const Vector<Scalar>& flat, int id) const {
    const Entry& e = entries_[id];
    return {flat.data() + e.offset, e.rows, e.cols};
  }

  // 1 where weight decay applies, 0 elsewhere.
  template <typename Scalar>
  Vector<Scalar> decay_mask() const {
    Vector<Scalar> m = Vector<Scalar>::Zero(size_);
    for (const Entry& e : entries_) {
      if (e.decay) m.segment(e.offset, e.rows * e.cols).setOnes();
    }
    return m;
  }

 private:
  std::vector<Entry> entries_;
  Eigen::Index size_ = 0;
};

/// Adam with decoupled weight decay over a flat parameter vector.
template <typename Scalar>
struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  Vector<Scalar> m;
  Vector<Scalar> v;
  long step = 0;

  void update(Vector<Scalar>& params, const Vector<Scalar>& grad,
              const Vector<Scalar>& decay_mask, double lr) {
    if (m.size() != params.size()) {
      m = Vector<Scalar>::Zero(params.size());
      v = Vector<Scalar>::Zero(params.size());
    }
    ++step;
    const auto b1 = static_cast<Scalar>(beta1);
    const auto b2 = static_cast<Scalar>(beta2);
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const auto step_size = static_cast<Scalar>(lr / c1);
    const auto root_c2 = static_cast<Scalar>(std::sqrt(c2));
    params.array() -= static_cast<Scalar>(lr * weight_decay) * decay_mask.array() * params.array();
    params.array() -= step_size * m.array() /
                      (v.array().sqrt() / root_c2 + static_cast<Scalar>(eps));
  }
};

// Linear warm-up over `warmup_steps`, then cosine decay from base to floor.
inline double cosine_lr(long step, long total_steps, long warmup_steps, double base,
                        double floor) {
  if (total_steps <= 0) return base;
  if (step < warmup_steps) {
    return base * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const long span = std::max(1L, total_steps - warmup_steps);
  const double t = std::min(1.0, static_cast<double>(step - warmup_steps) / span);
  return floor + 0.5 * (base - floor) * (1.0 + std::cos(std::numbers::pi * t));
}

// Per-channel input normalisation shared by the teacher and the student.
inline constexpr float kPixelMean = 0.5f;
inline constexpr float kPixelStd = 0.25f;

}  // namespace tokenmix
