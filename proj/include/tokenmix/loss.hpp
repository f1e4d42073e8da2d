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
#include <stdexcept>
#include <string>

#include "tokenmix/params.hpp"

namespace tokenmix {

enum class LossKind { kBCE, kCE };

inline std::string to_string(LossKind k) { return k == LossKind::kBCE ? "bce" : "ce"; }
inline LossKind parse_loss(const std::string& s) {
  if (s == "bce") return LossKind::kBCE;
  if (s == "ce") return LossKind::kCE;
  throw std::invalid_argument("unknown loss '" + s + "' (expected bce or ce)");
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Mean over classes of the binary cross-entropy between sigmoid(z) and t,
/// evaluated as max(z, 0) - z t + log(1 + exp(-|z|)). grad = (sigmoid(z) - t) / K.
template <typename Scalar>
Scalar bce_loss(const Vector<Scalar>& logits, const Vector<Scalar>& target, Vector<Scalar>& grad) {
  const Eigen::Index k = logits.size();
  if (target.size() != k) throw std::invalid_argument("bce_loss: size mismatch");
  grad.resize(k);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar z = logits(i);
    const Scalar t = target(i);
    total += std::max(z, Scalar(0)) - z * t + std::log1p(std::exp(-std::abs(z)));
    grad(i) = (sigmoid(z) - t) / static_cast<Scalar>(k);
  }
  return total / static_cast<Scalar>(k);
}

/// Softmax cross-entropy against the target renormalised to a distribution.
/// grad = softmax(z) - t / sum(t). Throws on an all-zero target.
template <typename Scalar>
Scalar ce_loss(const Vector<Scalar>& logits, const Vector<Scalar>& target, Vector<Scalar>& grad) {
  if (target.size() != logits.size()) throw std::invalid_argument("ce_loss: size mismatch");
  const Scalar mass = target.sum();
  if (!(mass > Scalar(0))) throw std::invalid_argument("ce_loss: all-zero target");
  const Vector<Scalar> t = target / mass;
  const Scalar zmax = logits.maxCoeff();
  const Vector<Scalar> e = (logits.array() - zmax).exp().matrix();
  const Scalar log_z = zmax + std::log(e.sum());
  grad = e / e.sum() - t;
  return log_z - t.dot(logits);
}

template <typename Scalar>
Scalar apply_loss(LossKind kind, const Vector<Scalar>& logits, const Vector<Scalar>& target,
                  Vector<Scalar>& grad) {
  return kind == LossKind::kBCE ? bce_loss(logits, target, grad) : ce_loss(logits, target, grad);
}

// Probability assigned to `class_id`: sigmoid for BCE models, softmax for CE.
template <typename Scalar>
Scalar class_confidence(LossKind kind, const Vector<Scalar>& logits, int class_id) {
  if (kind == LossKind::kBCE) return sigmoid(logits(class_id));
  const Scalar zmax = logits.maxCoeff();
  const Vector<Scalar> e = (logits.array() - zmax).exp().matrix();
  return e(class_id) / e.sum();
}

}  // namespace tokenmix
