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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tokenmix/grid.hpp"
#include "tokenmix/params.hpp"
#include "tokenmix/targets.hpp"

namespace tokenmix {

struct TeacherConfig {
  int in_channels = 3;
  int image_size = 64;
  std::array<int, 3> widths = {8, 16, 32};
  int num_classes = 8;

  int feature_channels() const { return widths.back(); }
  // Each stage halves the resolution.
  int feature_size() const { return image_size / 8; }
};

/// Three conv(3x3)+ReLU+avgpool(2) stages, global average pooling and a
/// linear head. The pooled feature grid of the last stage is what class
/// activation maps are computed from.
class ToyTeacher {
 public:
  explicit ToyTeacher(TeacherConfig cfg = {});

  const TeacherConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  Vector<double>& params() { return params_; }
  const Vector<double>& params() const { return params_; }

  // He-normal conv weights, small classifier, zero biases.
  void init(std::uint64_t seed);

  // Feature grid: feature_channels x (feature_size^2), row-major positions.
  RowMatrix<double> features(const Image<float>& img) const;
  Vector<double> logits(const Image<float>& img) const;
  int predict(const Image<float>& img) const;

  // Classifier weights, feature_channels x num_classes.
  Eigen::Map<const RowMatrix<double>> classifier() const;
  Eigen::Map<RowMatrix<double>> classifier();

  // Softmax cross-entropy against `label`; accumulates dL/dparams into grad.
  double loss_and_grad(const Image<float>& img, int label, Vector<double>& grad) const;

 private:
  struct Stage {
    int weight = 0;
    int bias = 0;
    int in_ch = 0;
    int out_ch = 0;
    int size = 0;  // input resolution
  };

  struct Trace;
  Trace run(const Image<float>& img) const;

  TeacherConfig cfg_;
  ParamLayout layout_;
  std::array<Stage, 3> stages_{};
  int head_w_ = 0;
  int head_b_ = 0;
  Vector<double> params_;
};

// Sum_k w(k, c) * f_k(x, y) for features (K x h*w) and weights (K x C).
RowArray<double> cam_from_features(const RowMatrix<double>& features,
                                   const Eigen::Ref<const RowMatrix<double>>& weights,
                                   int class_id, int grid_h, int grid_w);

// Raw (signed) class activation map at the teacher's feature resolution.
RowArray<double> cam(const ToyTeacher& teacher, const Image<float>& img, int class_id);

// Uniform mass over foreground tokens; uniform over all tokens when empty.
ActivationMap oracle_map(const TokenMask& fg_mask, int class_id = -1);

struct LabeledImage {
  const Image<float>* image = nullptr;
  int label = 0;
};

struct TeacherTrainOptions {
  int epochs = 3;
  int batch_size = 8;
  double lr = 1e-2;
  std::uint64_t seed = 0;
};

// Deterministic minibatch AdamW on softmax cross-entropy. epochs == 0 returns
// the freshly initialised teacher.
ToyTeacher train_teacher(std::span<const LabeledImage> data, const TeacherConfig& cfg,
                         const TeacherTrainOptions& opts);

double teacher_accuracy(const ToyTeacher& teacher, std::span<const LabeledImage> data);

std::vector<std::uint8_t> encode_teacher(const ToyTeacher& teacher);
ToyTeacher decode_teacher(std::span<const std::uint8_t> bytes);

}  // namespace tokenmix
