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
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tokenmix/loss.hpp"
#include "tokenmix/mixer.hpp"
#include "tokenmix/targets.hpp"
#include "tokenmix/vit.hpp"

namespace tokenmix {

/// Labelled images already split into patches at the model layout.
struct Dataset {
  std::vector<PatchImage<float>> inputs;
  std::vector<int> labels;
  std::vector<std::string> ids;
  int num_classes = 0;

  int size() const { return static_cast<int>(inputs.size()); }
};

enum class TargetSource { kLinear, kActivationMaps };

struct AugmentationPolicy {
  // Each batch draws one strategy uniformly from this set.
  std::vector<MixStrategy> mix_set = {MixStrategy::kNone};
  SamplerConfig tokenmix_sampler;                     // block masks, lambda 0.5
  LambdaMode cutmix_lambda = LambdaMode::beta(1.0);
  LambdaMode mixup_lambda = LambdaMode::beta(0.8);
  // Activation maps feed TokenMix targets; CutMix and Mixup stay linear.
  TargetSource target_source = TargetSource::kLinear;
  // Probability that a batch is mixed at all; the rest train on clean
  // one-hot samples.
  double apply_probability = 1.0;

  // "tokenmix", "cutmix", "mixup", "tokenmix+mixup", "cutmix+mixup", "none".
  static AugmentationPolicy parse(const std::string& policy);
  std::string name() const;
  void validate() const;
};

MixStrategy choose_strategy(const AugmentationPolicy& policy, std::uint64_t seed,
                            std::uint64_t step);

// Draws lambda and mask for pairing (a, b) from streams derived from `key`.
MixRecipe sample_recipe(MixStrategy strategy, int index_a, int index_b,
                        const AugmentationPolicy& policy, const PatchLayout& layout,
                        RngKey key);

struct MixedExample {
  PatchImage<float> input;
  SoftTarget target;
};

// maps: per-sample-id activation maps at the dataset layout, or null.
MixedExample apply_recipe(const MixRecipe& recipe, const Dataset& data,
                          const AugmentationPolicy& policy,
                          const std::unordered_map<std::string, ActivationMap>* maps);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double lr = 1e-3;
  double min_lr = 1e-6;
  double weight_decay = 0.05;
  double warmup_fraction = 0.05;
  LossKind loss = LossKind::kBCE;
  AugmentationPolicy policy;
  std::uint64_t seed = 0;
  // 1 is the single-threaded reference; any other count gives identical
  // results because per-sample gradients are reduced in a fixed tree order.
  int threads = 1;

  // ImageNet-scale regularisers that are not part of the desk-scale recipe.
  // Any non-default value is rejected.
  bool rand_augment = false;
  double label_smoothing = 0.0;
  double drop_path = 0.0;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  std::map<std::string, int> policy_counts;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

// epoch<TAB>policy_counts<TAB>train_loss<TAB>train_acc<TAB>val_acc
std::string format_metrics(const EpochMetrics& m);

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(long step)
      : std::runtime_error("non-finite loss at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
};

/// Mini-batch AdamW with cosine schedule. Each batch uses one mixing
/// strategy; sample k of a batch is paired with sample B-1-k.
TrainResult train(TinyViT<float>& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg,
                  const std::unordered_map<std::string, ActivationMap>* maps = nullptr);

// Fixed-order pairwise sum of equally sized vectors.
template <typename Scalar>
Vector<Scalar> tree_reduce(std::vector<Vector<Scalar>>& parts);

template <typename Scalar>
double accuracy(const TinyViT<Scalar>& model, const Dataset& data);

}  // namespace tokenmix
