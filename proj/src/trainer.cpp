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

#include "tokenmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace tokenmix {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

PatchImage<float> mixup_patches(const PatchImage<float>& a, const PatchImage<float>& b,
                                double lambda) {
  if (lambda == 1.0) return a;
  if (lambda == 0.0) return b;
  const auto l = static_cast<float>(lambda);
  PatchImage<float> out = a;
  out.tokens = l * a.tokens + (1.0f - l) * b.tokens;
  return out;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index i;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

// Runs fn(k) for k in [0, n) on `threads` workers with a static stride.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int k = t; k < n; k += workers) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

AugmentationPolicy AugmentationPolicy::parse(const std::string& policy) {
  static const std::vector<std::string> kAllowed = {
      "tokenmix", "cutmix", "mixup", "tokenmix+mixup", "cutmix+mixup", "none"};
  if (std::find(kAllowed.begin(), kAllowed.end(), policy) == kAllowed.end()) {
    throw std::invalid_argument("invalid policy '" + policy +
                                "' (expected tokenmix|cutmix|mixup|tokenmix+mixup|"
                                "cutmix+mixup|none)");
  }
  AugmentationPolicy p;
  p.mix_set.clear();
  for (const std::string& part : split(policy, '+')) p.mix_set.push_back(parse_mix_strategy(part));
  return p;
}

std::string AugmentationPolicy::name() const {
  std::string out;
  for (MixStrategy s : mix_set) {
    if (!out.empty()) out += "+";
    out += to_string(s);
  }
  return out;
}

void AugmentationPolicy::validate() const {
  if (mix_set.empty()) throw std::invalid_argument("augmentation policy needs at least one strategy");
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    throw std::invalid_argument("apply probability must lie in [0, 1]");
  }
  tokenmix_sampler.validate();
  SamplerConfig probe;
  probe.lambda = cutmix_lambda;
  probe.validate();
  probe.lambda = mixup_lambda;
  probe.validate();
}

MixStrategy choose_strategy(const AugmentationPolicy& policy, std::uint64_t seed,
                            std::uint64_t step) {
  RngStream rng(seed, step, Purpose::kPolicy);
  if (policy.apply_probability < 1.0 && rng.uniform() >= policy.apply_probability) {
    return MixStrategy::kNone;
  }
  if (policy.mix_set.size() == 1) return policy.mix_set.front();
  const auto i = rng.uniform_int(0, static_cast<std::int64_t>(policy.mix_set.size()) - 1);
  return policy.mix_set[static_cast<std::size_t>(i)];
}

MixRecipe sample_recipe(MixStrategy strategy, int index_a, int index_b,
                        const AugmentationPolicy& policy, const PatchLayout& layout,
                        RngKey key) {
  MixRecipe r;
  r.strategy = strategy;
  r.index_a = index_a;
  r.index_b = index_b;
  r.rng_key = key;
  RngStream lambda_rng(RngKey{key.seed, key.index, static_cast<std::uint32_t>(Purpose::kLambda)});
  RngStream mask_rng(RngKey{key.seed, key.index, static_cast<std::uint32_t>(Purpose::kMask)});
  switch (strategy) {
    case MixStrategy::kNone:
      r.lambda = 1.0;
      break;
    case MixStrategy::kMixup: {
      SamplerConfig cfg;
      cfg.lambda = policy.mixup_lambda;
      r.lambda = sample_lambda(cfg, lambda_rng);
      break;
    }
    case MixStrategy::kCutMix: {
      SamplerConfig cfg;
      cfg.lambda = policy.cutmix_lambda;
      RegionMask m = sample_region_mask(layout, sample_lambda(cfg, lambda_rng), mask_rng);
      r.lambda = m.lambda_actual;
      r.mask = std::move(m.mask);
      break;
    }
    case MixStrategy::kTokenMix: {
      const double lambda = sample_lambda(policy.tokenmix_sampler, lambda_rng);
      RegionMask m = sample_mask(layout, lambda, policy.tokenmix_sampler, mask_rng);
      r.lambda = m.lambda_actual;
      r.mask = std::move(m.mask);
      break;
    }
  }
  return r;
}

MixedExample apply_recipe(const MixRecipe& recipe, const Dataset& data,
                          const AugmentationPolicy& policy,
                          const std::unordered_map<std::string, ActivationMap>* maps) {
  if (!recipe.valid()) throw std::invalid_argument("malformed mix recipe");
  const PatchImage<float>& a = data.inputs.at(recipe.index_a);
  const PatchImage<float>& b = data.inputs.at(recipe.index_b);
  const int ya = data.labels[recipe.index_a];
  const int yb = data.labels[recipe.index_b];
  const int k = data.num_classes;
  switch (recipe.strategy) {
    case MixStrategy::kNone:
      return {a, SoftTarget::one_hot(ya, k)};
    case MixStrategy::kMixup:
      return {mixup_patches(a, b, recipe.lambda), linear_target(recipe.lambda, ya, yb, k)};
    case MixStrategy::kCutMix:
      return {token_mix(a, b, *recipe.mask), linear_target(recipe.mask->coverage(), ya, yb, k)};
    case MixStrategy::kTokenMix: {
      PatchImage<float> mixed = token_mix(a, b, *recipe.mask);
      if (policy.target_source == TargetSource::kLinear || maps == nullptr) {
        return {std::move(mixed), linear_target(recipe.mask->coverage(), ya, yb, k)};
      }
      auto find = [&](int idx) -> const ActivationMap& {
        const auto it = maps->find(data.ids[idx]);
        if (it == maps->end()) {
          throw std::invalid_argument("no activation map for sample '" + data.ids[idx] + "'");
        }
        return it->second;
      };
      const ActivationMap& map_a = find(recipe.index_a);
      const ActivationMap& map_b = find(recipe.index_b);
      return {std::move(mixed), tokenmix_target(*recipe.mask, map_a, map_b, ya, yb, k)};
    }
  }
  throw std::logic_error("unreachable");
}

void TrainConfig::validate() const {
  if (epochs < 0 || batch_size <= 0 || !(lr > 0) || !(min_lr >= 0) || !(weight_decay >= 0) ||
      !(warmup_fraction >= 0 && warmup_fraction < 1) || threads <= 0) {
    throw std::invalid_argument("invalid training hyperparameters");
  }
  if (rand_augment || label_smoothing != 0.0 || drop_path != 0.0) {
    throw std::invalid_argument("RandAugment, label smoothing and DropPath are not supported");
  }
  policy.validate();
}

std::string format_metrics(const EpochMetrics& m) {
  std::ostringstream os;
  os << m.epoch << '\t';
  bool first = true;
  for (const auto& [name, count] : m.policy_counts) {
    if (!first) os << ',';
    os << name << ':' << count;
    first = false;
  }
  if (first) os << '-';
  os.setf(std::ios::fixed);
  os.precision(6);
  os << '\t' << m.train_loss << '\t' << m.train_acc << '\t' << m.val_acc;
  return os.str();
}

template <typename Scalar>
Vector<Scalar> tree_reduce(std::vector<Vector<Scalar>>& parts) {
  if (parts.empty()) throw std::invalid_argument("tree_reduce: nothing to reduce");
  for (std::size_t stride = 1; stride < parts.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) {
      parts[i] += parts[i + stride];
    }
  }
  return parts.front();
}

template Vector<float> tree_reduce(std::vector<Vector<float>>&);
template Vector<double> tree_reduce(std::vector<Vector<double>>&);

template <typename Scalar>
double accuracy(const TinyViT<Scalar>& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const auto logits = model.forward(model_input<Scalar>(data.inputs[i])).logits;
    Eigen::Index best;
    logits.maxCoeff(&best);
    correct += static_cast<int>(best) == data.labels[i];
  }
  return static_cast<double>(correct) / data.size();
}

template double accuracy(const TinyViT<float>&, const Dataset&);
template double accuracy(const TinyViT<double>&, const Dataset&);

TrainResult train(TinyViT<float>& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg,
                  const std::unordered_map<std::string, ActivationMap>* maps) {
  cfg.validate();
  TrainResult result;
  if (cfg.epochs == 0) return result;
  if (train_set.size() == 0) throw std::invalid_argument("empty training set");
  for (const auto& p : train_set.inputs) {
    if (!(p.layout == model.config().layout)) {
      throw std::invalid_argument("training data layout does not match the model");
    }
  }

  const int n = train_set.size();
  const int batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = static_cast<long>(batches) * cfg.epochs;
  const long warmup = static_cast<long>(std::lround(cfg.warmup_fraction * total_steps));
  const Vector<float> decay = model.layout().decay_mask<float>();
  AdamW<float> adam;
  adam.weight_decay = cfg.weight_decay;
  const PatchLayout& layout = model.config().layout;

  std::vector<int> order(n);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle(cfg.seed, static_cast<std::uint64_t>(epoch), Purpose::kShuffle);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<int>(shuffle.uniform_int(0, i))]);
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    double loss_sum = 0.0;
    int correct = 0;
    for (int b = 0; b < batches; ++b, ++step) {
      const int lo = b * cfg.batch_size;
      const int count = std::min(n, lo + cfg.batch_size) - lo;
      const MixStrategy strategy =
          choose_strategy(cfg.policy, cfg.seed, static_cast<std::uint64_t>(step));
      ++m.policy_counts[to_string(strategy)];

      std::vector<Vector<float>> grads(count);
      std::vector<double> losses(count);
      std::vector<int> hits(count);
      parallel_for(count, cfg.threads, [&](int k) {
        const int ia = order[lo + k];
        const int ib = order[lo + count - 1 - k];
        const std::uint64_t sample_index = static_cast<std::uint64_t>(epoch) * n + lo + k;
        const MixRecipe recipe = sample_recipe(strategy, ia, ib, cfg.policy, layout,
                                               RngKey{cfg.seed, sample_index, 0});
        const MixedExample ex = apply_recipe(recipe, train_set, cfg.policy, maps);
        const Eigen::VectorXd target_d = ex.target.dense();
        const Vector<float> target = target_d.cast<float>();
        grads[k] = Vector<float>::Zero(model.layout().size());
        Vector<float> logits;
        auto loss_fn = [&](const Vector<float>& z, Vector<float>& dz) {
          return apply_loss(cfg.loss, z, target, dz);
        };
        losses[k] = model.accumulate_gradient(model_input<float>(ex.input), loss_fn, grads[k],
                                              &logits);
        Eigen::Index pred;
        logits.maxCoeff(&pred);
        hits[k] = static_cast<int>(pred) == argmax(target_d);
      });

      double batch_loss = 0.0;
      for (int k = 0; k < count; ++k) batch_loss += losses[k];
      if (!std::isfinite(batch_loss)) throw TrainingDiverged(step);
      loss_sum += batch_loss;
      correct += std::accumulate(hits.begin(), hits.end(), 0);

      Vector<float> grad = tree_reduce(grads);
      grad /= static_cast<float>(count);
      adam.update(model.params(), grad, decay,
                  cosine_lr(step, total_steps, warmup, cfg.lr, cfg.min_lr));
      if (!model.params().allFinite()) throw TrainingDiverged(step);
    }
    m.train_loss = loss_sum / n;
    m.train_acc = static_cast<double>(correct) / n;
    m.val_acc = accuracy(model, val_set);
    result.metrics.push_back(std::move(m));
  }
  return result;
}

}  // namespace tokenmix
