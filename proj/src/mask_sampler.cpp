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

#include "tokenmix/mask_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tokenmix {
namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1], got " +
                                std::to_string(lambda));
  }
}

// Partial Fisher-Yates: the first k entries of `pool` become a uniform
// k-subset.
void choose_prefix(std::vector<int>& pool, int k, RngStream& rng) {
  const int n = static_cast<int>(pool.size());
  for (int i = 0; i < k; ++i) {
    const int j = static_cast<int>(rng.uniform_int(i, n - 1));
    std::swap(pool[i], pool[j]);
  }
}

}  // namespace

std::string to_string(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::kRegion: return "region";
    case MaskStrategy::kRandom: return "random";
    case MaskStrategy::kBlock: return "block";
  }
  return "?";
}

MaskStrategy parse_mask_strategy(const std::string& s) {
  if (s == "region") return MaskStrategy::kRegion;
  if (s == "random") return MaskStrategy::kRandom;
  if (s == "block") return MaskStrategy::kBlock;
  throw std::invalid_argument("unknown mask strategy '" + s + "'");
}

LambdaMode LambdaMode::parse(const std::string& s) {
  try {
    std::size_t used = 0;
    if (s.rfind("beta:", 0) == 0) {
      const std::string rest = s.substr(5);
      const double alpha = std::stod(rest, &used);
      if (used != rest.size() || !(alpha > 0.0)) throw std::invalid_argument(s);
      return beta(alpha);
    }
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(s);
    }
    return fixed(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid lambda '" + s +
                                "' (expected a value in [0,1] or beta:ALPHA)");
  }
}

std::string LambdaMode::str() const {
  std::ostringstream os;
  os.precision(17);
  if (kind == Kind::kBeta) os << "beta:";
  os << value;
  return os.str();
}

void SamplerConfig::validate() const {
  if (!(aspect_low > 0.0 && aspect_low <= aspect_high)) {
    throw std::invalid_argument("aspect range must satisfy 0 < low <= high");
  }
  if (min_block_tokens < 0) {
    throw std::invalid_argument("min_block_tokens must be >= 1 (0 = auto)");
  }
  if (lambda.kind == LambdaMode::Kind::kFixed) {
    check_lambda(lambda.value);
  } else if (!(lambda.value > 0.0)) {
    throw std::invalid_argument("Beta alpha must be positive");
  }
}

int SamplerConfig::resolved_min_block_tokens(int num_tokens) const {
  if (min_block_tokens > 0) return min_block_tokens;
  return std::max(1, static_cast<int>(std::lround(14.0 * num_tokens / 196.0)));
}

int target_count(double lambda, int num_tokens) {
  check_lambda(lambda);
  return static_cast<int>(std::lround(lambda * num_tokens));
}

double sample_lambda(const SamplerConfig& cfg, RngStream& rng) {
  if (cfg.lambda.kind == LambdaMode::Kind::kFixed) return cfg.lambda.value;
  return std::clamp(rng.beta(cfg.lambda.value, cfg.lambda.value), 0.0, 1.0);
}

TokenMask sample_block_mask(const PatchLayout& layout, double lambda,
                            const SamplerConfig& cfg, RngStream& rng,
                            BlockTrace* trace) {
  cfg.validate();
  const int gh = layout.grid_h();
  const int gw = layout.grid_w();
  const int n = layout.num_tokens();
  const int target = target_count(lambda, n);
  if (target == 0) return TokenMask(gh, gw, false);
  if (target == n) return TokenMask(gh, gw, true);

  const int min_tokens = cfg.resolved_min_block_tokens(n);
  const double log_lo = std::log(cfg.aspect_low);
  const double log_hi = std::log(cfg.aspect_high);
  // Near-full targets can keep landing on already-set tokens; after this many
  // placements the remainder is filled uniformly from the unset tokens.
  const int max_placements = 64 * n;

  TokenMask mask(gh, gw);
  std::vector<int> last_new;
  int placements = 0;
  while (mask.count() < target && placements < max_placements) {
    ++placements;
    const int remaining = target - mask.count();
    BlockPlacement pl;
    pl.size_drawn = static_cast<int>(
        rng.uniform_int(min_tokens, std::max(min_tokens, remaining)));
    pl.aspect = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
    const long h_raw = std::lround(std::sqrt(pl.size_drawn * pl.aspect));
    const long w_raw = std::lround(std::sqrt(pl.size_drawn / pl.aspect));
    pl.height = static_cast<int>(std::clamp<long>(h_raw, 1, gh));
    pl.width = static_cast<int>(std::clamp<long>(w_raw, 1, gw));
    pl.clamped = pl.height != h_raw || pl.width != w_raw;
    pl.top = static_cast<int>(rng.uniform_int(0, gh - pl.height));
    pl.left = static_cast<int>(rng.uniform_int(0, gw - pl.width));

    last_new.clear();
    for (int r = pl.top; r < pl.top + pl.height; ++r) {
      for (int c = pl.left; c < pl.left + pl.width; ++c) {
        const int idx = r * gw + c;
        if (!mask.test(idx)) {
          mask.set(idx);
          last_new.push_back(idx);
        }
      }
    }
    pl.newly_set = static_cast<int>(last_new.size());
    if (trace) trace->placements.push_back(pl);
  }

  if (mask.count() > target) {
    const int excess = mask.count() - target;
    RngStream trim_rng(RngKey{rng.key().seed, rng.key().index,
                              static_cast<std::uint32_t>(Purpose::kTrim)});
    // Before the last placement the count was below target, so the bits it
    // added always cover the excess.
    choose_prefix(last_new, excess, trim_rng);
    for (int i = 0; i < excess; ++i) mask.set(last_new[i], false);
    if (trace) trace->trimmed = excess;
  } else if (mask.count() < target) {
    std::vector<int> unset;
    for (int i = 0; i < n; ++i) {
      if (!mask.test(i)) unset.push_back(i);
    }
    const int missing = target - mask.count();
    choose_prefix(unset, missing, rng);
    for (int i = 0; i < missing; ++i) mask.set(unset[i]);
    if (trace) trace->fallback_filled = missing;
  }
  return mask;
}

TokenMask sample_random_mask(const PatchLayout& layout, double lambda,
                             RngStream& rng) {
  const int n = layout.num_tokens();
  const int target = target_count(lambda, n);
  TokenMask mask(layout.grid_h(), layout.grid_w());
  if (target == 0) return mask;
  if (target == n) return TokenMask(layout.grid_h(), layout.grid_w(), true);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  choose_prefix(pool, target, rng);
  for (int i = 0; i < target; ++i) mask.set(pool[i]);
  return mask;
}

RegionMask sample_region_mask(const PatchLayout& layout, double lambda,
                              RngStream& rng) {
  check_lambda(lambda);
  const int gh = layout.grid_h();
  const int gw = layout.grid_w();
  if (lambda == 0.0) return {TokenMask(gh, gw, false), 0.0};

  const double side = std::sqrt(1.0 - lambda);
  const int cut_h = static_cast<int>(std::lround(gh * side));
  const int cut_w = static_cast<int>(std::lround(gw * side));
  const int cy = static_cast<int>(rng.uniform_int(0, gh - 1));
  const int cx = static_cast<int>(rng.uniform_int(0, gw - 1));
  const int y0 = std::clamp(cy - cut_h / 2, 0, gh);
  const int y1 = std::clamp(cy - cut_h / 2 + cut_h, 0, gh);
  const int x0 = std::clamp(cx - cut_w / 2, 0, gw);
  const int x1 = std::clamp(cx - cut_w / 2 + cut_w, 0, gw);

  TokenMask mask(gh, gw, true);
  for (int r = y0; r < y1; ++r) {
    for (int c = x0; c < x1; ++c) mask.set(r, c, false);
  }
  const double lambda_actual =
      static_cast<double>(mask.count()) / layout.num_tokens();
  return {std::move(mask), lambda_actual};
}

RegionMask sample_mask(const PatchLayout& layout, double lambda,
                       const SamplerConfig& cfg, RngStream& rng) {
  switch (cfg.strategy) {
    case MaskStrategy::kRegion:
      return sample_region_mask(layout, lambda, rng);
    case MaskStrategy::kRandom: {
      TokenMask m = sample_random_mask(layout, lambda, rng);
      const double actual = m.coverage();
      return {std::move(m), actual};
    }
    case MaskStrategy::kBlock:
    default: {
      TokenMask m = sample_block_mask(layout, lambda, cfg, rng);
      const double actual = m.coverage();
      return {std::move(m), actual};
    }
  }
}

}  // namespace tokenmix
