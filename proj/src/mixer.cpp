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

#include "tokenmix/mixer.hpp"

namespace tokenmix {

std::string to_string(MixStrategy s) {
  switch (s) {
    case MixStrategy::kNone: return "none";
    case MixStrategy::kMixup: return "mixup";
    case MixStrategy::kCutMix: return "cutmix";
    case MixStrategy::kTokenMix: return "tokenmix";
  }
  return "?";
}

MixStrategy parse_mix_strategy(const std::string& s) {
  if (s == "none") return MixStrategy::kNone;
  if (s == "mixup") return MixStrategy::kMixup;
  if (s == "cutmix") return MixStrategy::kCutMix;
  if (s == "tokenmix") return MixStrategy::kTokenMix;
  throw std::invalid_argument("unknown mix strategy '" + s + "'");
}

bool MixRecipe::valid() const {
  const bool needs_mask =
      strategy == MixStrategy::kCutMix || strategy == MixStrategy::kTokenMix;
  return needs_mask == mask.has_value() && lambda >= 0.0 && lambda <= 1.0;
}

}  // namespace tokenmix
