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

namespace tokenmix {

// Purpose tags separate the independent random streams drawn for one sample.
enum class Purpose : std::uint32_t {
  kLambda = 1,
  kMask = 2,
  kPairing = 3,
  kOcclusion = 4,
  kSynth = 5,
  kInit = 6,
  kShuffle = 7,
  kPolicy = 8,
  kTrim = 9,
};

struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint32_t tag = 0;

  friend bool operator==(const RngKey&, const RngKey&) = default;
};

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

/// Counter-based random stream keyed by (seed, index, tag).
///
/// The key selects a Philox counter prefix; successive draws increment the
/// block counter. Two streams with the same key always produce the same
/// sequence regardless of which thread owns them, which is what makes
/// per-sample batch generation reproducible under any schedule.
class RngStream {
 public:
  explicit RngStream(RngKey key);
  RngStream(std::uint64_t seed, std::uint64_t index, Purpose purpose)
      : RngStream(RngKey{seed, index, static_cast<std::uint32_t>(purpose)}) {}

  const RngKey& key() const { return key_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // 53-bit uniform in [0, 1).
  double uniform();
  // Uniform in (0, 1).
  double uniform_open();
  // Unbiased integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double normal();

  // log of a Gamma(shape, 1) variate. Marsaglia-Tsang squeeze/rejection for
  // shape >= 1; for shape < 1 the boost G(a) = G(a + 1) * U^(1/a) is applied
  // in log space so tiny shapes do not underflow to zero.
  double log_gamma_variate(double shape);
  double gamma(double shape);
  // Beta(a, b) via the ratio of two Gamma variates.
  double beta(double a, double b);

 private:
  void refill();

  RngKey key_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 4;
};

}  // namespace tokenmix
