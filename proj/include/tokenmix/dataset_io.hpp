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
#include <string>
#include <vector>

#include "tokenmix/synth.hpp"
#include "tokenmix/trainer.hpp"

namespace tokenmix {

// A dataset directory holds
//   dataset.txt   key=value generation settings
//   manifest.tsv  sample_id<TAB>class_id<TAB>gen_seed, one line per sample
//   images/<sample_id>.ppm
struct ManifestEntry {
  std::string sample_id;
  int class_id = 0;
  std::uint64_t gen_seed = 0;
};

struct DatasetInfo {
  SynthOptions options;
  int num_classes = kNumShapes;
  int per_class = 0;
  std::uint64_t seed = 0;
};

std::string format_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

// Plain key=value lines; '#' starts a comment.
std::string format_key_values(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_key_values(const std::string& text);

void write_dataset_dir(const std::string& dir, const DatasetInfo& info,
                       const std::vector<SynthSample>& samples);

struct DatasetDir {
  DatasetInfo info;
  std::vector<ManifestEntry> manifest;
  std::vector<Image<float>> images;

  // Regenerates sample i from its manifest seed.
  SynthSample regenerate(int i) const;
  // Every sample, patchified at the dataset layout.
  Dataset to_dataset() const;
  Dataset subset(const std::vector<int>& indices) const;
};

DatasetDir read_dataset_dir(const std::string& dir);

// Per class, the last round(fraction * n_c) samples in manifest order go to
// validation.
void split_indices(const DatasetDir& data, double val_fraction, std::vector<int>& train,
                   std::vector<int>& val);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tokenmix
