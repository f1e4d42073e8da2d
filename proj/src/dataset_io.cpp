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

#include "tokenmix/dataset_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tokenmix/ppm.hpp"

namespace tokenmix {
namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream os;
  for (const auto& e : entries) os << e.sample_id << '\t' << e.class_id << '\t' << e.gen_seed << '\n';
  return os.str();
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestEntry e;
    std::string cls, seed;
    if (!std::getline(fields, e.sample_id, '\t') || !std::getline(fields, cls, '\t') ||
        !std::getline(fields, seed, '\t') || e.sample_id.empty()) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": expected 3 fields");
    }
    try {
      std::size_t used = 0;
      e.class_id = std::stoi(cls, &used);
      if (used != cls.size() || e.class_id < 0) throw std::invalid_argument(cls);
      e.gen_seed = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument(seed);
    } catch (const std::exception&) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": bad number");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_key_values(const std::map<std::string, std::string>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  return os.str();
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad key=value line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_dataset_dir(const std::string& dir, const DatasetInfo& info,
                       const std::vector<SynthSample>& samples) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
  const SynthOptions& o = info.options;
  std::ostringstream fmt;
  fmt.precision(17);
  auto num = [&](double v) {
    fmt.str("");
    fmt << v;
    return fmt.str();
  };
  write_text_file((fs::path(dir) / "dataset.txt").string(),
                  format_key_values({{"classes", std::to_string(info.num_classes)},
                                     {"per_class", std::to_string(info.per_class)},
                                     {"seed", std::to_string(info.seed)},
                                     {"image_size", std::to_string(o.image_size)},
                                     {"channels", std::to_string(o.channels)},
                                     {"patch_size", std::to_string(o.patch_size)},
                                     {"scale_min", num(o.scale_min)},
                                     {"scale_max", num(o.scale_max)},
                                     {"fg_threshold", num(o.fg_threshold)}}));
  std::vector<ManifestEntry> manifest;
  for (const auto& s : samples) {
    write_ppm((fs::path(dir) / "images" / (s.id + ".ppm")).string(), s.image);
    manifest.push_back({s.id, s.label, s.gen_seed});
  }
  write_text_file((fs::path(dir) / "manifest.tsv").string(), format_manifest(manifest));
}

DatasetDir read_dataset_dir(const std::string& dir) {
  DatasetDir d;
  const auto kv = parse_key_values(read_text_file((fs::path(dir) / "dataset.txt").string()));
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("dataset.txt is missing '" + key + "'");
    return it->second;
  };
  try {
    d.info.num_classes = std::stoi(get("classes"));
    d.info.per_class = std::stoi(get("per_class"));
    d.info.seed = std::stoull(get("seed"));
    d.info.options.image_size = std::stoi(get("image_size"));
    d.info.options.channels = std::stoi(get("channels"));
    d.info.options.patch_size = std::stoi(get("patch_size"));
    d.info.options.scale_min = std::stod(get("scale_min"));
    d.info.options.scale_max = std::stod(get("scale_max"));
    d.info.options.fg_threshold = std::stod(get("fg_threshold"));
  } catch (const std::logic_error& e) {
    throw std::runtime_error(std::string("dataset.txt: bad value (") + e.what() + ")");
  }
  d.manifest = parse_manifest(read_text_file((fs::path(dir) / "manifest.tsv").string()));
  if (d.manifest.empty()) throw std::runtime_error("empty dataset");
  const PatchLayout layout = d.info.options.layout();
  for (const auto& e : d.manifest) {
    if (e.class_id >= d.info.num_classes) {
      throw std::runtime_error("sample '" + e.sample_id + "' has out-of-range class");
    }
    Image<float> img = read_ppm((fs::path(dir) / "images" / (e.sample_id + ".ppm")).string());
    if (!img.matches(layout)) {
      throw std::runtime_error("image '" + e.sample_id + "' does not match " + to_string(layout));
    }
    d.images.push_back(std::move(img));
  }
  return d;
}

SynthSample DatasetDir::regenerate(int i) const {
  const auto& e = manifest.at(static_cast<std::size_t>(i));
  SynthSample s = gen_sample(e.class_id, e.gen_seed, info.options);
  s.id = e.sample_id;
  return s;
}

Dataset DatasetDir::subset(const std::vector<int>& indices) const {
  Dataset ds;
  ds.num_classes = info.num_classes;
  const PatchLayout layout = info.options.layout();
  for (int i : indices) {
    const auto& e = manifest.at(static_cast<std::size_t>(i));
    ds.inputs.push_back(patchify(images[static_cast<std::size_t>(i)], layout));
    ds.labels.push_back(e.class_id);
    ds.ids.push_back(e.sample_id);
  }
  return ds;
}

Dataset DatasetDir::to_dataset() const {
  std::vector<int> all(manifest.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return subset(all);
}

void split_indices(const DatasetDir& data, double val_fraction, std::vector<int>& train,
                   std::vector<int>& val) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
  train.clear();
  val.clear();
  std::vector<int> per_class(static_cast<std::size_t>(data.info.num_classes), 0);
  for (const auto& e : data.manifest) ++per_class[static_cast<std::size_t>(e.class_id)];
  std::vector<int> seen(per_class.size(), 0);
  for (std::size_t i = 0; i < data.manifest.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.manifest[i].class_id);
    const long n_val = std::lround(val_fraction * per_class[c]);
    if (seen[c]++ >= per_class[c] - n_val) {
      val.push_back(static_cast<int>(i));
    } else {
      train.push_back(static_cast<int>(i));
    }
  }
}

}  // namespace tokenmix
