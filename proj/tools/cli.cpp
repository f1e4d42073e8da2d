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

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tokenmix/binary_io.hpp"
#include "tokenmix/dataset_io.hpp"
#include "tokenmix/eval.hpp"
#include "tokenmix/map_archive.hpp"
#include "tokenmix/mask_sampler.hpp"
#include "tokenmix/mixer.hpp"
#include "tokenmix/ppm.hpp"
#include "tokenmix/synth.hpp"
#include "tokenmix/targets.hpp"
#include "tokenmix/teacher.hpp"
#include "tokenmix/trainer.hpp"
#include "tokenmix/vit.hpp"

namespace tokenmix::cli {
namespace {

namespace fs = std::filesystem;

std::string num(double v, int digits = 9) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------- synth-gen

struct SynthArgs {
  int classes = kNumShapes;
  int per_class = 10;
  std::uint64_t seed = 0;
  int image_size = 64;
  int patch_size = 8;
  std::string out;
};

void synth_gen(const SynthArgs& a, std::ostream& out) {
  if (a.per_class < 1) throw std::invalid_argument("empty dataset");
  if (a.classes < 1 || a.classes > kNumShapes) {
    throw std::invalid_argument("classes must lie in [1, " + std::to_string(kNumShapes) + "]");
  }
  DatasetInfo info;
  info.num_classes = a.classes;
  info.per_class = a.per_class;
  info.seed = a.seed;
  info.options.image_size = a.image_size;
  info.options.patch_size = a.patch_size;
  info.options.layout();
  const auto samples = gen_dataset(a.per_class, a.seed, info.options, a.classes);
  write_dataset_dir(a.out, info, samples);
  out << "wrote " << samples.size() << " samples to " << a.out << "\n";
}

// ------------------------------------------------------------ teacher, maps

struct TeacherArgs {
  std::string data;
  int epochs = 3;
  int batch = 8;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  std::string out;
};

void teacher_cmd(const TeacherArgs& a, std::ostream& out) {
  const DatasetDir data = read_dataset_dir(a.data);
  std::vector<int> train_idx, val_idx;
  split_indices(data, a.val_fraction, train_idx, val_idx);
  auto labelled = [&](const std::vector<int>& idx) {
    std::vector<LabeledImage> v;
    for (int i : idx) {
      v.push_back({&data.images[static_cast<std::size_t>(i)],
                   data.manifest[static_cast<std::size_t>(i)].class_id});
    }
    return v;
  };
  const auto train_set = labelled(train_idx);
  const auto val_set = labelled(val_idx);
  TeacherConfig cfg;
  cfg.in_channels = data.info.options.channels;
  cfg.image_size = data.info.options.image_size;
  cfg.num_classes = data.info.num_classes;
  TeacherTrainOptions opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch;
  opts.lr = a.lr;
  opts.seed = a.seed;
  if (opts.batch_size < 1 || !(opts.lr > 0.0)) {
    throw std::invalid_argument("teacher batch and lr must be positive");
  }
  const ToyTeacher teacher = train_teacher(train_set, cfg, opts);
  write_file_bytes(a.out, encode_teacher(teacher));
  out << "teacher train_acc=" << fixed6(teacher_accuracy(teacher, train_set));
  if (!val_set.empty()) out << " val_acc=" << fixed6(teacher_accuracy(teacher, val_set));
  out << "\n";
}

struct MapsArgs {
  std::string teacher;
  bool oracle = false;
  std::string data;
  std::string out;
};

void maps_cmd(const MapsArgs& a, std::ostream& out) {
  if (a.oracle == !a.teacher.empty()) {
    throw std::invalid_argument("exactly one of --teacher or --oracle is required");
  }
  const DatasetDir data = read_dataset_dir(a.data);
  MapArchive archive;
  if (a.oracle) {
    for (int i = 0; i < static_cast<int>(data.manifest.size()); ++i) {
      const SynthSample s = data.regenerate(i);
      archive.records.push_back({s.id, oracle_map(s.fg_mask, s.label)});
    }
  } else {
    const ToyTeacher teacher = decode_teacher(read_file_bytes(a.teacher));
    if (teacher.config().image_size != data.info.options.image_size ||
        teacher.config().in_channels != data.info.options.channels ||
        teacher.config().num_classes < data.info.num_classes) {
      throw std::invalid_argument("teacher does not match the dataset");
    }
    for (std::size_t i = 0; i < data.manifest.size(); ++i) {
      const auto& e = data.manifest[i];
      archive.records.push_back(
          {e.sample_id, normalize_map(cam(teacher, data.images[i], e.class_id), e.class_id)});
    }
  }
  write_archive(archive, a.out);
  out << "wrote " << archive.records.size() << " maps to " << a.out << "\n";
}

// Maps keyed by id at the dataset layout; every sample must have one whose
// class agrees with the manifest.
std::unordered_map<std::string, ActivationMap> load_maps(const std::string& path,
                                                         const DatasetDir& data) {
  auto maps = index_archive(read_archive(path), data.info.options.layout());
  for (const auto& e : data.manifest) {
    const auto it = maps.find(e.sample_id);
    if (it == maps.end()) {
      throw std::runtime_error("no activation map for sample '" + e.sample_id + "'");
    }
    if (it->second.class_id != e.class_id) {
      throw std::runtime_error("activation map class mismatch for sample '" + e.sample_id + "'");
    }
  }
  return maps;
}

// ------------------------------------------------------------------ augment

struct AugmentArgs {
  std::string data;
  std::string maps;
  std::string strategy = "block";
  std::string lambda = "0.5";
  int pairs = 16;
  std::uint64_t seed = 0;
  std::string out;
  std::string replay;
  bool no_images = false;
};

struct PairRecord {
  int a = 0;
  int b = 0;
  MaskStrategy strategy = MaskStrategy::kBlock;
  TokenMask mask;
};

std::string format_recipes(const std::vector<PairRecord>& pairs, const DatasetDir& data) {
  std::ostringstream os;
  os << "pair_id\tsample_a\tsample_b\tstrategy\tlambda\tmask\n";
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& r = pairs[p];
    os << p << '\t' << data.manifest[static_cast<std::size_t>(r.a)].sample_id << '\t'
       << data.manifest[static_cast<std::size_t>(r.b)].sample_id << '\t' << to_string(r.strategy)
       << '\t' << num(r.mask.coverage(), 17) << '\t' << r.mask.to_hex() << '\n';
  }
  return os.str();
}

std::vector<PairRecord> parse_recipes(const std::string& text, const DatasetDir& data) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < data.manifest.size(); ++i) {
    index[data.manifest[i].sample_id] = static_cast<int>(i);
  }
  const PatchLayout layout = data.info.options.layout();
  std::vector<PairRecord> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("pair_id\t", 0) != 0) throw std::runtime_error("recipes file: missing header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, '\t');) f.push_back(x);
    const std::string where = "recipes line " + std::to_string(lineno);
    if (f.size() != 6) throw std::runtime_error(where + ": expected 6 fields");
    if (f[0] != std::to_string(out.size())) throw std::runtime_error(where + ": pair ids out of order");
    PairRecord r;
    for (int k : {1, 2}) {
      const auto it = index.find(f[static_cast<std::size_t>(k)]);
      if (it == index.end()) throw std::runtime_error(where + ": unknown sample '" + f[static_cast<std::size_t>(k)] + "'");
      (k == 1 ? r.a : r.b) = it->second;
    }
    r.strategy = parse_mask_strategy(f[3]);
    r.mask = TokenMask::from_hex(layout.grid_h(), layout.grid_w(), f[5]);
    out.push_back(std::move(r));
  }
  return out;
}

void augment(const AugmentArgs& a, std::ostream& out) {
  const DatasetDir data = read_dataset_dir(a.data);
  const auto maps = load_maps(a.maps, data);
  const PatchLayout layout = data.info.options.layout();
  const int n = static_cast<int>(data.manifest.size());

  std::vector<PairRecord> pairs;
  if (!a.replay.empty()) {
    pairs = parse_recipes(read_text_file(a.replay), data);
  } else {
    if (a.pairs < 1) throw std::invalid_argument("--pairs must be positive");
    AugmentationPolicy policy;
    policy.tokenmix_sampler.strategy = parse_mask_strategy(a.strategy);
    policy.tokenmix_sampler.lambda = LambdaMode::parse(a.lambda);
    policy.validate();
    for (int p = 0; p < a.pairs; ++p) {
      RngStream pick(a.seed, static_cast<std::uint64_t>(p), Purpose::kPairing);
      PairRecord r;
      r.a = static_cast<int>(pick.uniform_int(0, n - 1));
      r.b = static_cast<int>(pick.uniform_int(0, n - 1));
      r.strategy = policy.tokenmix_sampler.strategy;
      MixRecipe recipe = sample_recipe(MixStrategy::kTokenMix, r.a, r.b, policy, layout,
                                       RngKey{a.seed, static_cast<std::uint64_t>(p), 0});
      r.mask = std::move(*recipe.mask);
      pairs.push_back(std::move(r));
    }
  }

  make_dir(a.out);
  if (!a.no_images) make_dir(join(a.out, "images"));
  std::ostringstream targets;
  targets << "pair_id\tclass_a\tscore_a\tclass_b\tscore_b\tlambda\tstrategy\n";
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const PairRecord& r = pairs[p];
    const auto& ea = data.manifest[static_cast<std::size_t>(r.a)];
    const auto& eb = data.manifest[static_cast<std::size_t>(r.b)];
    // Distinct placeholder classes keep the two scores apart even when the
    // pair shares a label.
    const SoftTarget t = tokenmix_target(r.mask, maps.at(ea.sample_id), maps.at(eb.sample_id), 0,
                                         1, 2);
    targets << p << '\t' << ea.class_id << '\t' << num(t.score(0)) << '\t' << eb.class_id << '\t'
            << num(t.score(1)) << '\t' << num(r.mask.coverage()) << '\t' << to_string(r.strategy)
            << '\n';
    if (!a.no_images) {
      const auto mixed = token_mix(patchify(data.images[static_cast<std::size_t>(r.a)], layout),
                                   patchify(data.images[static_cast<std::size_t>(r.b)], layout),
                                   r.mask);
      char name[32];
      std::snprintf(name, sizeof(name), "pair_%05zu.ppm", p);
      write_ppm(join(join(a.out, "images"), name), unpatchify(mixed));
    }
  }
  write_text_file(join(a.out, "targets.tsv"), targets.str());
  write_text_file(join(a.out, "recipes.tsv"), format_recipes(pairs, data));
  out << "wrote " << pairs.size() << " pairs to " << a.out << "\n";
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string maps;
  std::string policy = "tokenmix+mixup";
  std::string loss = "bce";
  int epochs = 20;
  std::uint64_t seed = 0;
  std::string out;
  int batch = 64;
  double lr = 1e-3;
  double weight_decay = 0.05;
  double warmup = 0.05;
  double val_fraction = 0.2;
  std::string mask_strategy = "block";
  std::string tokenmix_lambda = "0.5";
  double apply_probability = 1.0;
  int embed = 64;
  int depth = 4;
  int heads = 4;
  int threads = 1;
};

std::map<std::string, std::string> echo(const TrainArgs& a) {
  std::error_code ec;
  const fs::path data_abs = fs::absolute(a.data, ec);
  const fs::path maps_abs = a.maps.empty() ? fs::path() : fs::absolute(a.maps, ec);
  return {{"data", data_abs.lexically_normal().string()},
          {"maps", maps_abs.empty() ? "" : maps_abs.lexically_normal().string()},
          {"policy", a.policy},
          {"loss", a.loss},
          {"epochs", std::to_string(a.epochs)},
          {"seed", std::to_string(a.seed)},
          {"batch", std::to_string(a.batch)},
          {"lr", num(a.lr, 17)},
          {"min_lr", num(1e-6, 17)},
          {"weight_decay", num(a.weight_decay, 17)},
          {"warmup_fraction", num(a.warmup, 17)},
          {"val_fraction", num(a.val_fraction, 17)},
          {"mask_strategy", a.mask_strategy},
          {"tokenmix_lambda", a.tokenmix_lambda},
          {"cutmix_lambda", "beta:1"},
          {"mixup_lambda", "beta:0.8"},
          {"apply_probability", num(a.apply_probability, 17)},
          {"embed", std::to_string(a.embed)},
          {"depth", std::to_string(a.depth)},
          {"heads", std::to_string(a.heads)},
          {"threads", std::to_string(a.threads)}};
}

void train_cmd(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg;
  cfg.policy = AugmentationPolicy::parse(a.policy);
  cfg.policy.tokenmix_sampler.strategy = parse_mask_strategy(a.mask_strategy);
  cfg.policy.tokenmix_sampler.lambda = LambdaMode::parse(a.tokenmix_lambda);
  cfg.policy.apply_probability = a.apply_probability;
  cfg.loss = parse_loss(a.loss);
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  cfg.batch_size = a.batch;
  cfg.lr = a.lr;
  cfg.weight_decay = a.weight_decay;
  cfg.warmup_fraction = a.warmup;
  cfg.threads = a.threads;
  cfg.validate();

  const DatasetDir data = read_dataset_dir(a.data);
  std::vector<int> train_idx, val_idx;
  split_indices(data, a.val_fraction, train_idx, val_idx);
  const Dataset train_set = data.subset(train_idx);
  const Dataset val_set = data.subset(val_idx);

  std::unordered_map<std::string, ActivationMap> maps;
  if (!a.maps.empty()) {
    maps = load_maps(a.maps, data);
    cfg.policy.target_source = TargetSource::kActivationMaps;
  }

  TinyViTConfig mc;
  mc.layout = data.info.options.layout();
  mc.embed_dim = a.embed;
  mc.depth = a.depth;
  mc.heads = a.heads;
  mc.num_classes = data.info.num_classes;
  mc.validate();
  TinyViT<float> model(mc);
  model.init(a.seed);

  make_dir(a.out);
  write_text_file(join(a.out, "config.txt"), format_key_values(echo(a)));
  const TrainResult result = train(model, train_set, val_set, cfg, a.maps.empty() ? nullptr : &maps);
  std::ostringstream metrics;
  metrics << "epoch\tpolicy_counts\ttrain_loss\ttrain_acc\tval_acc\n";
  for (const auto& m : result.metrics) metrics << format_metrics(m) << '\n';
  write_text_file(join(a.out, "metrics.tsv"), metrics.str());
  write_file_bytes(join(a.out, "model.bin"), encode_model(model));
  if (!result.metrics.empty()) {
    const auto& last = result.metrics.back();
    out << "epoch " << last.epoch << " train_loss=" << fixed6(last.train_loss)
        << " train_acc=" << fixed6(last.train_acc) << " val_acc=" << fixed6(last.val_acc) << "\n";
  } else {
    out << "no epochs run\n";
  }
}

// ----------------------------------------------------------- eval-occlusion

struct EvalArgs {
  std::string model;
  std::string ratios = "0:0.9:0.1";
  int seeds = 3;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary;
  std::string confidence;
  int threads = 1;
};

void eval_cmd(const EvalArgs& a, std::ostream& out) {
  if (a.seeds < 1) throw std::invalid_argument("--seeds must be positive");
  const auto cfg = parse_key_values(read_text_file(join(a.model, "config.txt")));
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = cfg.find(key);
    if (it == cfg.end()) throw std::runtime_error("config.txt is missing '" + key + "'");
    return it->second;
  };
  const TinyViT<float> model = decode_model(read_file_bytes(join(a.model, "model.bin")));
  const DatasetDir data = read_dataset_dir(get("data"));
  std::vector<int> train_idx, val_idx;
  split_indices(data, std::stod(get("val_fraction")), train_idx, val_idx);
  const Dataset val_set = data.subset(val_idx);
  if (val_set.size() == 0) throw std::runtime_error("run has no validation split");

  const std::vector<double> ratios = parse_ratios(a.ratios);
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < a.seeds; ++s) seeds.push_back(a.seed + static_cast<std::uint64_t>(s));
  const OcclusionCurve curve = occlusion_sweep(model, val_set, ratios, seeds, a.threads);
  write_text_file(a.out, curve.long_format());
  if (!a.summary.empty()) write_text_file(a.summary, curve.summary());
  if (!a.confidence.empty()) {
    const ConfidenceTable t =
        confidence_report(model, val_set, ratios, parse_loss(get("loss")), a.seed);
    write_text_file(a.confidence, t.to_tsv());
  }
  out << curve.summary();
}

// --------------------------------------------------------------- mask-stats

struct MaskStatsArgs {
  std::string strategy = "block";
  std::string lambda = "0.5";
  int samples = 10000;
  int grid = 14;
  std::uint64_t seed = 0;
  std::string out;
};

void mask_stats_cmd(const MaskStatsArgs& a, std::ostream& out) {
  if (a.samples < 1) throw std::invalid_argument("--samples must be positive");
  SamplerConfig cfg;
  cfg.strategy = parse_mask_strategy(a.strategy);
  cfg.lambda = LambdaMode::parse(a.lambda);
  cfg.validate();
  const PatchLayout layout = PatchLayout::grid(a.grid, a.grid);
  std::ostringstream os;
  os << "sample\tcount\tcoverage\tset_components\tcleared_components\n";
  double set_sum = 0.0, cleared_sum = 0.0;
  int single_cleared = 0;
  for (int i = 0; i < a.samples; ++i) {
    RngStream lam_rng(a.seed, static_cast<std::uint64_t>(i), Purpose::kLambda);
    RngStream mask_rng(a.seed, static_cast<std::uint64_t>(i), Purpose::kMask);
    const RegionMask m = sample_mask(layout, sample_lambda(cfg, lam_rng), cfg, mask_rng);
    const MaskStats set = mask_stats(m.mask);
    const MaskStats cleared = mask_stats(mask_complement(m.mask));
    os << i << '\t' << set.count << '\t' << fixed6(set.coverage) << '\t' << set.components << '\t'
       << cleared.components << '\n';
    set_sum += set.components;
    cleared_sum += cleared.components;
    single_cleared += cleared.components == 1;
  }
  write_text_file(a.out, os.str());
  out << "strategy=" << to_string(cfg.strategy) << " samples=" << a.samples
      << " mean_set_components=" << fixed6(set_sum / a.samples)
      << " mean_cleared_components=" << fixed6(cleared_sum / a.samples)
      << " single_cleared_fraction=" << fixed6(static_cast<double>(single_cleared) / a.samples)
      << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Token-level mixing augmentation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-gen", "Generate the synthetic shape dataset");
  s->add_option("--classes", synth.classes, "Number of shape classes")->capture_default_str();
  s->add_option("--per-class", synth.per_class, "Samples per class")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--image-size", synth.image_size)->capture_default_str();
  s->add_option("--patch-size", synth.patch_size)->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();

  TeacherArgs teacher;
  auto* t = app.add_subcommand("teacher", "Train the toy CNN teacher");
  t->add_option("--data", teacher.data)->required();
  t->add_option("--epochs", teacher.epochs)->capture_default_str();
  t->add_option("--batch", teacher.batch)->capture_default_str();
  t->add_option("--lr", teacher.lr)->capture_default_str();
  t->add_option("--seed", teacher.seed)->capture_default_str();
  t->add_option("--val-fraction", teacher.val_fraction)->capture_default_str();
  t->add_option("--out", teacher.out)->required();

  MapsArgs maps;
  auto* m = app.add_subcommand("maps", "Write an activation-map archive");
  m->add_option("--teacher", maps.teacher, "Teacher weights");
  m->add_flag("--oracle", maps.oracle, "Use ground-truth foreground masks");
  m->add_option("--data", maps.data)->required();
  m->add_option("--out", maps.out)->required();

  AugmentArgs aug;
  auto* g = app.add_subcommand("augment", "Write token-mixed pairs and their targets");
  g->add_option("--data", aug.data)->required();
  g->add_option("--maps", aug.maps)->required();
  g->add_option("--strategy", aug.strategy, "block|random|region")->capture_default_str();
  g->add_option("--lambda", aug.lambda, "0.5 or beta:ALPHA")->capture_default_str();
  g->add_option("--pairs", aug.pairs)->capture_default_str();
  g->add_option("--seed", aug.seed)->capture_default_str();
  g->add_option("--replay", aug.replay, "Recipes file from an earlier run");
  g->add_flag("--no-images", aug.no_images, "Skip writing mixed images");
  g->add_option("--out", aug.out)->required();

  TrainArgs tr;
  auto* r = app.add_subcommand("train", "Train the tiny vision transformer");
  r->add_option("--data", tr.data)->required();
  r->add_option("--maps", tr.maps, "Activation maps for TokenMix targets");
  r->add_option("--policy", tr.policy)->capture_default_str();
  r->add_option("--loss", tr.loss, "bce|ce")->capture_default_str();
  r->add_option("--epochs", tr.epochs)->capture_default_str();
  r->add_option("--seed", tr.seed)->capture_default_str();
  r->add_option("--batch", tr.batch)->capture_default_str();
  r->add_option("--lr", tr.lr)->capture_default_str();
  r->add_option("--weight-decay", tr.weight_decay)->capture_default_str();
  r->add_option("--warmup", tr.warmup, "Warm-up fraction of all steps")->capture_default_str();
  r->add_option("--val-fraction", tr.val_fraction)->capture_default_str();
  r->add_option("--mask-strategy", tr.mask_strategy)->capture_default_str();
  r->add_option("--tokenmix-lambda", tr.tokenmix_lambda)->capture_default_str();
  r->add_option("--apply-probability", tr.apply_probability)->capture_default_str();
  r->add_option("--embed", tr.embed)->capture_default_str();
  r->add_option("--depth", tr.depth)->capture_default_str();
  r->add_option("--heads", tr.heads)->capture_default_str();
  r->add_option("--threads", tr.threads)->capture_default_str();
  r->add_option("--out", tr.out)->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval-occlusion", "Accuracy under random token dropping");
  e->add_option("--model", ev.model, "Run directory")->required();
  e->add_option("--ratios", ev.ratios, "lo:hi:step or a,b,c")->capture_default_str();
  e->add_option("--seeds", ev.seeds)->capture_default_str();
  e->add_option("--seed", ev.seed, "First occlusion seed")->capture_default_str();
  e->add_option("--summary", ev.summary, "Write ratio/mean/std table");
  e->add_option("--confidence", ev.confidence, "Write per-sample confidence table");
  e->add_option("--threads", ev.threads)->capture_default_str();
  e->add_option("--out", ev.out)->required();

  MaskStatsArgs ms;
  auto* k = app.add_subcommand("mask-stats", "Connected-component statistics of sampled masks");
  k->add_option("--strategy", ms.strategy)->capture_default_str();
  k->add_option("--lambda", ms.lambda)->capture_default_str();
  k->add_option("--samples", ms.samples)->capture_default_str();
  k->add_option("--grid", ms.grid)->capture_default_str();
  k->add_option("--seed", ms.seed)->capture_default_str();
  k->add_option("--out", ms.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  try {
    if (*s) synth_gen(synth, out);
    if (*t) teacher_cmd(teacher, out);
    if (*m) maps_cmd(maps, out);
    if (*g) augment(aug, out);
    if (*r) train_cmd(tr, out);
    if (*e) eval_cmd(ev, out);
    if (*k) mask_stats_cmd(ms, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tokenmix::cli
