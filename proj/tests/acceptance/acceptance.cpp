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


// Acceptance checks. Prints one PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "../oracles.hpp"
#include "cli.hpp"
#include "tokenmix/binary_io.hpp"
#include "tokenmix/dataset_io.hpp"
#include "tokenmix/eval.hpp"
#include "tokenmix/grad_check.hpp"
#include "tokenmix/map_archive.hpp"
#include "tokenmix/mask_sampler.hpp"
#include "tokenmix/mixer.hpp"
#include "tokenmix/rng.hpp"
#include "tokenmix/synth.hpp"
#include "tokenmix/targets.hpp"
#include "tokenmix/teacher.hpp"
#include "tokenmix/trainer.hpp"
#include "tokenmix/vit.hpp"

namespace fs = std::filesystem;
using namespace tokenmix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<PatchLayout> kGrids = {PatchLayout::grid(8, 8), PatchLayout::grid(14, 14),
                                         PatchLayout::grid(16, 16)};

TokenMask random_mask(const PatchLayout& l, RngStream& rng) {
  return sample_random_mask(l, rng.uniform(), rng);
}

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "tokenmix");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tokenmix_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ------------------------------------------------------------------ 1

Outcome mask_exactness() {
  long violations = 0, checked = 0;
  for (const PatchLayout& l : kGrids) {
    const int n = l.num_tokens();
    for (int k = 0; k <= 10; ++k) {
      const double lambda = k / 10.0;
      for (MaskStrategy s : {MaskStrategy::kRegion, MaskStrategy::kRandom, MaskStrategy::kBlock}) {
        SamplerConfig cfg;
        cfg.strategy = s;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
          RngStream rng(seed, static_cast<std::uint64_t>(k), Purpose::kMask);
          const RegionMask m = sample_mask(l, lambda, cfg, rng);
          const double basis = s == MaskStrategy::kRegion ? m.lambda_actual : lambda;
          violations += m.mask.count() != std::lround(basis * n);
          ++checked;
        }
      }
    }
  }
  return {violations == 0, std::to_string(checked) + " masks, " + std::to_string(violations) +
                               " violations"};
}

// ------------------------------------------------------------------ 2

Outcome uniform_maps_equal_linear() {
  double worst = 0.0;
  RngStream rng(2, 0, Purpose::kMask);
  for (int i = 0; i < 10000; ++i) {
    const PatchLayout& l = kGrids[static_cast<std::size_t>(i % 3)];
    const TokenMask m = random_mask(l, rng);
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 8));
    const int a = static_cast<int>(rng.uniform_int(0, k - 1));
    const int b = static_cast<int>(rng.uniform_int(0, k - 1));
    const RowArray<double> ones = RowArray<double>::Ones(l.grid_h(), l.grid_w());
    const SoftTarget t = tokenmix_target(m, normalize_map(ones, a), normalize_map(ones, b), a, b, k);
    const SoftTarget lin = linear_target(m.coverage(), a, b, k);
    worst = std::max(worst, (t.dense() - lin.dense()).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "10000 masks, max |diff| " + fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ 3

Outcome oracle_exactness() {
  const auto samples = gen_dataset(40, 3);
  RngStream rng(3, 0, Purpose::kPairing);
  RngStream mask_rng(3, 0, Purpose::kMask);
  int bad = 0;
  double worst = 0.0;
  const PatchLayout l = SynthOptions{}.layout();
  for (int i = 0; i < 1000; ++i) {
    const auto& sa = samples[static_cast<std::size_t>(rng.uniform_int(0, 319))];
    const SynthSample* sb = &sa;
    while (sb->label == sa.label) sb = &samples[static_cast<std::size_t>(rng.uniform_int(0, 319))];
    SamplerConfig cfg;
    cfg.strategy = static_cast<MaskStrategy>(i % 3);
    const TokenMask m = sample_mask(l, mask_rng.uniform(), cfg, mask_rng).mask;
    int in_a = 0, out_b = 0;
    for (int t = 0; t < m.size(); ++t) {
      in_a += m.test(t) && sa.fg_mask.test(t);
      out_b += !m.test(t) && sb->fg_mask.test(t);
    }
    const SoftTarget s = tokenmix_target(m, oracle_map(sa.fg_mask, sa.label),
                                         oracle_map(sb->fg_mask, sb->label), sa.label, sb->label,
                                         kNumShapes);
    const int na = sa.fg_mask.count(), nb = sb->fg_mask.count();
    const double ea = std::abs(s.score(sa.label) * na - in_a);
    const double eb = std::abs(s.score(sb->label) * nb - out_b);
    worst = std::max({worst, ea, eb});
    bad += std::lround(s.score(sa.label) * na) != in_a || std::lround(s.score(sb->label) * nb) != out_b ||
           ea > 1e-9 || eb > 1e-9;
  }
  return {bad == 0, "1000 cases, " + std::to_string(bad) + " mismatches, max |score*|fg| - k| " +
                        fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ 4

Outcome expectation_property() {
  const PatchLayout l = PatchLayout::grid(14, 14);
  RngStream map_rng(4, 0, Purpose::kSynth);
  RowArray<double> ra(14, 14), rb(14, 14);
  for (Eigen::Index i = 0; i < ra.size(); ++i) {
    ra.data()[i] = std::pow(map_rng.uniform(), 3.0);
    rb.data()[i] = map_rng.uniform();
  }
  const ActivationMap ma = normalize_map(ra, 0), mb = normalize_map(rb, 1);
  bool pass = true;
  std::string detail;
  for (double lambda : {0.3, 0.5, 0.7}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20000; ++seed) {
      RngStream rng(seed, 4, Purpose::kMask);
      sum += tokenmix_target(sample_random_mask(l, lambda, rng), ma, mb, 0, 1, 2).score(0);
    }
    const double mean = sum / 20000.0;
    pass = pass && std::abs(mean - lambda) <= 0.01;
    detail += fmt("lambda %.1f", lambda) + fmt(": E[score_a] %.4f; ", mean);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// ------------------------------------------------------------------ 5

Outcome beta_distribution() {
  auto draws = [](double alpha) {
    RngStream rng(5, static_cast<std::uint64_t>(alpha * 100), Purpose::kLambda);
    std::vector<double> xs(10000);
    for (double& x : xs) x = rng.beta(alpha, alpha);
    return xs;
  };
  const double d1 = oracle::ks_distance(draws(1.0), [](double x) { return x; });
  const double d02 = oracle::ks_distance(draws(0.2), [](double x) { return oracle::beta_cdf(x, 0.2, 0.2); });
  const double d2 = oracle::ks_distance(draws(2.0), [](double x) { return oracle::beta_cdf(x, 2.0, 2.0); });
  return {d1 < 0.02 && d02 < 0.02 && d2 < 0.02,
          fmt("KS Beta(1,1) %.4f", d1) + fmt(", Beta(0.2,0.2) %.4f", d02) +
              fmt(", Beta(2,2) %.4f", d2)};
}

// ------------------------------------------------------------------ 6

Outcome mixing_identities() {
  RngStream rng(6, 0, Purpose::kSynth);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int p = static_cast<int>(rng.uniform_int(1, 6));
    const int gh = static_cast<int>(rng.uniform_int(1, 8)), gw = static_cast<int>(rng.uniform_int(1, 8));
    const PatchLayout l = PatchLayout::make(gh * p, gw * p, static_cast<int>(rng.uniform_int(1, 3)), p);
    auto image = [&] {
      Image<float> img(l.channels, l.image_h, l.image_w);
      for (Eigen::Index k = 0; k < img.pixels.size(); ++k) {
        img.pixels.data()[k] = static_cast<float>(rng.normal());
      }
      return img;
    };
    const Image<float> ia = image(), ib = image();
    const PatchImage<float> a = patchify(ia, l), b = patchify(ib, l);
    const TokenMask m = random_mask(l, rng);
    bad += !(token_mix(a, b, TokenMask(gh, gw, true)) == a);
    bad += !(token_mix(a, b, TokenMask(gh, gw, false)) == b);
    bad += !(token_mix(a, b, m) == token_mix(b, a, mask_complement(m)));
    bad += !(unpatchify(a) == ia);
    bad += !(patchify(unpatchify(b), l) == b);
  }
  return {bad == 0, "1000 cases, " + std::to_string(bad) + " failed identities"};
}

// ------------------------------------------------------------------ 7

Outcome gradient_correctness() {
  TinyViTConfig cfg;
  TinyViT<double> model(cfg);
  model.init(7);
  RngStream rng(7, 0, Purpose::kSynth);
  RowMatrix<double> x(cfg.layout.num_tokens(), cfg.layout.token_dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Vector<double> target(cfg.num_classes);
  for (Eigen::Index i = 0; i < target.size(); ++i) target(i) = rng.uniform();
  bool pass = true;
  std::string detail;
  for (LossKind kind : {LossKind::kBCE, LossKind::kCE}) {
    const GradCheckReport r = grad_check(model, x, target, kind, 1e-4);
    pass = pass && r.passed;
    detail += std::string(kind == LossKind::kBCE ? "BCE" : "CE") + fmt(" max rel err %.3g", r.max_rel_error) +
              " (" + r.worst_kind + ", " + std::to_string(r.coordinates) + " coords); ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// ------------------------------------------------------------------ 8

Outcome determinism() {
  const fs::path d = scratch_dir("determinism");
  auto p = [&](const std::string& s) { return (d / s).string(); };
  bool ok = cli_run({"synth-gen", "--per-class", "6", "--seed", "8", "--out", p("data")}) == 0 &&
            cli_run({"maps", "--oracle", "--data", p("data"), "--out", p("maps.tmap")}) == 0;
  for (const char* run : {"aug1", "aug2"}) {
    ok = ok && cli_run({"augment", "--data", p("data"), "--maps", p("maps.tmap"), "--pairs", "64",
                        "--seed", "8", "--out", p(run)}) == 0;
  }
  ok = ok && cli_run({"augment", "--data", p("data"), "--maps", p("maps.tmap"), "--replay",
                      p("aug1/recipes.tsv"), "--out", p("aug3")}) == 0;
  const std::vector<std::string> train = {"train", "--data", p("data"), "--maps", p("maps.tmap"),
                                          "--epochs", "2", "--batch", "8", "--embed", "16",
                                          "--depth", "2", "--heads", "2", "--seed", "8"};
  for (auto [run, threads] : {std::pair{"run1", "1"}, std::pair{"run2", "1"}, std::pair{"run3", "3"}}) {
    auto args = train;
    args.insert(args.end(), {"--threads", threads, "--out", p(run)});
    ok = ok && cli_run(args) == 0;
  }
  for (auto [run, threads] : {std::pair{"occ1.tsv", "1"}, std::pair{"occ3.tsv", "3"}}) {
    ok = ok && cli_run({"eval-occlusion", "--model", p("run1"), "--threads", threads, "--out", p(run)}) == 0;
  }
  if (!ok) return {false, "a command failed"};
  int files = 0, diffs = 0;
  auto same_tree = [&](const std::string& x, const std::string& y, const std::string& skip = "") {
    for (const auto& e : fs::recursive_directory_iterator(p(x))) {
      if (!e.is_regular_file() || e.path().filename() == skip) continue;
      const fs::path other = fs::path(p(y)) / fs::relative(e.path(), p(x));
      ++files;
      if (!fs::exists(other) || read_file_bytes(e.path().string()) != read_file_bytes(other.string())) {
        ++diffs;
        std::cerr << "  differs: " << other.string() << "\n";
      }
    }
  };
  same_tree("aug1", "aug2");
  same_tree("aug1", "aug3");
  same_tree("run1", "run2");
  same_tree("run1", "run3", "config.txt");
  // The thread count is echoed; everything else in the config must agree.
  auto config = [&](const std::string& run) {
    auto kv = parse_key_values(read_text_file(p(run + "/config.txt")));
    kv.erase("threads");
    return kv;
  };
  ++files;
  diffs += config("run1") != config("run3");
  ++files;
  diffs += read_file_bytes(p("occ1.tsv")) != read_file_bytes(p("occ3.tsv"));
  fs::remove_all(d);
  return {diffs == 0, std::to_string(files) + " file comparisons, " + std::to_string(diffs) + " differ"};
}

// ------------------------------------------------------------------ 9

Dataset to_dataset(const std::vector<const SynthSample*>& samples, const PatchLayout& l) {
  Dataset ds;
  ds.num_classes = kNumShapes;
  for (const SynthSample* s : samples) {
    ds.inputs.push_back(patchify(s->image, l));
    ds.labels.push_back(s->label);
    ds.ids.push_back(s->id);
  }
  return ds;
}

Outcome directional_experiment() {
  const auto start = std::chrono::steady_clock::now();
  const SynthOptions opts;
  const auto samples = gen_dataset(250, 9, opts);
  std::vector<const SynthSample*> tr, va;
  std::vector<int> seen(kNumShapes, 0);
  std::unordered_map<std::string, ActivationMap> maps;
  for (const auto& s : samples) {
    (seen[static_cast<std::size_t>(s.label)]++ < 200 ? tr : va).push_back(&s);
    maps[s.id] = oracle_map(s.fg_mask, s.label);
  }
  const Dataset train_set = to_dataset(tr, opts.layout());
  const Dataset val_set = to_dataset(va, opts.layout());
  std::vector<double> ratios;
  for (int r = 0; r <= 9; ++r) ratios.push_back(r / 10.0);

  TinyViTConfig mc;
  mc.layout = opts.layout();
  mc.embed_dim = 48;
  mc.depth = 2;
  mc.heads = 4;
  mc.num_classes = kNumShapes;

  auto run = [&](const std::string& policy, TargetSource source, std::uint64_t seed) {
    TinyViT<float> model(mc);
    model.init(seed);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 32;
    cfg.seed = seed;
    cfg.policy = AugmentationPolicy::parse(policy);
    cfg.policy.target_source = source;
    // Small-model recipe: TokenMix lambda from Beta(1, 1).
    cfg.policy.tokenmix_sampler.lambda = LambdaMode::beta(1.0);
    train(model, train_set, val_set, cfg, source == TargetSource::kActivationMaps ? &maps : nullptr);
    const OcclusionCurve c = occlusion_sweep(model, val_set, ratios, {0, 1, 2});
    double high = 0.0;
    int n = 0;
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      if (ratios[r] >= 0.5 - 1e-9) {
        high += c.mean[r];
        ++n;
      }
    }
    return std::pair{c.mean[0], high / n};
  };
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [clean_a, a] = run("tokenmix+mixup", TargetSource::kActivationMaps, seed);
    const auto [clean_b, b] = run("cutmix+mixup", TargetSource::kLinear, seed);
    wins += a >= b;
    detail += "seed " + std::to_string(seed) + fmt(" %.4f", a) + fmt(" vs %.4f", b) +
              fmt(" (clean %.3f", clean_a) + fmt("/%.3f); ", clean_b);
    std::cerr << "  criterion 9 " << detail.substr(detail.rfind("seed")) << "\n";
  }
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  detail += std::to_string(wins) + "/5 seeds with TokenMix >= CutMix at drop ratio >= 0.5" +
            fmt(", %.1f min", minutes);
  return {wins >= 4 && minutes < 30.0, detail};
}

// ------------------------------------------------------------------ 10

Outcome strategy_structure() {
  const fs::path d = scratch_dir("mask_stats");
  std::vector<std::vector<double>> cols;  // per strategy: mean set, mean cleared, single cleared
  std::vector<double> means;
  double region_single = 0.0;
  for (const char* s : {"region", "block", "random"}) {
    const std::string out = (d / (std::string(s) + ".tsv")).string();
    if (cli_run({"mask-stats", "--strategy", s, "--lambda", "0.5", "--samples", "10000", "--grid",
                 "14", "--out", out}) != 0) {
      return {false, "mask-stats failed"};
    }
    std::istringstream in(read_text_file(out));
    std::string line;
    std::getline(in, line);
    double set_sum = 0.0, single = 0.0;
    int n = 0;
    while (std::getline(in, line)) {
      std::istringstream f(line);
      int sample, count, set_c, cleared_c;
      double coverage;
      f >> sample >> count >> coverage >> set_c >> cleared_c;
      set_sum += set_c;
      single += cleared_c == 1;
      ++n;
    }
    means.push_back(set_sum / n);
    if (std::string(s) == "region") region_single = single / n;
  }
  fs::remove_all(d);
  return {region_single == 1.0 && means[1] > 1.0 && means[2] > means[1],
          fmt("region single cleared component %.4f", region_single) +
              fmt(", mean components block %.3f", means[1]) + fmt(", random %.3f", means[2])};
}

// ------------------------------------------------------------------ 11

Outcome archive_robustness() {
  RngStream rng(11, 0, Purpose::kSynth);
  MapArchive a;
  for (int i = 0; i < 20; ++i) {
    const int h = static_cast<int>(rng.uniform_int(1, 16)), w = static_cast<int>(rng.uniform_int(1, 16));
    RowArray<double> raw(h, w);
    for (Eigen::Index k = 0; k < raw.size(); ++k) raw.data()[k] = rng.uniform();
    ActivationMap m = normalize_map(raw, i % 8);
    m.values = m.values.cast<float>().cast<double>();
    a.records.push_back({"sample_" + std::to_string(i), m});
  }
  const auto bytes = encode_archive(a);
  const bool round_trip = decode_archive(bytes) == a && encode_archive(decode_archive(bytes)) == bytes;
  int structured = 0, accepted = 0, other = 0;
  for (int c = 0; c < 50; ++c) {
    std::vector<std::uint8_t> bad = bytes;
    if (c % 2 == 0) {
      bad.resize(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()) - 1)));
    } else {
      const int flips = static_cast<int>(rng.uniform_int(1, 8));
      for (int f = 0; f < flips; ++f) {
        // Corruptions concentrate on the header and record framing.
        const auto limit = std::min<std::int64_t>(static_cast<std::int64_t>(bad.size()) - 1, 96);
        bad[static_cast<std::size_t>(rng.uniform_int(0, limit))] ^=
            static_cast<std::uint8_t>(rng.uniform_int(1, 255));
      }
    }
    try {
      decode_archive(bad);
      ++accepted;
    } catch (const ParseError&) {
      ++structured;
    } catch (...) {
      ++other;
    }
  }
  return {round_trip && other == 0,
          std::string("round trip ") + (round_trip ? "exact" : "MISMATCH") + "; 50 fuzz cases: " +
              std::to_string(structured) + " structured errors, " + std::to_string(accepted) +
              " decoded, " + std::to_string(other) + " other failures"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"mask exactness", mask_exactness},
      {"uniform maps equal linear targets", uniform_maps_equal_linear},
      {"oracle map exactness", oracle_exactness},
      {"random sampler expectation", expectation_property},
      {"beta distribution checks", beta_distribution},
      {"mixing identities", mixing_identities},
      {"gradient correctness", gradient_correctness},
      {"determinism", determinism},
      {"directional occlusion experiment", directional_experiment},
      {"mask strategy structure", strategy_structure},
      {"map archive robustness", archive_robustness},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << criteria[i].first
              << " (" << o.detail << fmt("; %.1f s)", secs) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
