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

#include "tokenmix/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tokenmix {
namespace {

void check_ratio(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("drop ratio must lie in [0, 1], got " + std::to_string(r));
  }
}

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

std::string fmt_ratio(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

template <typename Fn>
void for_each_sample(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int i = t; i < n; i += workers) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

TokenMask occlusion_mask(const PatchLayout& layout, double ratio, RngStream& rng) {
  check_ratio(ratio);
  return sample_random_mask(layout, ratio, rng);
}

PatchImage<float> occlude(const PatchImage<float>& p, double ratio, RngStream& rng) {
  PatchImage<float> out = p;
  out.tokens = occlude<float>(p.tokens, p.layout, ratio, rng);
  return out;
}

std::string OcclusionCurve::long_format() const {
  std::ostringstream os;
  os << "ratio\tseed\taccuracy\n";
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      os << fmt_ratio(ratios[r]) << '\t' << seeds[s] << '\t' << fmt(accuracy[r][s], 6) << '\n';
    }
  }
  return os.str();
}

std::string OcclusionCurve::summary() const {
  std::ostringstream os;
  os << "ratio\tmean\tstd\n";
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    os << fmt_ratio(ratios[r]) << '\t' << fmt(mean[r], 6) << '\t' << fmt(stddev[r], 6) << '\n';
  }
  return os.str();
}

template <typename Scalar>
OcclusionCurve occlusion_sweep(const TinyViT<Scalar>& model, const Dataset& data,
                               const std::vector<double>& ratios,
                               const std::vector<std::uint64_t>& seeds, int threads) {
  for (double r : ratios) check_ratio(r);
  if (seeds.empty()) throw std::invalid_argument("occlusion sweep needs at least one seed");
  const PatchLayout& layout = model.config().layout;
  OcclusionCurve curve;
  curve.ratios = ratios;
  curve.seeds = seeds;
  const int n = data.size();
  for (double ratio : ratios) {
    std::vector<double> per_seed;
    for (std::uint64_t seed : seeds) {
      std::vector<int> hit(n, 0);
      for_each_sample(n, threads, [&](int i) {
        RngStream rng = occlusion_stream(seed, static_cast<std::uint64_t>(i));
        const RowMatrix<Scalar> x = occlude<Scalar>(model_input<Scalar>(data.inputs[i]), layout,
                                                    ratio, rng);
        Eigen::Index best;
        model.forward(x).logits.maxCoeff(&best);
        hit[i] = static_cast<int>(best) == data.labels[i];
      });
      int correct = 0;
      for (int h : hit) correct += h;
      per_seed.push_back(n > 0 ? static_cast<double>(correct) / n : 0.0);
    }
    double mean = 0.0;
    for (double a : per_seed) mean += a;
    mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (double a : per_seed) var += (a - mean) * (a - mean);
    if (per_seed.size() > 1) var /= static_cast<double>(per_seed.size() - 1);
    curve.accuracy.push_back(per_seed);
    curve.mean.push_back(mean);
    curve.stddev.push_back(per_seed.size() > 1 ? std::sqrt(var) : 0.0);
  }
  return curve;
}

template OcclusionCurve occlusion_sweep(const TinyViT<float>&, const Dataset&,
                                        const std::vector<double>&,
                                        const std::vector<std::uint64_t>&, int);
template OcclusionCurve occlusion_sweep(const TinyViT<double>&, const Dataset&,
                                        const std::vector<double>&,
                                        const std::vector<std::uint64_t>&, int);

std::string ConfidenceTable::to_tsv() const {
  std::ostringstream os;
  os << "sample_id";
  for (double r : ratios) os << '\t' << fmt_ratio(r);
  os << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    os << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < values.cols(); ++j) os << '\t' << fmt(values(i, j), 6);
    os << '\n';
  }
  return os.str();
}

template <typename Scalar>
ConfidenceTable confidence_report(const TinyViT<Scalar>& model, const Dataset& data,
                                  const std::vector<double>& ratios, LossKind loss,
                                  std::uint64_t seed) {
  for (double r : ratios) check_ratio(r);
  const PatchLayout& layout = model.config().layout;
  ConfidenceTable t;
  t.ids = data.ids;
  t.ratios = ratios;
  t.values.resize(data.size(), static_cast<Eigen::Index>(ratios.size()));
  for (int i = 0; i < data.size(); ++i) {
    const RowMatrix<Scalar> x = model_input<Scalar>(data.inputs[i]);
    for (std::size_t j = 0; j < ratios.size(); ++j) {
      RngStream rng = occlusion_stream(seed, static_cast<std::uint64_t>(i));
      const auto logits = model.forward(occlude<Scalar>(x, layout, ratios[j], rng)).logits;
      t.values(i, static_cast<Eigen::Index>(j)) =
          static_cast<double>(class_confidence<Scalar>(loss, logits, data.labels[i]));
    }
  }
  return t;
}

template ConfidenceTable confidence_report(const TinyViT<float>&, const Dataset&,
                                           const std::vector<double>&, LossKind, std::uint64_t);
template ConfidenceTable confidence_report(const TinyViT<double>&, const Dataset&,
                                           const std::vector<double>&, LossKind, std::uint64_t);

double foreground_fraction(const Eigen::Ref<const Eigen::RowVectorXd>& row, const TokenMask& fg,
                           bool class_token) {
  const int offset = class_token ? 1 : 0;
  if (row.size() != fg.size() + offset) {
    throw std::invalid_argument("attention row length does not match the token grid");
  }
  double on = 0.0;
  double total = 0.0;
  for (int t = 0; t < fg.size(); ++t) {
    const double a = row(t + offset);
    total += a;
    if (fg.test(t)) on += a;
  }
  return total > 0.0 ? on / total : 0.0;
}

template <typename Scalar>
std::vector<double> foreground_attention_score(const TinyViT<Scalar>& model,
                                               const Dataset& data,
                                               const std::vector<TokenMask>& fg_masks) {
  if (fg_masks.size() != data.inputs.size()) {
    throw std::invalid_argument("one foreground mask per sample is required");
  }
  const TinyViTConfig& cfg = model.config();
  std::vector<double> score(static_cast<std::size_t>(cfg.depth), 0.0);
  if (data.size() == 0) return score;
  for (int i = 0; i < data.size(); ++i) {
    const auto out = model.forward(model_input<Scalar>(data.inputs[i]), true);
    for (int l = 0; l < cfg.depth; ++l) {
      const auto& attn = out.cls_attention[static_cast<std::size_t>(l)];
      for (Eigen::Index h = 0; h < attn.rows(); ++h) {
        const Eigen::RowVectorXd row = attn.row(h).template cast<double>();
        score[static_cast<std::size_t>(l)] +=
            foreground_fraction(row, fg_masks[static_cast<std::size_t>(i)], cfg.class_token);
      }
    }
  }
  for (double& s : score) s /= static_cast<double>(data.size()) * cfg.heads;
  return score;
}

template std::vector<double> foreground_attention_score(const TinyViT<float>&, const Dataset&,
                                                        const std::vector<TokenMask>&);
template std::vector<double> foreground_attention_score(const TinyViT<double>&, const Dataset&,
                                                        const std::vector<TokenMask>&);

std::vector<double> parse_ratios(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad ratio list '" + text + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("bad ratio range '" + text + "'");
    const double lo = number(parts[0]);
    const double hi = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0) || hi < lo) throw std::invalid_argument("bad ratio range '" + text + "'");
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  if (out.empty()) throw std::invalid_argument("empty ratio list");
  for (double r : out) check_ratio(r);
  return out;
}

}  // namespace tokenmix
