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

#include "tokenmix/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tokenmix/binary_io.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {
namespace {

using Mat = RowMatrix<double>;

Mat im2col(const Mat& x, int channels, int size) {
  Mat cols = Mat::Zero(static_cast<Eigen::Index>(channels) * 9, size * size);
  for (int ci = 0; ci < channels; ++ci) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const int row = ci * 9 + ky * 3 + kx;
        for (int y = 0; y < size; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= size) continue;
          for (int xx = 0; xx < size; ++xx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= size) continue;
            cols(row, y * size + xx) = x(ci, sy * size + sx);
          }
        }
      }
    }
  }
  return cols;
}

Mat col2im(const Mat& cols, int channels, int size) {
  Mat x = Mat::Zero(channels, size * size);
  for (int ci = 0; ci < channels; ++ci) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const int row = ci * 9 + ky * 3 + kx;
        for (int y = 0; y < size; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= size) continue;
          for (int xx = 0; xx < size; ++xx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= size) continue;
            x(ci, sy * size + sx) += cols(row, y * size + xx);
          }
        }
      }
    }
  }
  return x;
}

Mat avgpool2(const Mat& a, int size) {
  const int half = size / 2;
  Mat p(a.rows(), half * half);
  for (int y = 0; y < half; ++y) {
    for (int x = 0; x < half; ++x) {
      const int i = 2 * y * size + 2 * x;
      p.col(y * half + x) =
          0.25 * (a.col(i) + a.col(i + 1) + a.col(i + size) + a.col(i + size + 1));
    }
  }
  return p;
}

Mat avgpool2_backward(const Mat& dp, int size) {
  const int half = size / 2;
  Mat da(dp.rows(), size * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) da.col(y * size + x) = 0.25 * dp.col((y / 2) * half + x / 2);
  }
  return da;
}

Mat image_to_input(const Image<float>& img) {
  Mat x(img.channels, static_cast<Eigen::Index>(img.height) * img.width);
  for (int c = 0; c < img.channels; ++c) {
    for (int i = 0; i < img.height; ++i) {
      for (int j = 0; j < img.width; ++j) {
        x(c, i * img.width + j) = (img(c, i, j) - kPixelMean) / kPixelStd;
      }
    }
  }
  return x;
}

}  // namespace

struct ToyTeacher::Trace {
  std::array<Mat, 3> cols;
  std::array<Mat, 3> pre;  // before ReLU
  Mat features;            // pooled output of the last stage
  Vector<double> pooled;   // global average
  Vector<double> logits;
};

ToyTeacher::ToyTeacher(TeacherConfig cfg) : cfg_(cfg) {
  if (cfg_.image_size % 8 != 0 || cfg_.image_size < 16) {
    throw std::invalid_argument("teacher image size must be a multiple of 8 and >= 16");
  }
  int in_ch = cfg_.in_channels;
  int size = cfg_.image_size;
  for (int s = 0; s < 3; ++s) {
    const int out_ch = cfg_.widths[s];
    stages_[s].in_ch = in_ch;
    stages_[s].out_ch = out_ch;
    stages_[s].size = size;
    stages_[s].weight = layout_.add("conv" + std::to_string(s) + ".weight", out_ch, in_ch * 9, true);
    stages_[s].bias = layout_.add("conv" + std::to_string(s) + ".bias", out_ch, 1, false);
    in_ch = out_ch;
    size /= 2;
  }
  head_w_ = layout_.add("head.weight", cfg_.feature_channels(), cfg_.num_classes, true);
  head_b_ = layout_.add("head.bias", cfg_.num_classes, 1, false);
  params_ = Vector<double>::Zero(layout_.size());
}

void ToyTeacher::init(std::uint64_t seed) {
  RngStream rng(seed, 0, Purpose::kInit);
  params_.setZero();
  for (const Stage& st : stages_) {
    auto w = layout_.view(params_, st.weight);
    const double std = std::sqrt(2.0 / (st.in_ch * 9));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = std * rng.normal();
  }
  auto hw = layout_.view(params_, head_w_);
  const double std = 1.0 / std::sqrt(static_cast<double>(cfg_.feature_channels()));
  for (Eigen::Index i = 0; i < hw.size(); ++i) hw.data()[i] = std * rng.normal();
}

ToyTeacher::Trace ToyTeacher::run(const Image<float>& img) const {
  if (img.channels != cfg_.in_channels || img.height != cfg_.image_size ||
      img.width != cfg_.image_size) {
    throw std::invalid_argument("teacher input does not match its configuration");
  }
  Trace t;
  Mat x = image_to_input(img);
  for (int s = 0; s < 3; ++s) {
    const Stage& st = stages_[s];
    t.cols[s] = im2col(x, st.in_ch, st.size);
    t.pre[s] = layout_.view(params_, st.weight) * t.cols[s];
    t.pre[s].colwise() += layout_.view(params_, st.bias).col(0);
    x = avgpool2(t.pre[s].cwiseMax(0.0), st.size);
  }
  t.features = std::move(x);
  t.pooled = t.features.rowwise().mean();
  t.logits = layout_.view(params_, head_w_).transpose() * t.pooled +
             layout_.view(params_, head_b_).col(0);
  return t;
}

RowMatrix<double> ToyTeacher::features(const Image<float>& img) const {
  return run(img).features;
}

Vector<double> ToyTeacher::logits(const Image<float>& img) const { return run(img).logits; }

int ToyTeacher::predict(const Image<float>& img) const {
  Eigen::Index best;
  logits(img).maxCoeff(&best);
  return static_cast<int>(best);
}

Eigen::Map<const RowMatrix<double>> ToyTeacher::classifier() const {
  return layout_.view(params_, head_w_);
}

Eigen::Map<RowMatrix<double>> ToyTeacher::classifier() { return layout_.view(params_, head_w_); }

double ToyTeacher::loss_and_grad(const Image<float>& img, int label,
                                 Vector<double>& grad) const {
  if (label < 0 || label >= cfg_.num_classes) throw std::invalid_argument("label out of range");
  const Trace t = run(img);
  const double zmax = t.logits.maxCoeff();
  Vector<double> prob = (t.logits.array() - zmax).exp().matrix();
  const double denom = prob.sum();
  prob /= denom;
  const double loss = -(t.logits(label) - zmax - std::log(denom));

  Vector<double> dz = prob;
  dz(label) -= 1.0;
  layout_.view(grad, head_w_) += t.pooled * dz.transpose();
  layout_.view(grad, head_b_).col(0) += dz;
  const Vector<double> dpooled = layout_.view(params_, head_w_) * dz;
  Mat dx = dpooled.replicate(1, t.features.cols()) / static_cast<double>(t.features.cols());

  for (int s = 2; s >= 0; --s) {
    const Stage& st = stages_[s];
    Mat da = avgpool2_backward(dx, st.size);
    da.array() *= (t.pre[s].array() > 0.0).cast<double>();
    layout_.view(grad, st.weight) += da * t.cols[s].transpose();
    layout_.view(grad, st.bias).col(0) += da.rowwise().sum();
    if (s > 0) dx = col2im(layout_.view(params_, st.weight).transpose() * da, st.in_ch, st.size);
  }
  return loss;
}

RowArray<double> cam_from_features(const RowMatrix<double>& features,
                                   const Eigen::Ref<const RowMatrix<double>>& weights,
                                   int class_id, int grid_h, int grid_w) {
  if (class_id < 0 || class_id >= weights.cols()) {
    throw std::invalid_argument("cam: class id " + std::to_string(class_id) + " out of range");
  }
  if (features.rows() != weights.rows() || features.cols() != grid_h * grid_w) {
    throw std::invalid_argument("cam: feature/weight shape mismatch");
  }
  const Vector<double> flat = features.transpose() * weights.col(class_id);
  return Eigen::Map<const RowArray<double>>(flat.data(), grid_h, grid_w);
}

RowArray<double> cam(const ToyTeacher& teacher, const Image<float>& img, int class_id) {
  const int g = teacher.config().feature_size();
  return cam_from_features(teacher.features(img), teacher.classifier(), class_id, g, g);
}

ActivationMap oracle_map(const TokenMask& fg_mask, int class_id) {
  ActivationMap map;
  map.class_id = class_id;
  map.normalized = true;
  map.values = RowArray<double>::Zero(fg_mask.grid_h(), fg_mask.grid_w());
  if (fg_mask.count() == 0) {
    map.values.setConstant(1.0 / fg_mask.size());
    return map;
  }
  const double mass = 1.0 / fg_mask.count();
  for (int i = 0; i < fg_mask.size(); ++i) {
    if (fg_mask.test(i)) map.values(i / fg_mask.grid_w(), i % fg_mask.grid_w()) = mass;
  }
  return map;
}

ToyTeacher train_teacher(std::span<const LabeledImage> data, const TeacherConfig& cfg,
                         const TeacherTrainOptions& opts) {
  ToyTeacher teacher(cfg);
  teacher.init(opts.seed);
  if (opts.epochs <= 0 || data.empty()) return teacher;

  AdamW<double> adam;
  adam.weight_decay = 1e-4;
  const Vector<double> decay = teacher.layout().decay_mask<double>();
  const int n = static_cast<int>(data.size());
  const int batches = (n + opts.batch_size - 1) / opts.batch_size;
  const long total = static_cast<long>(batches) * opts.epochs;
  std::vector<int> order(n);
  long step = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle(opts.seed, static_cast<std::uint64_t>(epoch), Purpose::kShuffle);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<int>(shuffle.uniform_int(0, i))]);
    }
    for (int b = 0; b < batches; ++b, ++step) {
      const int lo = b * opts.batch_size;
      const int hi = std::min(n, lo + opts.batch_size);
      Vector<double> grad = Vector<double>::Zero(teacher.layout().size());
      for (int k = lo; k < hi; ++k) {
        const LabeledImage& s = data[order[k]];
        teacher.loss_and_grad(*s.image, s.label, grad);
      }
      grad /= static_cast<double>(hi - lo);
      adam.update(teacher.params(), grad, decay,
                  cosine_lr(step, total, std::max(1L, total / 20), opts.lr, opts.lr * 0.01));
    }
  }
  return teacher;
}

double teacher_accuracy(const ToyTeacher& teacher, std::span<const LabeledImage> data) {
  if (data.empty()) return 0.0;
  int correct = 0;
  for (const LabeledImage& s : data) correct += teacher.predict(*s.image) == s.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {
constexpr char kTeacherMagic[4] = {'T', 'T', 'C', 'H'};
constexpr std::uint16_t kTeacherVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_teacher(const ToyTeacher& teacher) {
  const TeacherConfig& c = teacher.config();
  ByteWriter w;
  w.bytes(std::string_view(kTeacherMagic, 4));
  w.u16(kTeacherVersion);
  w.u32(static_cast<std::uint32_t>(c.in_channels));
  w.u32(static_cast<std::uint32_t>(c.image_size));
  for (int width : c.widths) w.u32(static_cast<std::uint32_t>(width));
  w.u32(static_cast<std::uint32_t>(c.num_classes));
  w.u64(static_cast<std::uint64_t>(teacher.params().size()));
  for (Eigen::Index i = 0; i < teacher.params().size(); ++i) w.f64(teacher.params()(i));
  return w.buffer();
}

ToyTeacher decode_teacher(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4, "magic") != std::string_view(kTeacherMagic, 4)) {
    throw ParseError("bad magic (expected \"TTCH\")", 0);
  }
  if (r.u16("version") != kTeacherVersion) r.fail("unsupported teacher version");
  TeacherConfig c;
  c.in_channels = static_cast<int>(r.u32("in_channels"));
  c.image_size = static_cast<int>(r.u32("image_size"));
  for (int& width : c.widths) width = static_cast<int>(r.u32("width"));
  c.num_classes = static_cast<int>(r.u32("num_classes"));
  const bool sane = c.in_channels > 0 && c.in_channels <= 16 && c.image_size > 0 &&
                    c.image_size <= 4096 && c.num_classes > 0 && c.num_classes <= 4096 &&
                    std::all_of(c.widths.begin(), c.widths.end(),
                                [](int v) { return v > 0 && v <= 1024; });
  if (!sane) r.fail("implausible teacher configuration");
  ToyTeacher teacher = [&] {
    try {
      return ToyTeacher(c);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), r.offset());
    }
  }();
  const std::uint64_t count = r.u64("parameter count");
  if (count != static_cast<std::uint64_t>(teacher.params().size())) {
    r.fail("parameter count does not match configuration");
  }
  for (Eigen::Index i = 0; i < teacher.params().size(); ++i) {
    teacher.params()(i) = r.f64("parameter");
  }
  if (!teacher.params().allFinite()) r.fail("non-finite teacher parameter");
  if (!r.at_end()) r.fail("trailing bytes");
  return teacher;
}

}  // namespace tokenmix
