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

#include "tokenmix/vit.hpp"

#include <cmath>
#include <numbers>

#include "tokenmix/binary_io.hpp"
#include "tokenmix/rng.hpp"

namespace tokenmix {

void TinyViTConfig::validate() const {
  if (embed_dim <= 0 || depth < 0 || heads <= 0 || mlp_ratio <= 0 || num_classes <= 0) {
    throw std::invalid_argument("TinyViT: dimensions must be positive");
  }
  if (embed_dim % heads != 0) {
    throw std::invalid_argument("TinyViT: embed_dim must be divisible by heads");
  }
}

TinyViTConfig linear_probe_config(const PatchLayout& layout, int embed_dim, int num_classes) {
  TinyViTConfig cfg;
  cfg.layout = layout;
  cfg.embed_dim = embed_dim;
  cfg.depth = 0;
  cfg.heads = 1;
  cfg.num_classes = num_classes;
  cfg.class_token = false;
  cfg.final_norm = false;
  return cfg;
}

namespace {

constexpr double kNormEps = 1e-6;

template <typename Scalar>
struct NormResult {
  RowMatrix<Scalar> xhat;
  Vector<Scalar> inv_std;
  RowMatrix<Scalar> y;
};

template <typename Scalar, typename Gain, typename Bias>
NormResult<Scalar> layer_norm(const RowMatrix<Scalar>& x, const Gain& gain, const Bias& bias) {
  NormResult<Scalar> r;
  const Vector<Scalar> mean = x.rowwise().mean();
  RowMatrix<Scalar> centered = x.colwise() - mean;
  const Vector<Scalar> var = centered.rowwise().squaredNorm() / static_cast<Scalar>(x.cols());
  r.inv_std = (var.array() + static_cast<Scalar>(kNormEps)).rsqrt().matrix();
  r.xhat = centered.array().colwise() * r.inv_std.array();
  r.y = (r.xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
  return r;
}

template <typename Scalar, typename Gain, typename DGain, typename DBias>
RowMatrix<Scalar> layer_norm_backward(const RowMatrix<Scalar>& dy, const RowMatrix<Scalar>& xhat,
                                      const Vector<Scalar>& inv_std, const Gain& gain,
                                      DGain&& dgain, DBias&& dbias) {
  dgain += dy.cwiseProduct(xhat).colwise().sum();
  dbias += dy.colwise().sum();
  const RowMatrix<Scalar> dxhat = dy.array().rowwise() * gain.array();
  const Vector<Scalar> m1 = dxhat.rowwise().mean();
  const Vector<Scalar> m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
  RowMatrix<Scalar> dx = dxhat.colwise() - m1;
  dx -= (xhat.array().colwise() * m2.array()).matrix();
  return dx.array().colwise() * inv_std.array();
}

template <typename Scalar>
Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
  const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x / std::numbers::sqrt2_v<Scalar>));
  const Scalar pdf = std::exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
                     std::numbers::sqrt2_v<Scalar>;
  return cdf + x * pdf;
}

template <typename Scalar>
void softmax_rows(RowMatrix<Scalar>& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

template <typename Scalar>
struct TinyViT<Scalar>::Cache {
  struct Block {
    Mat h_in;
    NormResult<Scalar> ln1;
    Mat qkv;
    std::vector<Mat> attn;
    Mat o;
    Mat h_mid;
    NormResult<Scalar> ln2;
    Mat z1;
    Mat g;
  };
  Mat tokens;
  std::vector<Block> blocks;
  Mat h_out;
  NormResult<Scalar> final_ln;
  Mat f;
  Vec pooled;
};

template <typename Scalar>
TinyViT<Scalar>::TinyViT(TinyViTConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg_.embed_dim;
  const int hidden = d * cfg_.mlp_ratio;
  patch_w_ = layout_.add("patch.weight", cfg_.layout.token_dim(), d, true);
  patch_b_ = layout_.add("patch.bias", 1, d, false);
  if (cfg_.class_token) cls_ = layout_.add("cls", 1, d, false);
  pos_ = layout_.add("pos", cfg_.sequence_length(), d, false);
  for (int l = 0; l < cfg_.depth; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    BlockIds b;
    b.ln1_g = layout_.add(p + "ln1.gain", 1, d, false);
    b.ln1_b = layout_.add(p + "ln1.bias", 1, d, false);
    b.qkv_w = layout_.add(p + "attn.qkv.weight", d, 3 * d, true);
    b.qkv_b = layout_.add(p + "attn.qkv.bias", 1, 3 * d, false);
    b.proj_w = layout_.add(p + "attn.proj.weight", d, d, true);
    b.proj_b = layout_.add(p + "attn.proj.bias", 1, d, false);
    b.ln2_g = layout_.add(p + "ln2.gain", 1, d, false);
    b.ln2_b = layout_.add(p + "ln2.bias", 1, d, false);
    b.fc1_w = layout_.add(p + "mlp.fc1.weight", d, hidden, true);
    b.fc1_b = layout_.add(p + "mlp.fc1.bias", 1, hidden, false);
    b.fc2_w = layout_.add(p + "mlp.fc2.weight", hidden, d, true);
    b.fc2_b = layout_.add(p + "mlp.fc2.bias", 1, d, false);
    blocks_.push_back(b);
  }
  if (cfg_.final_norm) {
    norm_g_ = layout_.add("norm.gain", 1, d, false);
    norm_b_ = layout_.add("norm.bias", 1, d, false);
  }
  head_w_ = layout_.add("head.weight", d, cfg_.num_classes, true);
  head_b_ = layout_.add("head.bias", 1, cfg_.num_classes, false);
  params_ = Vec::Zero(layout_.size());
  for (const BlockIds& b : blocks_) {
    layout_.view(params_, b.ln1_g).setOnes();
    layout_.view(params_, b.ln2_g).setOnes();
  }
  if (cfg_.final_norm) layout_.view(params_, norm_g_).setOnes();
}

template <typename Scalar>
void TinyViT<Scalar>::init(std::uint64_t seed) {
  RngStream rng(seed, 0, Purpose::kInit);
  params_.setZero();
  for (const auto& e : layout_.entries()) {
    const bool gain = e.name.find("gain") != std::string::npos;
    const bool bias = e.name.find("bias") != std::string::npos;
    auto v = params_.segment(e.offset, e.rows * e.cols);
    if (gain) {
      v.setOnes();
    } else if (e.name.ends_with("weight")) {
      // Stored fan_in x fan_out.
      const double bound = 1.0 / std::sqrt(static_cast<double>(e.rows));
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = static_cast<Scalar>(bound * (2.0 * rng.uniform() - 1.0));
      }
    } else if (!bias) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = static_cast<Scalar>(0.02 * rng.normal());
    }
  }
}

template <typename Scalar>
typename TinyViT<Scalar>::Mat TinyViT<Scalar>::embed(const Mat& tokens) const {
  const auto& l = cfg_.layout;
  if (tokens.rows() != l.num_tokens() || tokens.cols() != l.token_dim()) {
    throw std::invalid_argument("TinyViT: input is " + std::to_string(tokens.rows()) + "x" +
                                std::to_string(tokens.cols()) + ", layout expects " +
                                std::to_string(l.num_tokens()) + "x" +
                                std::to_string(l.token_dim()));
  }
  Mat e = tokens * layout_.view(params_, patch_w_);
  e.rowwise() += layout_.view(params_, patch_b_).row(0);
  Mat h(cfg_.sequence_length(), cfg_.embed_dim);
  if (cfg_.class_token) {
    h.row(0) = layout_.view(params_, cls_).row(0);
    h.bottomRows(e.rows()) = e;
  } else {
    h = e;
  }
  h += layout_.view(params_, pos_);
  return h;
}

template <typename Scalar>
typename TinyViT<Scalar>::Output TinyViT<Scalar>::run(const Mat& tokens, bool keep_attention,
                                                      Cache* cache) const {
  const int d = cfg_.embed_dim;
  const int dh = cfg_.head_dim();
  const int seq = cfg_.sequence_length();
  const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(dh)));
  Output out;
  Mat h = embed(tokens);
  if (cache) {
    cache->tokens = tokens;
    cache->blocks.resize(blocks_.size());
  }

  for (std::size_t li = 0; li < blocks_.size(); ++li) {
    const BlockIds& b = blocks_[li];
    NormResult<Scalar> ln1 =
        layer_norm(h, layout_.view(params_, b.ln1_g).row(0), layout_.view(params_, b.ln1_b).row(0));
    Mat qkv = ln1.y * layout_.view(params_, b.qkv_w);
    qkv.rowwise() += layout_.view(params_, b.qkv_b).row(0);

    Mat o(seq, d);
    std::vector<Mat> attn(cfg_.heads);
    Mat cls_rows(cfg_.heads, seq);
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      const auto q = qkv.middleCols(hd * dh, dh);
      const auto k = qkv.middleCols(d + hd * dh, dh);
      const auto v = qkv.middleCols(2 * d + hd * dh, dh);
      Mat s = (q * k.transpose()) * scale;
      softmax_rows(s);
      o.middleCols(hd * dh, dh) = s * v;
      if (keep_attention) {
        cls_rows.row(hd) = cfg_.class_token ? Mat(s.row(0)) : Mat(s.colwise().mean());
      }
      attn[hd] = std::move(s);
    }
    if (keep_attention) out.cls_attention.push_back(std::move(cls_rows));

    Mat h_mid = h + o * layout_.view(params_, b.proj_w);
    h_mid.rowwise() += layout_.view(params_, b.proj_b).row(0);

    NormResult<Scalar> ln2 = layer_norm(h_mid, layout_.view(params_, b.ln2_g).row(0),
                                        layout_.view(params_, b.ln2_b).row(0));
    Mat z1 = ln2.y * layout_.view(params_, b.fc1_w);
    z1.rowwise() += layout_.view(params_, b.fc1_b).row(0);
    Mat g = z1.unaryExpr([](Scalar x) { return gelu(x); });
    Mat h_next = h_mid + g * layout_.view(params_, b.fc2_w);
    h_next.rowwise() += layout_.view(params_, b.fc2_b).row(0);

    if (cache) {
      auto& c = cache->blocks[li];
      c.h_in = std::move(h);
      c.ln1 = std::move(ln1);
      c.qkv = std::move(qkv);
      c.attn = std::move(attn);
      c.o = std::move(o);
      c.h_mid = std::move(h_mid);
      c.ln2 = std::move(ln2);
      c.z1 = std::move(z1);
      c.g = std::move(g);
    }
    h = std::move(h_next);
  }

  Mat f;
  if (cfg_.final_norm) {
    NormResult<Scalar> fl =
        layer_norm(h, layout_.view(params_, norm_g_).row(0), layout_.view(params_, norm_b_).row(0));
    f = fl.y;
    if (cache) cache->final_ln = std::move(fl);
  } else {
    f = h;
  }
  const Vec pooled = cfg_.class_token ? Vec(f.row(0).transpose()) : Vec(f.colwise().mean().transpose());
  out.logits = layout_.view(params_, head_w_).transpose() * pooled +
               layout_.view(params_, head_b_).row(0).transpose();
  if (cache) {
    cache->h_out = std::move(h);
    cache->f = std::move(f);
    cache->pooled = pooled;
  }
  return out;
}

template <typename Scalar>
typename TinyViT<Scalar>::Output TinyViT<Scalar>::forward(const Mat& tokens,
                                                          bool keep_attention) const {
  return run(tokens, keep_attention, nullptr);
}

template <typename Scalar>
Scalar TinyViT<Scalar>::accumulate_gradient(const Mat& tokens, const LossFn& loss, Vec& grad,
                                            Vec* logits_out) const {
  if (grad.size() != layout_.size()) throw std::invalid_argument("gradient buffer has wrong size");
  Cache c;
  const Output out = run(tokens, false, &c);
  Vec dlogits = Vec::Zero(out.logits.size());
  const Scalar value = loss(out.logits, dlogits);
  if (logits_out) *logits_out = out.logits;

  const int d = cfg_.embed_dim;
  const int dh = cfg_.head_dim();
  const int seq = cfg_.sequence_length();
  const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(dh)));
  auto P = [&](int id) { return layout_.view(params_, id); };
  auto G = [&](int id) { return layout_.view(grad, id); };

  G(head_w_) += c.pooled * dlogits.transpose();
  G(head_b_).row(0) += dlogits.transpose();
  const Vec dpooled = P(head_w_) * dlogits;
  Mat df = Mat::Zero(seq, d);
  if (cfg_.class_token) {
    df.row(0) = dpooled.transpose();
  } else {
    df.rowwise() = dpooled.transpose() / static_cast<Scalar>(seq);
  }

  Mat dh_out = cfg_.final_norm
                   ? layer_norm_backward<Scalar>(df, c.final_ln.xhat, c.final_ln.inv_std,
                                                 P(norm_g_).row(0), G(norm_g_).row(0),
                                                 G(norm_b_).row(0))
                   : df;

  for (int li = static_cast<int>(blocks_.size()) - 1; li >= 0; --li) {
    const BlockIds& b = blocks_[li];
    const auto& bc = c.blocks[li];

    // MLP branch.
    G(b.fc2_w) += bc.g.transpose() * dh_out;
    G(b.fc2_b).row(0) += dh_out.colwise().sum();
    Mat dz1 = dh_out * P(b.fc2_w).transpose();
    dz1.array() *= bc.z1.unaryExpr([](Scalar x) { return gelu_grad(x); }).array();
    G(b.fc1_w) += bc.ln2.y.transpose() * dz1;
    G(b.fc1_b).row(0) += dz1.colwise().sum();
    const Mat du2 = dz1 * P(b.fc1_w).transpose();
    Mat dh_mid = dh_out + layer_norm_backward<Scalar>(du2, bc.ln2.xhat, bc.ln2.inv_std,
                                                      P(b.ln2_g).row(0), G(b.ln2_g).row(0),
                                                      G(b.ln2_b).row(0));

    // Attention branch.
    G(b.proj_w) += bc.o.transpose() * dh_mid;
    G(b.proj_b).row(0) += dh_mid.colwise().sum();
    const Mat d_o = dh_mid * P(b.proj_w).transpose();
    Mat dqkv(seq, 3 * d);
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      const Mat& a = bc.attn[hd];
      const auto q = bc.qkv.middleCols(hd * dh, dh);
      const auto k = bc.qkv.middleCols(d + hd * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + hd * dh, dh);
      const auto doh = d_o.middleCols(hd * dh, dh);
      dqkv.middleCols(2 * d + hd * dh, dh) = a.transpose() * doh;
      const Mat da = doh * v.transpose();
      const Vec row_dot = da.cwiseProduct(a).rowwise().sum();
      Mat ds = a.cwiseProduct(da.colwise() - row_dot);
      ds *= scale;
      dqkv.middleCols(hd * dh, dh) = ds * k;
      dqkv.middleCols(d + hd * dh, dh) = ds.transpose() * q;
    }
    G(b.qkv_w) += bc.ln1.y.transpose() * dqkv;
    G(b.qkv_b).row(0) += dqkv.colwise().sum();
    const Mat du1 = dqkv * P(b.qkv_w).transpose();
    dh_out = dh_mid + layer_norm_backward<Scalar>(du1, bc.ln1.xhat, bc.ln1.inv_std,
                                                  P(b.ln1_g).row(0), G(b.ln1_g).row(0),
                                                  G(b.ln1_b).row(0));
  }

  G(pos_) += dh_out;
  Mat de;
  if (cfg_.class_token) {
    G(cls_).row(0) += dh_out.row(0);
    de = dh_out.bottomRows(seq - 1);
  } else {
    de = dh_out;
  }
  G(patch_w_) += c.tokens.transpose() * de;
  G(patch_b_).row(0) += de.colwise().sum();
  return value;
}

template class TinyViT<float>;
template class TinyViT<double>;

namespace {
constexpr char kModelMagic[4] = {'T', 'V', 'I', 'T'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_model(const TinyViT<float>& model) {
  const TinyViTConfig& c = model.config();
  ByteWriter w;
  w.bytes(std::string_view(kModelMagic, 4));
  w.u16(kModelVersion);
  for (int v : {c.layout.image_h, c.layout.image_w, c.layout.channels, c.layout.patch_size,
                c.embed_dim, c.depth, c.heads, c.mlp_ratio, c.num_classes}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u8(c.class_token ? 1 : 0);
  w.u8(c.final_norm ? 1 : 0);
  w.u64(static_cast<std::uint64_t>(model.params().size()));
  for (Eigen::Index i = 0; i < model.params().size(); ++i) w.f32(model.params()(i));
  return w.buffer();
}

TinyViT<float> decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4, "magic") != std::string_view(kModelMagic, 4)) {
    throw ParseError("bad magic (expected \"TVIT\")", 0);
  }
  if (r.u16("version") != kModelVersion) r.fail("unsupported model version");
  std::array<int, 9> v{};
  for (int& x : v) {
    const std::uint32_t raw = r.u32("config field");
    if (raw > 1u << 16) r.fail("implausible model configuration");
    x = static_cast<int>(raw);
  }
  TinyViTConfig c;
  try {
    c.layout = PatchLayout::make(v[0], v[1], v[2], v[3]);
    c.embed_dim = v[4];
    c.depth = v[5];
    c.heads = v[6];
    c.mlp_ratio = v[7];
    c.num_classes = v[8];
    c.class_token = r.u8("class token flag") != 0;
    c.final_norm = r.u8("final norm flag") != 0;
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), r.offset());
  }
  TinyViT<float> model(c);
  if (r.u64("parameter count") != static_cast<std::uint64_t>(model.params().size())) {
    r.fail("parameter count does not match configuration");
  }
  for (Eigen::Index i = 0; i < model.params().size(); ++i) model.params()(i) = r.f32("parameter");
  if (!r.at_end()) r.fail("trailing bytes");
  return model;
}

}  // namespace tokenmix
