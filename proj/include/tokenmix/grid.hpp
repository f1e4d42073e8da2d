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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tokenmix {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowArray =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Geometry binding an H x W x C image to a grid of P x P tokens.
struct PatchLayout {
  int image_h = 0;
  int image_w = 0;
  int channels = 0;
  int patch_size = 0;

  // Throws std::invalid_argument unless every field is positive and the
  // patch size divides both image dimensions.
  static PatchLayout make(int image_h, int image_w, int channels,
                          int patch_size);
  // A layout whose token grid is grid_h x grid_w with 1-pixel patches.
  static PatchLayout grid(int grid_h, int grid_w);

  int grid_h() const { return image_h / patch_size; }
  int grid_w() const { return image_w / patch_size; }
  int num_tokens() const { return grid_h() * grid_w(); }
  int token_dim() const { return patch_size * patch_size * channels; }

  friend bool operator==(const PatchLayout&, const PatchLayout&) = default;
};

std::string to_string(const PatchLayout& layout);

/// Dense C x H x W image. Pixels are stored as a (C*H) x W row-major array:
/// channel c occupies rows [c*H, (c+1)*H).
template <typename Scalar>
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  RowArray<Scalar> pixels;

  Image() = default;
  Image(int c, int h, int w)
      : channels(c), height(h), width(w),
        pixels(RowArray<Scalar>::Zero(static_cast<Eigen::Index>(c) * h, w)) {}

  Scalar& operator()(int c, int i, int j) { return pixels(c * height + i, j); }
  Scalar operator()(int c, int i, int j) const {
    return pixels(c * height + i, j);
  }

  auto plane(int c) { return pixels.middleRows(c * height, height); }
  auto plane(int c) const { return pixels.middleRows(c * height, height); }

  bool matches(const PatchLayout& layout) const {
    return channels == layout.channels && height == layout.image_h &&
           width == layout.image_w;
  }

  template <typename Other>
  Image<Other> cast() const {
    Image<Other> out;
    out.channels = channels;
    out.height = height;
    out.width = width;
    out.pixels = pixels.template cast<Other>();
    return out;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.channels == b.channels && a.height == b.height &&
           a.width == b.width && (a.pixels == b.pixels).all();
  }
};

/// Image stored as one row per token; rows follow row-major grid order and
/// each row is flattened channel-major, then pixel-row-major.
template <typename Scalar>
struct PatchImage {
  PatchLayout layout;
  RowMatrix<Scalar> tokens;  // num_tokens x token_dim

  PatchImage() = default;
  explicit PatchImage(const PatchLayout& l)
      : layout(l),
        tokens(RowMatrix<Scalar>::Zero(l.num_tokens(), l.token_dim())) {}

  template <typename Other>
  PatchImage<Other> cast() const {
    PatchImage<Other> out;
    out.layout = layout;
    out.tokens = tokens.template cast<Other>();
    return out;
  }

  friend bool operator==(const PatchImage& a, const PatchImage& b) {
    return a.layout == b.layout && a.tokens == b.tokens;
  }
};

template <typename Scalar>
PatchImage<Scalar> patchify(const Image<Scalar>& img,
                            const PatchLayout& layout) {
  if (!img.matches(layout)) {
    throw std::invalid_argument("patchify: image " +
                                std::to_string(img.channels) + "x" +
                                std::to_string(img.height) + "x" +
                                std::to_string(img.width) +
                                " does not match layout " + to_string(layout));
  }
  const int p = layout.patch_size;
  PatchImage<Scalar> out(layout);
  for (int r = 0; r < layout.grid_h(); ++r) {
    for (int c = 0; c < layout.grid_w(); ++c) {
      auto row = out.tokens.row(r * layout.grid_w() + c);
      for (int ch = 0; ch < layout.channels; ++ch) {
        const auto block = img.plane(ch).block(r * p, c * p, p, p);
        for (int di = 0; di < p; ++di) {
          row.segment((ch * p + di) * p, p) = block.row(di).matrix();
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
Image<Scalar> unpatchify(const PatchImage<Scalar>& patches) {
  const PatchLayout& layout = patches.layout;
  if (patches.tokens.rows() != layout.num_tokens() ||
      patches.tokens.cols() != layout.token_dim()) {
    throw std::invalid_argument("unpatchify: token matrix does not match layout");
  }
  const int p = layout.patch_size;
  Image<Scalar> img(layout.channels, layout.image_h, layout.image_w);
  for (int r = 0; r < layout.grid_h(); ++r) {
    for (int c = 0; c < layout.grid_w(); ++c) {
      const auto row = patches.tokens.row(r * layout.grid_w() + c);
      for (int ch = 0; ch < layout.channels; ++ch) {
        auto block = img.plane(ch).block(r * p, c * p, p, p);
        for (int di = 0; di < p; ++di) {
          block.row(di) = row.segment((ch * p + di) * p, p).array();
        }
      }
    }
  }
  return img;
}

/// Binary occupancy over a token grid. Set bits mark tokens taken from the
/// first image of a mixed pair.
class TokenMask {
 public:
  TokenMask() = default;
  TokenMask(int grid_h, int grid_w, bool fill = false);
  static TokenMask from_bits(int grid_h, int grid_w,
                             std::vector<std::uint8_t> bits);

  int grid_h() const { return grid_h_; }
  int grid_w() const { return grid_w_; }
  int size() const { return grid_h_ * grid_w_; }
  int count() const { return count_; }
  double coverage() const {
    return size() == 0 ? 0.0 : static_cast<double>(count_) / size();
  }

  bool test(int index) const { return bits_[index] != 0; }
  bool test(int row, int col) const { return test(row * grid_w_ + col); }
  void set(int index, bool value = true);
  void set(int row, int col, bool value = true) {
    set(row * grid_w_ + col, value);
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  bool same_grid(const TokenMask& other) const {
    return grid_h_ == other.grid_h_ && grid_w_ == other.grid_w_;
  }
  bool matches(const PatchLayout& layout) const {
    return grid_h_ == layout.grid_h() && grid_w_ == layout.grid_w();
  }

  // Hex encoding of the bit vector, 4 tokens per digit, row-major.
  std::string to_hex() const;
  static TokenMask from_hex(int grid_h, int grid_w, const std::string& hex);

  friend bool operator==(const TokenMask&, const TokenMask&) = default;

 private:
  int grid_h_ = 0;
  int grid_w_ = 0;
  int count_ = 0;
  std::vector<std::uint8_t> bits_;
};

TokenMask mask_complement(const TokenMask& mask);

struct MaskStats {
  int count = 0;
  double coverage = 0.0;
  int components = 0;
  // Sizes in discovery order of a row-major scan.
  std::vector<int> component_sizes;
};

// 4-connected components of the set bits.
MaskStats mask_stats(const TokenMask& mask);

}  // namespace tokenmix
