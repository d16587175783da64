// Copyright 2026 The mimicsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mimicsr/nn/tensor.hpp"

#include <algorithm>

#include "mimicsr/error.hpp"

namespace mimicsr::nn {

Tensor::Tensor(int n, int c, int h, int w, float fill)
    : n_(n), c_(c), h_(h), w_(w), data_(static_cast<size_t>(n) * c * h * w, fill) {
  MIMICSR_CHECK(n >= 0 && c >= 0 && h >= 0 && w >= 0, "Tensor: negative dimension");
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(h_) + "," +
         std::to_string(w_) + ")";
}

Tensor Tensor::from_images(std::span<const Image> images) {
  MIMICSR_CHECK(!images.empty(), "Tensor::from_images: empty batch");
  const int h = images[0].height(), w = images[0].width();
  Tensor t(static_cast<int>(images.size()), Image::kChannels, h, w);
  for (size_t i = 0; i < images.size(); ++i) {
    MIMICSR_CHECK(images[i].height() == h && images[i].width() == w, "Tensor::from_images: mixed image sizes");
    for (int c = 0; c < Image::kChannels; ++c) {
      auto src = images[i].channel(c);
      std::copy(src.begin(), src.end(), t.map(static_cast<int>(i), c));
    }
  }
  return t;
}

Tensor Tensor::from_image(const Image& image) { return from_images(std::span<const Image>(&image, 1)); }

Image Tensor::to_image(int i) const {
  MIMICSR_CHECK(c_ == Image::kChannels, "Tensor::to_image: tensor must have 3 channels");
  MIMICSR_CHECK(i >= 0 && i < n_, "Tensor::to_image: sample index out of range");
  Image img(h_, w_);
  for (int c = 0; c < Image::kChannels; ++c) std::copy_n(map(i, c), map_size(), img.channel(c).begin());
  return img;
}

Tensor Tensor::slice_batch(int first, int count) const {
  MIMICSR_CHECK(first >= 0 && count >= 0 && first + count <= n_, "Tensor::slice_batch: out of range");
  Tensor t(count, c_, h_, w_);
  for (int c = 0; c < c_; ++c) std::copy_n(map(first, c), map_size() * count, t.channel(c));
  return t;
}

void add_inplace(Tensor& a, const Tensor& b) {
  MIMICSR_CHECK(a.same_shape(b), "add_inplace: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  float* pa = a.data();
  const float* pb = b.data();
  for (size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  MIMICSR_CHECK(!parts.empty(), "concat_channels: nothing to concatenate");
  const Tensor& first = *parts[0];
  int channels = 0;
  for (const Tensor* p : parts) {
    MIMICSR_CHECK(p->n() == first.n() && p->h() == first.h() && p->w() == first.w(),
                  "concat_channels: incompatible shapes");
    channels += p->c();
  }
  Tensor out(first.n(), channels, first.h(), first.w());
  float* dst = out.data();
  for (const Tensor* p : parts) dst = std::copy(p->data(), p->data() + p->size(), dst);
  return out;
}

Tensor slice_channels(const Tensor& t, int first, int count) {
  MIMICSR_CHECK(first >= 0 && count >= 0 && first + count <= t.c(), "slice_channels: out of range");
  Tensor out(t.n(), count, t.h(), t.w());
  std::copy_n(t.channel(first), t.channel_stride() * count, out.data());
  return out;
}

}  // namespace mimicsr::nn
