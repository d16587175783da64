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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mimicsr/image.hpp"

namespace mimicsr::nn {

// Batch of feature maps with logical shape (n, c, h, w), stored channel-major
// as (c, n, h, w): every channel of the whole batch is one contiguous block,
// so a convolution over the batch is a single GEMM with n*h*w columns.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, float fill = 0.f);

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  size_t size() const { return data_.size(); }
  size_t map_size() const { return static_cast<size_t>(h_) * w_; }
  size_t channel_stride() const { return static_cast<size_t>(n_) * h_ * w_; }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  float* channel(int c) { return data_.data() + c * channel_stride(); }
  const float* channel(int c) const { return data_.data() + c * channel_stride(); }
  float* map(int i, int c) { return channel(c) + i * map_size(); }
  const float* map(int i, int c) const { return channel(c) + i * map_size(); }

  float& at(int i, int c, int y, int x) { return map(i, c)[static_cast<size_t>(y) * w_ + x]; }
  float at(int i, int c, int y, int x) const { return map(i, c)[static_cast<size_t>(y) * w_ + x]; }

  void fill(float v);
  bool same_shape(const Tensor& o) const { return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }
  std::string shape_string() const;

  // Batch of RGB images (all the same size) <-> (n, 3, h, w).
  static Tensor from_images(std::span<const Image> images);
  static Tensor from_image(const Image& image);
  Image to_image(int i) const;

  // Samples [first, first + count) as a new tensor.
  Tensor slice_batch(int first, int count) const;

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<float> data_;
};

// In-place a += b.
void add_inplace(Tensor& a, const Tensor& b);
// Concatenate along channels (all batch/spatial dims equal).
Tensor concat_channels(std::span<const Tensor* const> parts);
// Channels [first, first + count) of t.
Tensor slice_channels(const Tensor& t, int first, int count);

}  // namespace mimicsr::nn
