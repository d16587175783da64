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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mimicsr {

// Single-channel float raster, row-major. Used for luminance, flow
// components, masks and error maps.
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Plane() = default;
  Plane(int h, int w, float fill = 0.f);

  float& operator()(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  float operator()(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }
  bool operator==(const Plane&) const = default;
};

// H x W x 3 planar RGB raster. Displayable images hold values in [0,1];
// intermediate results (pre-clamp arithmetic) may leave that range.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, float fill = 0.f);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  size_t plane_size() const { return static_cast<size_t>(height_) * width_; }
  size_t size() const { return data_.size(); }

  float& at(int c, int y, int x) { return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x]; }
  float at(int c, int y, int x) const {
    return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x];
  }

  std::span<float> channel(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> channel(int c) const { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  Plane plane(int c) const;
  void set_plane(int c, const Plane& p);

  bool operator==(const Image&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

bool same_shape(const Image& a, const Image& b);
void require_same_shape(const Image& a, const Image& b, const std::string& what);

Image clamp01(Image img);
bool in_unit_range(const Image& img);
bool all_finite(const Image& img);

Image crop(const Image& img, int y0, int x0, int h, int w);
Plane crop(const Plane& p, int y0, int x0, int h, int w);

Image flip_horizontal(const Image& img);
Image rotate90(const Image& img);  // counter-clockwise

// The 8-element flip/rotation group. Element k applies k/2 quarter turns and
// then a horizontal flip when k is odd.
Image apply_dihedral(const Image& img, int k);
Image invert_dihedral(const Image& img, int k);

// Luma with ITU-R BT.601 weights (0.299, 0.587, 0.114), same range as input.
Plane luma(const Image& img);
// MATLAB rgb2ycbcr Y channel on the 8-bit scale [16, 235].
Plane matlab_y255(const Image& img);
Image from_gray(const Plane& p);

double mean_abs_diff(const Image& a, const Image& b);
std::vector<double> channel_means(const Image& img);

// 8-bit PNG I/O. Reads gray, gray+alpha, RGB, RGBA and 16-bit files; alpha is
// dropped. Writes 8-bit RGB after clamping and rounding.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);
// Heatmap of a scalar map with values in [0, vmax], viridis-like colors.
void write_heatmap_png(const std::filesystem::path& path, const Plane& map, float vmax);

// Quantize to 8 bits the way write_png does, without touching disk.
Image quantize8(const Image& img);

}  // namespace mimicsr
