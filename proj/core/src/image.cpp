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

#include "mimicsr/image.hpp"

#include <algorithm>
#include <cmath>

#include "mimicsr/error.hpp"

namespace mimicsr {

Plane::Plane(int h, int w, float fill) : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {
  MIMICSR_CHECK(h >= 0 && w >= 0, "Plane: negative dimensions");
}

Image::Image(int height, int width, float fill)
    : height_(height), width_(width), data_(static_cast<size_t>(height) * width * kChannels, fill) {
  MIMICSR_CHECK(height >= 0 && width >= 0, "Image: negative dimensions");
}

Plane Image::plane(int c) const {
  Plane p(height_, width_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), p.values.begin());
  return p;
}

void Image::set_plane(int c, const Plane& p) {
  MIMICSR_CHECK(p.height == height_ && p.width == width_, "Image::set_plane: size mismatch");
  std::copy(p.values.begin(), p.values.end(), channel(c).begin());
}

bool same_shape(const Image& a, const Image& b) {
  return a.height() == b.height() && a.width() == b.width();
}

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!same_shape(a, b)) {
    throw InvalidArgument(what + ": dimension mismatch (" + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + ")");
  }
}

Image clamp01(Image img) {
  for (float& v : img.values()) v = std::clamp(v, 0.f, 1.f);
  return img;
}

bool in_unit_range(const Image& img) {
  return std::all_of(img.values().begin(), img.values().end(), [](float v) { return v >= 0.f && v <= 1.f; });
}

bool all_finite(const Image& img) {
  return std::all_of(img.values().begin(), img.values().end(), [](float v) { return std::isfinite(v); });
}

Image crop(const Image& img, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > img.height() || x0 + w > img.width()) {
    throw InvalidArgument("crop: window outside image");
  }
  Image out(h, w);
  for (int c = 0; c < Image::kChannels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  return out;
}

Plane crop(const Plane& p, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > p.height || x0 + w > p.width) {
    throw InvalidArgument("crop: window outside plane");
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(y, x) = p(y0 + y, x0 + x);
  return out;
}

Image flip_horizontal(const Image& img) {
  Image out(img.height(), img.width());
  const int w = img.width();
  for (int c = 0; c < Image::kChannels; ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y, w - 1 - x);
  return out;
}

Image rotate90(const Image& img) {
  const int h = img.height(), w = img.width();
  Image out(w, h);
  // out(y, x) = in(x, w - 1 - y)
  for (int c = 0; c < Image::kChannels; ++c)
    for (int y = 0; y < w; ++y)
      for (int x = 0; x < h; ++x) out.at(c, y, x) = img.at(c, x, w - 1 - y);
  return out;
}

Image apply_dihedral(const Image& img, int k) {
  MIMICSR_CHECK(k >= 0 && k < 8, "apply_dihedral: element must be in [0, 8)");
  Image out = img;
  for (int r = 0; r < k / 2; ++r) out = rotate90(out);
  if (k % 2 == 1) out = flip_horizontal(out);
  return out;
}

Image invert_dihedral(const Image& img, int k) {
  MIMICSR_CHECK(k >= 0 && k < 8, "invert_dihedral: element must be in [0, 8)");
  Image out = img;
  if (k % 2 == 1) out = flip_horizontal(out);
  for (int r = 0; r < (4 - k / 2) % 4; ++r) out = rotate90(out);
  return out;
}

Plane luma(const Image& img) {
  Plane p(img.height(), img.width());
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  for (size_t i = 0; i < p.size(); ++i) p.values[i] = 0.299f * r[i] + 0.587f * g[i] + 0.114f * b[i];
  return p;
}

Plane matlab_y255(const Image& img) {
  Plane p(img.height(), img.width());
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  for (size_t i = 0; i < p.size(); ++i) {
    const double y = 16.0 + 65.481 * r[i] + 128.553 * g[i] + 24.966 * b[i];
    p.values[i] = static_cast<float>(y);
  }
  return p;
}

Image from_gray(const Plane& p) {
  Image img(p.height, p.width);
  for (int c = 0; c < Image::kChannels; ++c) img.set_plane(c, p);
  return img;
}

double mean_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "mean_abs_diff");
  if (a.size() == 0) return 0.0;
  double acc = 0.0;
  auto va = a.values(), vb = b.values();
  for (size_t i = 0; i < va.size(); ++i) acc += std::abs(static_cast<double>(va[i]) - vb[i]);
  return acc / static_cast<double>(va.size());
}

std::vector<double> channel_means(const Image& img) {
  std::vector<double> means(Image::kChannels, 0.0);
  if (img.plane_size() == 0) return means;
  for (int c = 0; c < Image::kChannels; ++c) {
    double acc = 0.0;
    for (float v : img.channel(c)) acc += v;
    means[c] = acc / static_cast<double>(img.plane_size());
  }
  return means;
}

Image quantize8(const Image& img) {
  Image out = img;
  for (float& v : out.values()) v = std::round(std::clamp(v, 0.f, 1.f) * 255.f) / 255.f;
  return out;
}

}  // namespace mimicsr
