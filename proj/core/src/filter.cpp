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

#include "mimicsr/filter.hpp"

#include <cmath>

#include "mimicsr/resample.hpp"

namespace mimicsr {

std::vector<float> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += std::exp(-0.5 * i * i / (sigma * sigma));
  for (int i = -radius; i <= radius; ++i)
    taps[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)) / sum);
  return taps;
}

namespace {

// Rows, then columns.
Plane separable(const Plane& in, const std::vector<float>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  const int h = in.height, w = in.width;
  Plane tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * in(y, reflect_symmetric(x + k, w));
      tmp(y, x) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int k = -r; k <= r; ++k) {
      const int sy = reflect_symmetric(y + k, h);
      const float t = taps[k + r];
      for (int x = 0; x < w; ++x) out(y, x) += t * tmp(sy, x);
    }
  return out;
}

}  // namespace

Plane gaussian_blur(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  return separable(in, gaussian_taps(sigma));
}

Image gaussian_blur(const Image& in, double sigma) {
  if (sigma <= 0.0) return in;
  Image out(in.height(), in.width());
  for (int c = 0; c < Image::kChannels; ++c) out.set_plane(c, gaussian_blur(in.plane(c), sigma));
  return out;
}

Plane gaussian_blur_adjoint(const Plane& grad_out, double sigma) {
  if (sigma <= 0.0) return grad_out;
  // Adjoint of (V o H) is H^T o V^T: run the transposed passes in reverse.
  const auto taps = gaussian_taps(sigma);
  const int r = static_cast<int>(taps.size() / 2);
  const int h = grad_out.height, w = grad_out.width;
  Plane tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int k = -r; k <= r; ++k) {
      const int sy = reflect_symmetric(y + k, h);
      for (int x = 0; x < w; ++x) tmp(sy, x) += taps[k + r] * grad_out(y, x);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = -r; k <= r; ++k) out(y, reflect_symmetric(x + k, w)) += taps[k + r] * tmp(y, x);
  return out;
}

Image gaussian_blur_adjoint(const Image& grad_out, double sigma) {
  if (sigma <= 0.0) return grad_out;
  Image out(grad_out.height(), grad_out.width());
  for (int c = 0; c < Image::kChannels; ++c) out.set_plane(c, gaussian_blur_adjoint(grad_out.plane(c), sigma));
  return out;
}

}  // namespace mimicsr
