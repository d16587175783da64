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

#include "mimicsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mimicsr/error.hpp"

namespace mimicsr {
namespace {

double cubic(double x) {
  const double ax = std::abs(x), ax2 = ax * ax, ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

struct Contribution {
  std::vector<int> index;
  std::vector<double> weight;
};

// One row of resampling weights per output sample.
std::vector<Contribution> resample_weights(int in_len, int out_len, double scale) {
  const bool shrink = scale < 1.0;
  const double kernel_width = shrink ? 4.0 / scale : 4.0;
  const int taps = static_cast<int>(std::ceil(kernel_width)) + 2;
  std::vector<Contribution> table(out_len);
  for (int o = 0; o < out_len; ++o) {
    // MATLAB uses 1-based output coordinates.
    const double u = (o + 1) / scale + 0.5 * (1.0 - 1.0 / scale);
    const int left = static_cast<int>(std::floor(u - kernel_width / 2.0));
    Contribution& c = table[o];
    double sum = 0.0;
    for (int t = 0; t < taps; ++t) {
      const int idx = left + t;  // 1-based
      const double d = u - idx;
      const double w = shrink ? scale * cubic(d * scale) : cubic(d);
      if (w == 0.0) continue;
      c.index.push_back(reflect_symmetric(idx - 1, in_len));
      c.weight.push_back(w);
      sum += w;
    }
    for (double& w : c.weight) w /= sum;
  }
  return table;
}

}  // namespace

int reflect_symmetric(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

int reflect_mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

Plane imresize(const Plane& in, double scale) {
  MIMICSR_CHECK(scale > 0.0, "imresize: scale must be positive");
  MIMICSR_CHECK(in.height > 0 && in.width > 0, "imresize: empty input");
  const int out_h = static_cast<int>(std::ceil(in.height * scale - 1e-9));
  const int out_w = static_cast<int>(std::ceil(in.width * scale - 1e-9));
  const auto rows = resample_weights(in.height, out_h, scale);
  const auto cols = resample_weights(in.width, out_w, scale);

  // MATLAB resizes along the dimension with the smaller scale first; with a
  // single scale that is rows (dim 1) then columns.
  std::vector<double> tmp(static_cast<size_t>(out_h) * in.width, 0.0);
  for (int o = 0; o < out_h; ++o) {
    const auto& c = rows[o];
    for (size_t t = 0; t < c.index.size(); ++t) {
      const float* src = &in.values[static_cast<size_t>(c.index[t]) * in.width];
      double* dst = &tmp[static_cast<size_t>(o) * in.width];
      const double w = c.weight[t];
      for (int x = 0; x < in.width; ++x) dst[x] += w * src[x];
    }
  }
  Plane out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const double* src = &tmp[static_cast<size_t>(y) * in.width];
    for (int o = 0; o < out_w; ++o) {
      const auto& c = cols[o];
      double acc = 0.0;
      for (size_t t = 0; t < c.index.size(); ++t) acc += c.weight[t] * src[c.index[t]];
      out(y, o) = static_cast<float>(acc);
    }
  }
  return out;
}

Image imresize(const Image& in, double scale) {
  Image out;
  for (int c = 0; c < Image::kChannels; ++c) {
    Plane p = imresize(in.plane(c), scale);
    if (c == 0) out = Image(p.height, p.width);
    out.set_plane(c, p);
  }
  return out;
}

Image downscale_hr(const Image& hr, int scale) {
  MIMICSR_CHECK(scale >= 1, "downscale_hr: scale must be >= 1");
  if (hr.height() % scale != 0 || hr.width() % scale != 0) {
    throw InvalidArgument("downscale_hr: " + std::to_string(hr.height()) + "x" + std::to_string(hr.width()) +
                          " is not divisible by scale " + std::to_string(scale));
  }
  if (scale == 1) return clamp01(hr);
  return clamp01(imresize(hr, 1.0 / scale));
}

Image upsample_bilinear(const Image& in, int factor) {
  MIMICSR_CHECK(factor >= 1, "upsample_bilinear: factor must be >= 1");
  const int h = in.height(), w = in.width();
  Image out(h * factor, w * factor);
  auto coord = [factor](int o, int n, int& i0, int& i1, float& f) {
    float s = (static_cast<float>(o) + 0.5f) / static_cast<float>(factor) - 0.5f;
    s = std::clamp(s, 0.f, static_cast<float>(n - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n - 1);
    f = s - static_cast<float>(i0);
  };
  for (int oy = 0; oy < h * factor; ++oy) {
    int y0, y1;
    float fy;
    coord(oy, h, y0, y1, fy);
    for (int ox = 0; ox < w * factor; ++ox) {
      int x0, x1;
      float fx;
      coord(ox, w, x0, x1, fx);
      for (int c = 0; c < Image::kChannels; ++c) {
        const float top = in.at(c, y0, x0) * (1.f - fx) + in.at(c, y0, x1) * fx;
        const float bot = in.at(c, y1, x0) * (1.f - fx) + in.at(c, y1, x1) * fx;
        out.at(c, oy, ox) = top * (1.f - fy) + bot * fy;
      }
    }
  }
  return out;
}

}  // namespace mimicsr
