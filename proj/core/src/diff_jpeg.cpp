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

#include "mimicsr/diff_jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mimicsr/error.hpp"

namespace mimicsr {
namespace {

constexpr std::array<int, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55, 64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr std::array<int, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99,
    99, 99, 47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// RGB (0..255) -> centered YCbCr
constexpr float kFwd[3][3] = {
    {0.299f, 0.587f, 0.114f}, {-0.168736f, -0.331264f, 0.5f}, {0.5f, -0.418688f, -0.081312f}};
constexpr float kInv[3][3] = {{1.f, 0.f, 1.402f}, {1.f, -0.344136f, -0.714136f}, {1.f, 1.772f, 0.f}};

struct DctBasis {
  float c[8][8];
  DctBasis() {
    for (int k = 0; k < 8; ++k)
      for (int n = 0; n < 8; ++n)
        c[k][n] = static_cast<float>((k == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8)) *
                                     std::cos((2 * n + 1) * k * std::numbers::pi / 16));
  }
};
const DctBasis kDct;

// In-place 8x8 block transform of a plane with row stride `stride`.
void dct8(float* b, int stride, bool inverse) {
  float tmp[8][8], out[8][8];
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 8; ++k) {
      float s = 0;
      for (int n = 0; n < 8; ++n) s += (inverse ? kDct.c[n][k] : kDct.c[k][n]) * b[y * stride + n];
      tmp[y][k] = s;
    }
  for (int k = 0; k < 8; ++k)
    for (int x = 0; x < 8; ++x) {
      float s = 0;
      for (int n = 0; n < 8; ++n) s += (inverse ? kDct.c[n][k] : kDct.c[k][n]) * tmp[n][x];
      out[k][x] = s;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) b[y * stride + x] = out[y][x];
}

int padded(int n) { return (n + 7) / 8 * 8; }

}  // namespace

std::array<float, 64> jpeg_quant_table(int quality, bool chroma) {
  MIMICSR_CHECK(quality >= 1 && quality <= 100, "jpeg quality must be in [1, 100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  const auto& base = chroma ? kChromaBase : kLumaBase;
  std::array<float, 64> q{};
  for (int i = 0; i < 64; ++i) q[i] = static_cast<float>(std::clamp((base[i] * scale + 50) / 100, 1, 255));
  return q;
}

void diff_jpeg_forward(const float* in, float* out, int height, int width, int quality, JpegRounding rounding,
                       JpegTape* tape) {
  const int ph = padded(height), pw = padded(width);
  const size_t plane = static_cast<size_t>(ph) * pw;
  const size_t src_plane = static_cast<size_t>(height) * width;
  std::vector<float> ycc(3 * plane);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      const size_t s = static_cast<size_t>(std::min(y, height - 1)) * width + std::min(x, width - 1);
      const float rgb[3] = {255.f * in[s], 255.f * in[src_plane + s], 255.f * in[2 * src_plane + s]};
      for (int k = 0; k < 3; ++k)
        ycc[k * plane + static_cast<size_t>(y) * pw + x] =
            kFwd[k][0] * rgb[0] + kFwd[k][1] * rgb[1] + kFwd[k][2] * rgb[2] - (k == 0 ? 128.f : 0.f);
    }
  const auto ql = jpeg_quant_table(quality, false), qc = jpeg_quant_table(quality, true);
  if (tape) {
    tape->height = height;
    tape->width = width;
    tape->quality = quality;
    tape->rounding = rounding;
    tape->residual.assign(3 * plane, 0.f);
  }
  for (int k = 0; k < 3; ++k) {
    const auto& q = k == 0 ? ql : qc;
    for (int by = 0; by < ph; by += 8)
      for (int bx = 0; bx < pw; bx += 8) {
        float* b = ycc.data() + k * plane + static_cast<size_t>(by) * pw + bx;
        dct8(b, pw, false);
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            float& v = b[y * pw + x];
            const float z = v / q[y * 8 + x];
            const float r = std::nearbyint(z);
            const float d = z - r;
            if (tape) tape->residual[k * plane + static_cast<size_t>(by + y) * pw + bx + x] = d;
            v = (rounding == JpegRounding::kSoft ? r + d * d * d : r) * q[y * 8 + x];
          }
        dct8(b, pw, true);
      }
  }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const size_t p = static_cast<size_t>(y) * pw + x;
      const float yy = ycc[p] + 128.f, cb = ycc[plane + p], cr = ycc[2 * plane + p];
      for (int c = 0; c < 3; ++c)
        out[c * src_plane + static_cast<size_t>(y) * width + x] =
            (kInv[c][0] * yy + kInv[c][1] * cb + kInv[c][2] * cr) / 255.f;
    }
}

void diff_jpeg_backward(const JpegTape& tape, const float* dy, float* dx) {
  const int height = tape.height, width = tape.width;
  const int ph = padded(height), pw = padded(width);
  const size_t plane = static_cast<size_t>(ph) * pw;
  const size_t src_plane = static_cast<size_t>(height) * width;
  std::vector<float> g(3 * plane, 0.f);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const size_t s = static_cast<size_t>(y) * width + x;
      const float d[3] = {dy[s] / 255.f, dy[src_plane + s] / 255.f, dy[2 * src_plane + s] / 255.f};
      for (int k = 0; k < 3; ++k)
        g[k * plane + static_cast<size_t>(y) * pw + x] = kInv[0][k] * d[0] + kInv[1][k] * d[1] + kInv[2][k] * d[2];
    }
  const auto ql = jpeg_quant_table(tape.quality, false), qc = jpeg_quant_table(tape.quality, true);
  for (int k = 0; k < 3; ++k) {
    const auto& q = k == 0 ? ql : qc;
    for (int by = 0; by < ph; by += 8)
      for (int bx = 0; bx < pw; bx += 8) {
        float* b = g.data() + k * plane + static_cast<size_t>(by) * pw + bx;
        dct8(b, pw, false);  // adjoint of the inverse transform
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            // q * rho'(z) / q: the table cancels, leaving the rounding slope
            const float d = tape.residual[k * plane + static_cast<size_t>(by + y) * pw + bx + x];
            b[y * pw + x] *= tape.rounding == JpegRounding::kSoft ? 3.f * d * d : 1.f;
          }
        dct8(b, pw, true);
      }
  }
  std::fill(dx, dx + 3 * src_plane, 0.f);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      const size_t p = static_cast<size_t>(y) * pw + x;
      const size_t s = static_cast<size_t>(std::min(y, height - 1)) * width + std::min(x, width - 1);
      for (int c = 0; c < 3; ++c)
        dx[c * src_plane + s] += 255.f * (kFwd[0][c] * g[p] + kFwd[1][c] * g[plane + p] + kFwd[2][c] * g[2 * plane + p]);
    }
}

}  // namespace mimicsr
