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

#include <array>
#include <vector>

namespace mimicsr {

enum class JpegRounding {
  kSoft,             // r + (z - r)^3, differentiable everywhere
  kStraightThrough,  // hard rounding forward, identity gradient backward
};

// libjpeg-style quantization table for a quality in [1, 100].
std::array<float, 64> jpeg_quant_table(int quality, bool chroma);

// What the backward pass needs from one forward call.
struct JpegTape {
  int height = 0, width = 0;
  int quality = 0;
  JpegRounding rounding = JpegRounding::kSoft;
  std::vector<float> residual;  // z - round(z) for every quantized coefficient
};

// Differentiable JPEG round trip of one planar RGB image with values in
// [0, 1] (3 * h * w floats, CHW): full-range YCbCr, 8x8 DCT, quantization with
// the scaled standard tables, dequantization, inverse transform. Chroma is not
// subsampled. Edges are padded by replication to a multiple of 8.
void diff_jpeg_forward(const float* in, float* out, int height, int width, int quality, JpegRounding rounding,
                       JpegTape* tape);
// dx = (d out / d in)^T dy, written (not accumulated) into dx.
void diff_jpeg_backward(const JpegTape& tape, const float* dy, float* dx);

}  // namespace mimicsr
