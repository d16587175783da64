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

#include "mimicsr/image.hpp"

namespace mimicsr {

// Bicubic resampling (a = -0.5) with MATLAB imresize semantics: half-pixel
// aligned grids, kernel widened by 1/scale when shrinking (antialiasing),
// symmetric border extension. Output size is ceil(input * scale).
Plane imresize(const Plane& in, double scale);
Image imresize(const Image& in, double scale);

// HR -> LR-sized image. Requires both dimensions divisible by `scale`; the
// result is clamped to [0,1].
Image downscale_hr(const Image& hr, int scale);

// Bilinear upsampling by an integer factor on half-pixel centers with edge
// clamping (the fixed skip path of the SR backbones).
Image upsample_bilinear(const Image& in, int factor);

// Reflect `i` into [0, n) including the edge sample ("symmetric" padding).
int reflect_symmetric(int i, int n);
// Reflect `i` into [0, n) excluding the edge sample ("reflect" padding).
int reflect_mirror(int i, int n);

}  // namespace mimicsr
