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

#include <vector>

#include "mimicsr/image.hpp"

namespace mimicsr {

// Normalized 1D Gaussian taps with radius ceil(3 * sigma).
std::vector<float> gaussian_taps(double sigma);

// Separable Gaussian blur with symmetric border extension. sigma <= 0 is the
// identity.
Plane gaussian_blur(const Plane& in, double sigma);
Image gaussian_blur(const Image& in, double sigma);

// Exact adjoint of gaussian_blur (scatter form), used to back-propagate
// through a blur.
Plane gaussian_blur_adjoint(const Plane& grad_out, double sigma);
Image gaussian_blur_adjoint(const Image& grad_out, double sigma);

}  // namespace mimicsr
