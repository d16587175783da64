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

#include "unit/test_support.hpp"

#include <cmath>
#include <numbers>

namespace mimicsr::test {

Image smooth_texture(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (int c = 0; c < 3; ++c) {
    double fx[3], fy[3], ph[3];
    for (int k = 0; k < 3; ++k) {
      fx[k] = uniform(rng, 0.05, 0.35);
      fy[k] = uniform(rng, 0.05, 0.35);
      ph[k] = uniform(rng, 0.0, 2 * std::numbers::pi);
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += std::sin(fx[k] * x + fy[k] * y + ph[k]);
        img.at(c, y, x) = static_cast<float>(0.5 + 0.4 * s / 3.0);
      }
  }
  return img;
}

TempDir::TempDir(const std::string& tag) {
  Rng rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() /
          ("mimicsr_" + tag + "_" + std::to_string(uniform_int(rng, 0, 1 << 30)));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace mimicsr::test
