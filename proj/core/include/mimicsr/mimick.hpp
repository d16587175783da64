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

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mimicsr/checkpoint.hpp"
#include "mimicsr/diff_jpeg.hpp"
#include "mimicsr/image.hpp"
#include "mimicsr/nn/layers.hpp"
#include "mimicsr/rng.hpp"

namespace mimicsr {

class Config;

struct MimickConfig {
  int feature_width = 32;
  std::vector<int> dilations{1, 2, 4};
  int guidance_blocks = 4;
  int decoder_layers = 3;
  bool gaussian = true;
  double sigma_lo = 0.0, sigma_hi = 0.02;
  bool jpeg = false;
  int quality_lo = 60, quality_hi = 95;
  JpegRounding jpeg_rounding = JpegRounding::kSoft;

  void validate() const;
  static MimickConfig from_config(const Config& cfg);
  nlohmann::json to_json() const;
  static MimickConfig from_json(const nlohmann::json& j);
  // Same configuration with every noise source switched off.
  MimickConfig without_noise() const;
  bool noise_enabled() const;
};

struct GuidanceVector {
  std::vector<float> scale;  // gamma, applied as (1 + gamma)
  std::vector<float> shift;  // beta
};

// Record of one noise injection, consumed by inject_noise_backward.
struct NoiseTape {
  std::vector<float> sigma;    // per image
  std::vector<int> quality;    // per image, 0 when JPEG was off
  std::vector<JpegTape> jpeg;  // per image
  std::vector<std::uint8_t> pass_pre, pass_post;  // clamp masks
};

// Per-image Gaussian noise (sigma ~ U(range)), optional differentiable JPEG,
// clamp to [0, 1]. The noise sample is a constant offset for gradients.
nn::Tensor inject_noise(const nn::Tensor& x, const MimickConfig& cfg, Rng& rng, NoiseTape* tape = nullptr);
nn::Tensor inject_noise_backward(const NoiseTape& tape, const nn::Tensor& dy);
Image inject_noise(const Image& img, const MimickConfig& cfg, Rng& rng);

// The LR mimicking module: guidance network over (lr, hr_down), FiLM-modulated
// transfer network over hr_down with a residual skip, then noise injection.
// Output has the input's spatial size.
class MimickModule : public nn::Module {
 public:
  explicit MimickModule(MimickConfig cfg, std::uint64_t seed = 0);

  const MimickConfig& config() const { return cfg_; }
  int feature_width() const { return cfg_.feature_width; }

  // Training path: caches activations for backward. `noise_rng` null means
  // no noise injection.
  nn::Tensor forward(const nn::Tensor& lr, const nn::Tensor& hr_down, Rng* noise_rng);
  // Accumulates parameter gradients from dL/dMim_LR.
  void backward(const nn::Tensor& d_mim);

  // Stateless evaluation without noise; safe to call concurrently.
  nn::Tensor apply(const nn::Tensor& lr, const nn::Tensor& hr_down) const;

  // Component views (no caching).
  nn::Tensor guidance(const nn::Tensor& lr, const nn::Tensor& hr_down) const;
  nn::Tensor transfer(const nn::Tensor& hr_down, const nn::Tensor& guidance) const;
  GuidanceVector guidance(const Image& lr, const Image& hr_down) const;
  Image transfer(const Image& hr_down, const GuidanceVector& g) const;
  Image mimick(const Image& lr, const Image& hr_down, Rng* noise_rng) const;

  void collect_parameters(std::vector<nn::Parameter*>& out) override;
  void store(TensorArchive& archive);
  void restore(const TensorArchive& archive);
  static MimickModule from_archive(const TensorArchive& archive);

  // Final projection, zero at construction.
  nn::Conv2d& final_layer() { return final_; }

 private:
  MimickConfig cfg_;
  std::vector<nn::Conv2d> guide_convs_;
  nn::Linear guide_head_;
  nn::Conv2d head_;
  std::vector<nn::Conv2d> branches_;
  nn::Conv2d fuse_;
  std::vector<nn::Conv2d> decoder_;
  nn::Conv2d final_;

  // forward caches
  std::vector<nn::LeakyRelu> guide_acts_, branch_acts_, decoder_acts_;
  nn::LeakyRelu film_act_{0.2f}, fuse_act_{0.2f};
  nn::Tensor head_out_, guidance_, pre_noise_;
  int guide_h_ = 0, guide_w_ = 0;
  bool noise_used_ = false;
  NoiseTape tape_;
};

}  // namespace mimicsr
