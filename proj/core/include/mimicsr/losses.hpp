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

#include <filesystem>
#include <memory>
#include <string>

#include "mimicsr/flow.hpp"
#include "mimicsr/image.hpp"
#include "mimicsr/nn/layers.hpp"

namespace mimicsr {

class Config;

// Bilinear backward warp, out(x, y) = img(x + u, y + v); samples outside the
// frame read as zero.
Image warp(const Image& img, const FlowField& flow);
Plane warp(const Plane& img, const FlowField& flow);

// 1 where the warped all-ones image is >= 1 - epsilon, else 0.
Plane validity_mask(const FlowField& flow, double epsilon);
size_t count_valid(const Plane& mask);

// Everything L_deg needs from the (lr, hr_down) pair. None of it carries
// gradients.
struct DegradationTarget {
  FlowField flow;
  Image lr_warped;
  Plane mask;
  size_t valid_pixels = 0;
};

// Flow from hr_down to lr, warped lr and validity mask. Throws
// DegenerateMaskError when no pixel is valid.
DegradationTarget degradation_target(const Image& lr, const Image& hr_down, const FlowBackend& backend,
                                     double epsilon);

// Masked L1 between mim and the warped LR, averaged over valid pixels and
// channels. When grad is given it receives dL/dmim.
double masked_l1(const Image& mim, const DegradationTarget& target, Image* grad = nullptr);

double degradation_loss(const Image& lr, const Image& hr_down, const Image& mim, const FlowBackend& backend,
                        double epsilon, Image* grad = nullptr);

// Differentiable color-difference scorer for L_CD. score() is const and
// concurrency-safe.
class ColorScorer {
 public:
  virtual ~ColorScorer() = default;
  virtual std::string name() const = 0;
  // Nonnegative score of a against reference b; grad receives d score / d a.
  virtual double score(const Image& a, const Image& b, Image* grad = nullptr) const = 0;
};

// Mean CIEDE2000 difference of Gaussian-blurred images, in Delta-E units.
// The blur removes texture so the score measures color shifts.
class AnalyticColorScorer : public ColorScorer {
 public:
  static constexpr double kBlurSigma = 1.0;
  static constexpr double kSmoothing = 1e-4;  // sqrt(d^2 + s) - sqrt(s)
  std::string name() const override { return "analytic"; }
  double score(const Image& a, const Image& b, Image* grad = nullptr) const override;
};

// Small convolutional feature network compared pixel-wise in feature space,
// with weights from a file. Never trained here.
class LearnedColorScorer : public ColorScorer {
 public:
  static LearnedColorScorer load(const std::filesystem::path& weights);
  static LearnedColorScorer untrained(std::uint64_t seed);
  void save(const std::filesystem::path& path) const;

  std::string name() const override { return "learned"; }
  double score(const Image& a, const Image& b, Image* grad = nullptr) const override;

 private:
  LearnedColorScorer();
  nn::Conv2d c1_, c2_, c3_;
};

// "loss.color_scorer" = analytic | learned (reads loss.color_weights_path).
std::unique_ptr<ColorScorer> make_color_scorer(const Config& cfg);

double color_loss(const Image& mim, const Image& hr_down, const ColorScorer& scorer, Image* grad = nullptr);

// Mean absolute error; grad receives dL/dsr.
double reconstruction_loss(const Image& sr, const Image& hr, Image* grad = nullptr);

struct LossReport {
  double l_res = 0, l_deg = 0, l_cd = 0, l_total = 0;
  double lambda = 0;
};

LossReport total_loss(double l_res, double l_deg, double l_cd, double lambda);

}  // namespace mimicsr
