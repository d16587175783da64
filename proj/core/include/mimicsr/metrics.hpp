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
#include <optional>
#include <string>
#include <vector>

#include "mimicsr/image.hpp"

namespace mimicsr {

class Config;

// PSNR in dB on BT.601 luma after cropping `border` pixels from every edge.
// Identical inputs return kPsnrCap.
inline constexpr double kPsnrCap = 100.0;
double psnr(const Image& a, const Image& b, int border = 4);

// Mean SSIM on BT.601 luma after the border crop: 11x11 Gaussian window
// (sigma 1.5), valid region only, K1 = 0.01, K2 = 0.03, data range 1.
double ssim(const Image& a, const Image& b, int border = 4);

// Multivariate Gaussian natural-scene model for NIQE: 36 features (18 per
// scale, two scales).
struct NiqeParams {
  static constexpr int kFeatures = 36;
  std::vector<double> mu;   // kFeatures
  std::vector<double> cov;  // kFeatures x kFeatures, row-major

  static NiqeParams load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path, const std::string& source) const;
};

// metrics.niqe_params when set, else the shipped parameter file.
std::filesystem::path default_niqe_params_path();
NiqeParams load_niqe_params(const Config& cfg);

// NIQE of an RGB image, computed on the MATLAB-style Y channel (8-bit scale,
// rounded) in 96x96 blocks. Needs at least one full block.
double niqe(const Image& img, const NiqeParams& params);
double niqe_y255(const Plane& y, const NiqeParams& params);

// Per-block NIQE features of a Y plane (rows of 36), for model fitting.
std::vector<std::vector<double>> niqe_block_features(const Plane& y, int block = 96);
// Fit a natural-scene model to pristine images. Blocks whose local sharpness
// falls below `sharpness_fraction` of the sharpest block are ignored.
NiqeParams fit_niqe_params(const std::vector<Image>& pristine, double sharpness_fraction = 0.75);

// Perceptual index: 0.5 * ((10 - nrqm) + niqe).
double perceptual_index(double niqe, double nrqm);

// Pluggable no-reference NRQM scorer; never reimplemented in-process.
class NrqmScorer {
 public:
  virtual ~NrqmScorer() = default;
  virtual double score(const Image& img) const = 0;
};

// Runs `command <png path>` and parses a single number from its stdout.
// A nonzero exit status or unparseable output throws DataError.
class ExternalNrqm : public NrqmScorer {
 public:
  explicit ExternalNrqm(std::string command);
  double score(const Image& img) const override;

 private:
  std::string command_;
};

// metrics.nrqm_command, or null when unset.
std::unique_ptr<NrqmScorer> make_nrqm_scorer(const Config& cfg);

struct MetricReport {
  std::optional<double> psnr, ssim, niqe, nrqm, pi;
  std::string error;  // non-empty when this image failed
};

struct MetricOptions {
  int border = 4;
  const NiqeParams* niqe = nullptr;  // NIQE skipped when null
  const NrqmScorer* nrqm = nullptr;  // NRQM and PI omitted when null
};

// Full-reference metrics when `reference` is given; no-reference metrics as
// configured. Failures are reported in the record, not thrown.
MetricReport evaluate_image(const Image& output, const Image* reference, const MetricOptions& options);

}  // namespace mimicsr
