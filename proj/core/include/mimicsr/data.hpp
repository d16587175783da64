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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mimicsr/image.hpp"
#include "mimicsr/rng.hpp"

namespace mimicsr {

class Config;

using Range = std::pair<double, double>;

struct SampleMeta {
  std::string source_id;
  int crop_y = 0;  // LR-grid offset of the crop
  int crop_x = 0;
  int dihedral = 0;  // element of the flip/rotation group applied
  nlohmann::json transform = nlohmann::json::object();  // sampled misalignment parameters
};

// One training/evaluation example. hr is exactly scale x lr; hr_down is HR
// resampled to the LR grid (geometrically faithful to HR, no LR degradation).
struct PairedSample {
  Image lr;
  Image hr;
  Image hr_down;
  std::optional<Image> aligned_lr_truth;  // synthetic data only
  SampleMeta meta;

  int scale() const { return lr.height() > 0 ? hr.height() / lr.height() : 0; }
};

// Validates the size relations of a sample; throws InvalidArgument.
void check_sample(const PairedSample& s, int scale);

// Build a sample from an LR/HR pair: computes hr_down from hr.
PairedSample make_sample(Image lr, Image hr, int scale, std::optional<Image> truth = std::nullopt);

// Random crop of `patch` x `patch` LR pixels (HR crop scale x patch at the
// matching location), with hr_down recomputed from the HR crop, then the same
// random flip/quarter-turn applied to every member.
PairedSample crop_augment(const PairedSample& pair, int patch, Rng& rng, bool augment = true);

// Crop at a fixed LR offset and apply a fixed group element (deterministic
// core of crop_augment).
PairedSample crop_at(const PairedSample& pair, int patch, int lr_y, int lr_x, int dihedral);

// Ranges the synthetic misalignment generator draws from.
struct MisalignSpec {
  Range translation{0, 0};        // HR pixels, per axis
  Range rotation{0, 0};           // degrees
  Range scale_jitter{0, 0};       // zoom = 1 + draw
  Range color_gain{1, 1};         // per channel
  Range brightness_offset{0, 0};  // additive
  Range gamma{1, 1};
  Range blur_sigma{0, 0};  // HR pixels
  Range noise_sigma{0, 0};
  bool jpeg = false;
  std::pair<int, int> jpeg_quality{90, 90};
  std::uint64_t rng_seed = 0;

  void validate() const;
  static MisalignSpec from_config(const Config& cfg);
};

// Parameters drawn for one synthetic sample.
struct MisalignDraw {
  double tx = 0, ty = 0, rotation_deg = 0, zoom = 1;
  double gain[3] = {1, 1, 1};
  double offset = 0, gamma = 1;
  double blur_sigma = 0, noise_sigma = 0;
  int jpeg_quality = 0;  // 0 = no JPEG
  std::uint64_t noise_seed = 0;

  nlohmann::json to_json() const;
};

MisalignDraw draw_misalignment(const MisalignSpec& spec, Rng& rng);

// Largest displacement (HR px) the affine part of `d` applies to any pixel of
// an h x w image.
double max_displacement(const MisalignDraw& d, int h, int w);

// lr = degrade(affine(color(hr))) at 1/scale; aligned_lr_truth = degrade(hr)
// with the same draws. A margin covering the largest displacement (rounded up
// to a multiple of scale) is trimmed from every member.
PairedSample synth_misalign(const Image& hr, const MisalignSpec& spec, int scale, Rng& rng);
PairedSample synth_misalign(const Image& hr, const MisalignDraw& draw, int scale);

// Geometric and photometric pieces, exposed for tests.
Image apply_color_transform(const Image& img, const MisalignDraw& d);
Image apply_affine(const Image& img, const MisalignDraw& d);
Image degrade(const Image& hr, const MisalignDraw& d, int scale);

enum class Split { kTrain, kVal, kTest };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  std::filesystem::path lr;
  std::filesystem::path hr;
  std::optional<std::filesystem::path> truth;
  nlohmann::json meta = nlohmann::json::object();
};

// JSON-lines manifest. Line 1: {"scale": s, "split": "..."}; every further
// line is one entry {"lr", "hr", "truth"?, "meta"?}. Relative paths resolve
// against the manifest's directory.
struct DatasetManifest {
  int scale = 4;
  Split split = Split::kTrain;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  // Throws DataError naming the first missing file.
  void check_paths() const;
};

// Load every entry as a full-image sample (hr_down computed per image).
std::vector<PairedSample> load_samples(const DatasetManifest& manifest);

// Optional random cropping of the sources before synthesis: `count` crops of
// `size` x `size` HR pixels, cycling through the sources in name order.
struct SynthCrops {
  int count = 0;  // 0 = one sample per whole source image
  int size = 0;
};

// Run synth_misalign over every PNG in src_dir (sorted by name), or over
// random crops of them, and write lr/, hr/, truth/ PNG trees plus
// manifest.jsonl into out_dir.
DatasetManifest generate_synthetic(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir,
                                   const MisalignSpec& spec, int scale, std::uint64_t seed, Split split,
                                   const SynthCrops& crops = {});

}  // namespace mimicsr
