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
#include <vector>

#include "mimicsr/image.hpp"
#include "mimicsr/nn/layers.hpp"

namespace mimicsr {

class Config;

// Per-pixel displacement in pixels. Sign convention: warping `mov` by the
// flow, out(x, y) = mov(x + u, y + v), approximates `ref`.
struct FlowField {
  Plane u;
  Plane v;

  FlowField() = default;
  FlowField(int h, int w) : u(h, w), v(h, w) {}
  int height() const { return u.height; }
  int width() const { return u.width; }
  bool all_finite() const;
  static FlowField uniform(int h, int w, float du, float dv);
};

enum class FlowKind { kClassical, kLearned };

// Frozen optical-flow provider. compute() is const and touches no shared
// mutable state, so one backend can serve concurrent callers. Backends are
// never registered with an optimizer: they have no trainable parameters.
class FlowBackend {
 public:
  virtual ~FlowBackend() = default;
  virtual FlowKind kind() const = 0;
  virtual FlowField compute(const Image& ref, const Image& mov) const = 0;
  bool trainable() const { return false; }
};

struct ClassicalFlowOptions {
  int levels = 3;
  int warps = 4;
  int iterations = 60;
  double alpha = 0.3;      // smoothness weight on normalized luminance
  double presmooth = 0.7;  // Gaussian sigma applied before estimation
};

// Coarse-to-fine variational flow (Horn-Schunck data + smoothness terms,
// iterative re-warping, 3x3 median filtering between warps). Inputs are
// reduced to luminance and normalized to zero mean / unit variance per image,
// so global gain and offset differences do not bias the estimate.
class ClassicalFlow : public FlowBackend {
 public:
  explicit ClassicalFlow(ClassicalFlowOptions options = {});
  FlowKind kind() const override { return FlowKind::kClassical; }
  FlowField compute(const Image& ref, const Image& mov) const override;
  const ClassicalFlowOptions& options() const { return opt_; }

 private:
  ClassicalFlowOptions opt_;
};

// Pyramid residual-flow network (SPyNet-style): at each level a small CNN
// reads (ref, warped mov, upsampled flow) and predicts a flow increment.
// Weights come from a checkpoint file; nothing here is ever trained.
class LearnedFlow : public FlowBackend {
 public:
  static constexpr int kWidth = 32;

  static LearnedFlow load(const std::filesystem::path& weights);
  // Randomly initialized network with the final layer of every level zeroed
  // (predicts zero flow); used to produce weight files for tests.
  static LearnedFlow untrained(int levels, std::uint64_t seed);
  void save(const std::filesystem::path& path) const;

  FlowKind kind() const override { return FlowKind::kLearned; }
  FlowField compute(const Image& ref, const Image& mov) const override;
  int levels() const { return static_cast<int>(nets_.size()); }

 private:
  struct LevelNet {
    nn::Conv2d c1, c2, c3, c4;
  };
  explicit LearnedFlow(int levels);
  std::vector<LevelNet> nets_;
};

// "flow.backend" = classical | learned, with "flow.weights" for learned.
// A learned backend without a readable weights file is a startup error.
std::unique_ptr<FlowBackend> make_flow_backend(const Config& cfg);

// Flow mapping mov onto ref. Throws InvalidArgument on a size mismatch.
FlowField compute_flow(const Image& ref, const Image& mov, const FlowBackend& backend);

// Bilinear backward warp with edge clamping, used inside the estimators.
Plane warp_clamped(const Plane& img, const FlowField& flow);

}  // namespace mimicsr
