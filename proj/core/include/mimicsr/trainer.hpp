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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mimicsr/config.hpp"
#include "mimicsr/data.hpp"
#include "mimicsr/flow.hpp"
#include "mimicsr/losses.hpp"
#include "mimicsr/mimick.hpp"
#include "mimicsr/nn/adam.hpp"
#include "mimicsr/srmodels.hpp"

namespace mimicsr {

enum class TrainMode { kMimick, kBaseline };

struct TrainConfig {
  TrainMode mode = TrainMode::kMimick;
  std::int64_t iterations = 200000;
  int batch_size = 32;
  int patch = 128;  // HR side
  int scale = 4;
  double lr = 1e-3;
  double eta_min = 1e-6;
  double beta1 = 0.9, beta2 = 0.999;
  double mimick_lr_scale = 1.0;
  double lambda = 0.1;
  double epsilon = 1e-3;
  bool augment = true;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 5000;
  std::int64_t validate_every = 1000;
  std::int64_t log_every = 1;
  std::int64_t verify_routing_every = 0;
  double max_skip_fraction = 0.01;
  std::string model = "ref";

  void validate() const;
  static TrainConfig from_config(const Config& cfg);
  int lr_patch() const { return patch / scale; }
};

// Cosine annealing from cfg.lr at iteration 0 to cfg.eta_min at
// cfg.iterations.
double lr_at(std::int64_t iteration, const TrainConfig& cfg);

// Gradient-isolation probe of one step.
struct RoutingCheck {
  bool sr_grads_zero_after_mimick_backward = false;
  bool mimick_grads_unchanged_by_sr_backward = false;
  double mimick_grad_norm = 0;  // from L_deg + lambda * L_CD
  bool ok() const { return sr_grads_zero_after_mimick_backward && mimick_grads_unchanged_by_sr_backward; }
};

struct StepReport {
  std::int64_t iteration = 0;
  LossReport loss;
  double lr_sr = 0, lr_mimick = 0;
  int skipped_samples = 0;  // degenerate flow masks
  bool skipped = false;     // non-finite loss, no update applied
  double seconds = 0;
  std::optional<RoutingCheck> routing;

  nlohmann::json to_json() const;
};

// Joint optimization of the mimicking module and an SR model (or the plain
// LR -> HR baseline). Each sub-model has its own Adam instance; the SR model
// trains on a detached copy of Mim_LR.
class Trainer {
 public:
  Trainer(const Config& cfg, std::vector<PairedSample> train, std::vector<PairedSample> val = {});

  const TrainConfig& config() const { return tc_; }
  const Config& full_config() const { return cfg_; }
  std::int64_t iteration() const { return iteration_; }
  std::int64_t skipped_batches() const { return skipped_batches_; }

  MimickModule& mimick() { return *mimick_; }
  SRModel& sr() { return *sr_; }
  nn::Adam& sr_optimizer() { return sr_opt_; }
  nn::Adam& mimick_optimizer() { return mimick_opt_; }

  // Deterministic batch of training iteration `iter` (1-based).
  std::vector<PairedSample> sample_batch(std::int64_t iter) const;
  // Noise generator of the mimicking module at iteration `iter`.
  Rng noise_rng(std::int64_t iter) const;

  // Runs iteration iteration() + 1.
  StepReport step();
  // One optimization step on an explicit batch.
  StepReport train_step(const std::vector<PairedSample>& batch, std::int64_t iter, bool verify_routing);

  // Mean PSNR of the SR model on the validation set (aligned truth as input
  // when present); nullopt without validation data.
  std::optional<double> validate() const;

  TensorArchive checkpoint() ;
  void save_checkpoint(const std::filesystem::path& path);
  void load_checkpoint(const std::filesystem::path& path);

  // Train to cfg.iterations in run_dir: ckpt/{iter}.bin with a `latest`
  // pointer and a JSON-lines train_log.jsonl. Resumes from ckpt/latest when
  // present.
  using Callback = std::function<void(const StepReport&)>;
  void run(const std::filesystem::path& run_dir, const Callback& on_step = {});

 private:
  Config cfg_;
  TrainConfig tc_;
  std::vector<PairedSample> train_, val_;
  std::unique_ptr<FlowBackend> flow_;
  std::unique_ptr<ColorScorer> scorer_;
  std::unique_ptr<MimickModule> mimick_;
  std::unique_ptr<SRModel> sr_;
  nn::Adam sr_opt_, mimick_opt_;
  std::int64_t iteration_ = 0;
  std::int64_t skipped_batches_ = 0;
};

// Latest checkpoint of a run directory, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

// Checkpoint reduced to the SR model alone (mimicking module and optimizer
// state stripped), for deployment.
TensorArchive export_sr(const TensorArchive& checkpoint);

// Inference: the SR model applied to the raw LR image. The mimicking module
// is not involved.
Image infer(const SRModel& model, const Image& lr);

// Tiled inference: tiles of `tile` LR pixels, each run with `context` extra
// LR pixels on every side that are discarded afterwards. Equal to infer()
// when context >= model.receptive_radius().
Image infer_tiled(const SRModel& model, const Image& lr, int tile, int context);

}  // namespace mimicsr
