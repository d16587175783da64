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
#include <vector>

#include <nlohmann/json.hpp>

#include "mimicsr/data.hpp"
#include "mimicsr/flow.hpp"
#include "mimicsr/metrics.hpp"
#include "mimicsr/mimick.hpp"
#include "mimicsr/srmodels.hpp"
#include "mimicsr/trainer.hpp"

namespace mimicsr {

// ---------------------------------------------------------------- align-compare

// 100 * (e_ref - e_candidate) / e_ref.
double reduction_percent(double e_ref, double e_candidate);

enum class AlignReference {
  kTruth,  // aligned_lr_truth of synthetic samples
  kFlow,   // LR warped onto the HR grid by optical flow (real data)
};

struct AlignImageStats {
  std::string id;
  size_t pixels = 0;  // pixels valid under the flow mask, where errors are measured
  double err_hr_down = 0;
  std::optional<double> err_flow_warped;  // absent when it is the reference
  double err_mim = 0;
};

struct AlignCompareResult {
  AlignReference reference = AlignReference::kTruth;
  std::vector<AlignImageStats> images;
  double mean_hr_down = 0, mean_mim = 0;
  std::optional<double> mean_flow_warped;
  double reduction_vs_hr_down = 0;               // percent
  std::optional<double> reduction_vs_flow_warped;  // percent

  nlohmann::json to_json() const;
};

struct AlignCompareOptions {
  AlignReference reference = AlignReference::kTruth;
  double epsilon = 1e-3;
  // When set, per-image heatmaps (<id>_{hr_down,flow,mim}.png) and
  // align_compare.csv are written here.
  std::optional<std::filesystem::path> out_dir;
  double heatmap_max = 0.1;  // error mapped to the top of the color scale
};

// Per-pixel mean absolute error (over channels) of the naive ĤR, the
// flow-warped LR and Mim_LR (noise off) against the reference, restricted to
// pixels the flow keeps valid.
AlignCompareResult align_compare(const MimickModule& mimick, const std::vector<PairedSample>& samples,
                                 const FlowBackend& flow, const AlignCompareOptions& options);

// |a - b| averaged over channels.
Plane error_map(const Image& a, const Image& b);
// Error map rendered with a perceptually ordered colormap; 0 -> dark,
// >= max_value -> bright.
Image heatmap(const Plane& err, double max_value);

// ---------------------------------------------------------------- eval

enum class EvalInput {
  kAuto,   // aligned_lr_truth when present, else lr
  kLr,     // always the manifest's lr
  kTruth,  // require aligned_lr_truth
};

struct EvalRow {
  std::string id;
  MetricReport report;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  MetricReport mean;  // each metric over the images that produced it
  int failed = 0;     // images with an error (partial metrics are kept)

  // id,psnr,ssim,niqe,nrqm,pi,error with fixed precision; empty fields for
  // absent metrics.
  std::string to_csv() const;
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& csv, const std::filesystem::path& json) const;
};

// Full-reference evaluation of SR outputs against HR, plus no-reference
// metrics as configured.
EvalTable eval_dataset(const SRModel& model, const std::vector<PairedSample>& samples, const MetricOptions& metrics,
                       EvalInput input = EvalInput::kAuto);
// No-reference evaluation of SR outputs of bare LR images.
EvalTable eval_images(const SRModel& model, const std::vector<std::pair<std::string, Image>>& lr_images,
                      const MetricOptions& metrics);

// ---------------------------------------------------------------- plot

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Minimal SVG line and bar charts.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& series,
                           bool log_y = false);
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<Series>& groups);

struct TrainLog {
  Series l_res{"l_res", {}, {}}, l_deg{"l_deg", {}, {}}, l_cd{"l_cd", {}, {}}, l_total{"l_total", {}, {}};
  Series lr_sr{"lr_sr", {}, {}}, lr_mimick{"lr_mimick", {}, {}};
  Series val_psnr{"val_psnr", {}, {}};

  // JSON-lines training log; malformed lines are DataErrors naming the line.
  static TrainLog load(const std::filesystem::path& path);
};

// Closed-form cosine schedule sampled at `points` iterations spanning
// [0, iterations], both endpoints included.
Series lr_schedule_series(const TrainConfig& cfg, int points = 256);

// Writes loss_curves.svg, lr_schedule.svg (and val_psnr.svg when present)
// into out_dir; returns the files written. With a schedule the lr plot also
// draws the closed-form curve over the whole run.
std::vector<std::filesystem::path> plot_train_log(const std::filesystem::path& log,
                                                  const std::filesystem::path& out_dir,
                                                  const TrainConfig* schedule = nullptr);
// Bar chart of the mean of every numeric column, one group per CSV file.
std::vector<std::filesystem::path> plot_metric_csvs(const std::vector<std::filesystem::path>& csvs,
                                                    const std::filesystem::path& out_dir);

}  // namespace mimicsr
