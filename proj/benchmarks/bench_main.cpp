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

#include <benchmark/benchmark.h>

#include <vector>

#include "mimicsr/config.hpp"
#include "mimicsr/data.hpp"
#include "mimicsr/filter.hpp"
#include "mimicsr/flow.hpp"
#include "mimicsr/losses.hpp"
#include "mimicsr/metrics.hpp"
#include "mimicsr/mimick.hpp"
#include "mimicsr/nn/tensor.hpp"
#include "mimicsr/srmodels.hpp"
#include "mimicsr/trainer.hpp"

using namespace mimicsr;

namespace {

Image noise_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (float& v : img.values()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
  return img;
}

PairedSample shifted_pair(int lr_size) {
  MisalignSpec spec;
  spec.translation = {0, 3};
  spec.blur_sigma = {0.8, 0.8};
  Rng rng(1);
  const Image hr = gaussian_blur(noise_image(lr_size * 4 + 32, lr_size * 4 + 32, 2), 2.0);
  return crop_at(synth_misalign(hr, spec, 4, rng), lr_size, 0, 0, 0);
}

}  // namespace

static void BM_ClassicalFlow(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PairedSample s = shifted_pair(n);
  const auto flow = make_flow_backend(Config());
  for (auto _ : state) benchmark::DoNotOptimize(compute_flow(s.hr_down, s.lr, *flow));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ClassicalFlow)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_WarpAndMask(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image img = noise_image(n, n, 3);
  const FlowField f = FlowField::uniform(n, n, 1.3f, -0.7f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(warp(img, f));
    benchmark::DoNotOptimize(validity_mask(f, 1e-3));
  }
}
BENCHMARK(BM_WarpAndMask)->Arg(32)->Arg(128);

static void BM_ColorLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image a = noise_image(n, n, 4), b = noise_image(n, n, 5);
  const auto scorer = make_color_scorer(Config());
  Image grad;
  for (auto _ : state) benchmark::DoNotOptimize(color_loss(a, b, *scorer, &grad));
}
BENCHMARK(BM_ColorLoss)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_MimickForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  MimickModule m(MimickConfig(), 1);
  std::vector<Image> lr, hd;
  for (int i = 0; i < batch; ++i) {
    lr.push_back(noise_image(32, 32, 10 + i));
    hd.push_back(noise_image(32, 32, 20 + i));
  }
  const nn::Tensor tl = nn::Tensor::from_images(lr), th = nn::Tensor::from_images(hd);
  Rng rng(3);
  for (auto _ : state) {
    m.zero_grad();
    nn::Tensor out = m.forward(tl, th, &rng);
    m.backward(out);
  }
}
BENCHMARK(BM_MimickForwardBackward)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_SrInference(benchmark::State& state, const char* name) {
  const auto model = make_model(name, 4, 0);
  const Image lr = noise_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(infer(*model, lr));
}
BENCHMARK_CAPTURE(BM_SrInference, ref, "ref")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SrInference, ref_small, "ref_small")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state, const char* mode) {
  std::vector<PairedSample> data;
  MisalignSpec spec;
  spec.translation = {0, 3};
  for (int i = 0; i < 4; ++i) {
    Rng rng(40 + i);
    data.push_back(synth_misalign(gaussian_blur(noise_image(160, 160, 30 + i), 2.0), spec, 4, rng));
  }
  Config c;
  c.set("model.name", "ref_small");
  c.set("train.mode", mode);
  c.set("train.batch_size", "16");
  c.set("train.patch", "64");
  c.set("train.iterations", "1000000");
  Trainer t(c, data);
  for (auto _ : state) benchmark::DoNotOptimize(t.step());
}
BENCHMARK_CAPTURE(BM_TrainStep, mimick, "mimick")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, baseline, "baseline")->Unit(benchmark::kMillisecond);

static void BM_Metrics(benchmark::State& state) {
  const Image a = gaussian_blur(noise_image(256, 256, 7), 2.0), b = gaussian_blur(noise_image(256, 256, 8), 2.0);
  const NiqeParams params = NiqeParams::load(default_niqe_params_path());
  for (auto _ : state) {
    benchmark::DoNotOptimize(psnr(a, b));
    benchmark::DoNotOptimize(ssim(a, b));
    benchmark::DoNotOptimize(niqe(a, params));
  }
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
