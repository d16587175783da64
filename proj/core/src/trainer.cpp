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

#include "mimicsr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "mimicsr/error.hpp"
#include "mimicsr/metrics.hpp"
#include "mimicsr/nn/tensor.hpp"

namespace mimicsr {

using nn::Tensor;

void TrainConfig::validate() const {
  MIMICSR_CHECK(iterations > 0, "train.iterations must be > 0");
  MIMICSR_CHECK(batch_size >= 1, "train.batch_size must be >= 1");
  MIMICSR_CHECK(lr > 0, "train.lr must be > 0");
  MIMICSR_CHECK(eta_min >= 0 && eta_min <= lr, "train.eta_min must lie in [0, train.lr]");
  MIMICSR_CHECK(scale >= 1, "scale must be >= 1");
  MIMICSR_CHECK(patch % scale == 0 && patch / scale >= 8,
                "train.patch must be a multiple of the scale covering at least 8 LR pixels");
  MIMICSR_CHECK(mimick_lr_scale >= 0, "train.mimick_lr_scale must be >= 0");
  MIMICSR_CHECK(lambda >= 0, "loss.lambda must be >= 0");
  MIMICSR_CHECK(epsilon > 0 && epsilon < 1, "loss.epsilon must lie in (0, 1)");
  MIMICSR_CHECK(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "Adam betas must lie in [0, 1)");
  MIMICSR_CHECK(checkpoint_every >= 0 && validate_every >= 0 && log_every >= 1 && verify_routing_every >= 0,
                "train cadences must be >= 0 (log_every >= 1)");
  MIMICSR_CHECK(max_skip_fraction >= 0 && max_skip_fraction <= 1, "train.max_skip_fraction must lie in [0, 1]");
}

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig t;
  const std::string mode = cfg.get_string("train.mode");
  if (mode == "mimick") {
    t.mode = TrainMode::kMimick;
  } else if (mode == "baseline") {
    t.mode = TrainMode::kBaseline;
  } else {
    throw InvalidArgument("train.mode must be mimick or baseline, got '" + mode + "'");
  }
  if (cfg.get_string("train.optimizer") != "adam") throw InvalidArgument("train.optimizer: only adam is supported");
  if (cfg.get_string("train.schedule") != "cosine") throw InvalidArgument("train.schedule: only cosine is supported");
  t.iterations = cfg.get_int("train.iterations");
  t.batch_size = cfg.get_int("train.batch_size");
  t.patch = cfg.get_int("train.patch");
  t.scale = cfg.get_int("data.scale");
  if (cfg.get_int("model.scale") != t.scale) throw InvalidArgument("model.scale must equal data.scale");
  t.lr = cfg.get_real("train.lr");
  t.eta_min = cfg.get_real("train.eta_min");
  t.beta1 = cfg.get_real("train.adam_beta1");
  t.beta2 = cfg.get_real("train.adam_beta2");
  t.mimick_lr_scale = cfg.get_real("train.mimick_lr_scale");
  t.lambda = cfg.get_real("loss.lambda");
  t.epsilon = cfg.get_real("loss.epsilon");
  t.augment = cfg.get_bool("train.augment");
  t.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed"));
  t.checkpoint_every = cfg.get_int("train.checkpoint_every");
  t.validate_every = cfg.get_int("train.validate_every");
  t.log_every = cfg.get_int("train.log_every");
  t.verify_routing_every = cfg.get_int("train.verify_routing_every");
  t.max_skip_fraction = cfg.get_real("train.max_skip_fraction");
  t.model = cfg.get_string("model.name");
  t.validate();
  return t;
}

double lr_at(std::int64_t iteration, const TrainConfig& cfg) {
  MIMICSR_CHECK(iteration >= 0 && iteration <= cfg.iterations, "lr_at: iteration outside [0, iterations]");
  const double t = static_cast<double>(iteration) / static_cast<double>(cfg.iterations);
  return cfg.eta_min + (cfg.lr - cfg.eta_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

nlohmann::json StepReport::to_json() const {
  nlohmann::json j = {{"iter", iteration},       {"lr_sr", lr_sr},     {"lr_mimick", lr_mimick},
                      {"l_res", loss.l_res},     {"l_deg", loss.l_deg}, {"l_cd", loss.l_cd},
                      {"l_total", loss.l_total}, {"lambda", loss.lambda}, {"skipped_samples", skipped_samples},
                      {"skipped", skipped},      {"seconds", seconds}};
  if (routing) j["routing_ok"] = routing->ok();
  return j;
}

namespace {

enum Stream : std::uint64_t { kBatchStream = 1, kNoiseStream = 2, kSrInit = 3, kMimickInit = 4 };

std::vector<float> grad_snapshot(const std::vector<nn::Parameter*>& params) {
  std::vector<float> out;
  for (const auto* p : params) out.insert(out.end(), p->grad.begin(), p->grad.end());
  return out;
}

bool all_zero(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return x == 0.f; });
}

double norm(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

void scale_inplace(Image& img, float s) {
  for (float& v : img.values()) v *= s;
}

void write_tensor(Tensor& t, int i, const Image& img) {
  for (int c = 0; c < 3; ++c) std::copy(img.channel(c).begin(), img.channel(c).end(), t.map(i, c));
}

void store_adam(TensorArchive& a, const std::string& tag, nn::Adam& opt) {
  const auto& params = opt.params();
  for (size_t i = 0; i < params.size(); ++i) {
    a.put("adam." + tag + ".m." + params[i]->name, params[i]->shape, opt.first_moments()[i]);
    a.put("adam." + tag + ".v." + params[i]->name, params[i]->shape, opt.second_moments()[i]);
  }
  a.meta["adam"][tag] = {{"steps", opt.steps()}};
}

void restore_adam(const TensorArchive& a, const std::string& tag, nn::Adam& opt) {
  const auto& params = opt.params();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& m = a.at("adam." + tag + ".m." + params[i]->name);
    const auto& v = a.at("adam." + tag + ".v." + params[i]->name);
    if (m.values.size() != params[i]->size() || v.values.size() != params[i]->size()) {
      throw DataError("checkpoint optimizer state does not match parameter " + params[i]->name);
    }
    opt.first_moments()[i] = m.values;
    opt.second_moments()[i] = v.values;
  }
  opt.set_steps(a.meta.at("adam").at(tag).at("steps").get<std::int64_t>());
}

void append_line(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot append to " + path.string());
  out << j.dump() << "\n";
}

}  // namespace

Trainer::Trainer(const Config& cfg, std::vector<PairedSample> train, std::vector<PairedSample> val)
    : cfg_(cfg), tc_(TrainConfig::from_config(cfg)), train_(std::move(train)), val_(std::move(val)) {
  MIMICSR_CHECK(!train_.empty(), "Trainer: empty training set");
  for (const auto& s : train_) {
    check_sample(s, tc_.scale);
    if (s.lr.height() < tc_.lr_patch() || s.lr.width() < tc_.lr_patch()) {
      throw InvalidArgument("Trainer: training image " + s.meta.source_id + " smaller than the patch");
    }
  }
  for (const auto& s : val_) check_sample(s, tc_.scale);
  sr_ = make_model(tc_.model, tc_.scale, derive_seed(tc_.seed, {kSrInit}));
  sr_opt_ = nn::Adam(sr_->parameters(), {tc_.beta1, tc_.beta2});
  if (tc_.mode == TrainMode::kMimick) {
    flow_ = make_flow_backend(cfg_);
    scorer_ = make_color_scorer(cfg_);
    mimick_ = std::make_unique<MimickModule>(MimickConfig::from_config(cfg_), derive_seed(tc_.seed, {kMimickInit}));
    mimick_opt_ = nn::Adam(mimick_->parameters(), {tc_.beta1, tc_.beta2});
  }
}

std::vector<PairedSample> Trainer::sample_batch(std::int64_t iter) const {
  Rng rng = make_rng(tc_.seed, {kBatchStream, static_cast<std::uint64_t>(iter)});
  std::vector<PairedSample> batch;
  batch.reserve(tc_.batch_size);
  for (int b = 0; b < tc_.batch_size; ++b) {
    const int idx = uniform_int(rng, 0, static_cast<int>(train_.size()) - 1);
    batch.push_back(crop_augment(train_[idx], tc_.lr_patch(), rng, tc_.augment));
  }
  return batch;
}

Rng Trainer::noise_rng(std::int64_t iter) const {
  return make_rng(tc_.seed, {kNoiseStream, static_cast<std::uint64_t>(iter)});
}

StepReport Trainer::step() {
  const std::int64_t iter = iteration_ + 1;
  const bool verify = tc_.verify_routing_every > 0 && iter % tc_.verify_routing_every == 0;
  return train_step(sample_batch(iter), iter, verify);
}

StepReport Trainer::train_step(const std::vector<PairedSample>& batch, std::int64_t iter, bool verify_routing) {
  MIMICSR_CHECK(!batch.empty(), "train_step: empty batch");
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(batch.size());
  StepReport rep;
  rep.iteration = iter;
  rep.lr_sr = lr_at(std::min(iter - 1, tc_.iterations), tc_);
  rep.lr_mimick = tc_.mode == TrainMode::kMimick ? rep.lr_sr * tc_.mimick_lr_scale : 0.0;

  std::vector<Image> lrs, hrs, hr_downs;
  for (const auto& s : batch) {
    lrs.push_back(s.lr);
    hrs.push_back(s.hr);
    hr_downs.push_back(s.hr_down);
  }
  sr_opt_.zero_grad();
  if (mimick_) mimick_opt_.zero_grad();

  double l_deg = 0, l_cd = 0;
  Tensor sr_input;
  if (tc_.mode == TrainMode::kMimick) {
    // (1) Mim_LR
    Rng nrng = noise_rng(iter);
    const Tensor mim = mimick_->forward(Tensor::from_images(lrs), Tensor::from_images(hr_downs), &nrng);
    // (2) L_deg + lambda * L_CD into the mimicking module only
    Tensor d_mim(mim.n(), mim.c(), mim.h(), mim.w());
    std::vector<Image> deg_grads(n), cd_grads(n);
    std::vector<bool> valid(n, false);
    int n_valid = 0;
    for (int i = 0; i < n; ++i) {
      const Image m = mim.to_image(i);
      try {
        const DegradationTarget target = degradation_target(lrs[i], hr_downs[i], *flow_, tc_.epsilon);
        l_deg += masked_l1(m, target, &deg_grads[i]);
        valid[i] = true;
        ++n_valid;
      } catch (const DegenerateMaskError&) {
        ++rep.skipped_samples;
      }
      l_cd += color_loss(m, hr_downs[i], *scorer_, &cd_grads[i]);
    }
    l_deg = n_valid > 0 ? l_deg / n_valid : 0.0;
    l_cd /= n;
    for (int i = 0; i < n; ++i) {
      Image g = cd_grads[i];
      scale_inplace(g, static_cast<float>(tc_.lambda / n));
      if (valid[i]) {
        auto gd = deg_grads[i].values();
        auto gv = g.values();
        for (size_t k = 0; k < gv.size(); ++k) gv[k] += gd[k] / static_cast<float>(n_valid);
      }
      write_tensor(d_mim, i, g);
    }
    mimick_->backward(d_mim);
    // (3) detached copy: the SR graph starts at a plain tensor
    sr_input = mim;
  } else {
    sr_input = Tensor::from_images(lrs);
  }

  std::vector<float> mimick_grads;
  if (verify_routing) {
    RoutingCheck rc;
    rc.sr_grads_zero_after_mimick_backward = all_zero(grad_snapshot(sr_opt_.params()));
    if (mimick_) mimick_grads = grad_snapshot(mimick_opt_.params());
    rc.mimick_grad_norm = norm(mimick_grads);
    rep.routing = rc;
  }

  // (4) SR on the detached input, (5) L_res into the SR model only
  const Tensor out = sr_->forward(sr_input);
  Tensor d_out(out.n(), out.c(), out.h(), out.w());
  double l_res = 0;
  for (int i = 0; i < n; ++i) {
    Image g;
    l_res += reconstruction_loss(out.to_image(i), hrs[i], &g);
    scale_inplace(g, 1.f / static_cast<float>(n));
    write_tensor(d_out, i, g);
  }
  l_res /= n;
  sr_->backward(d_out);

  if (verify_routing) {
    rep.routing->mimick_grads_unchanged_by_sr_backward =
        !mimick_ || grad_snapshot(mimick_opt_.params()) == mimick_grads;
  }

  const bool finite = std::isfinite(l_res) && std::isfinite(l_deg) && std::isfinite(l_cd);
  if (finite) {
    rep.loss = total_loss(l_res, l_deg, l_cd, tc_.mode == TrainMode::kMimick ? tc_.lambda : 0.0);
    sr_opt_.step(rep.lr_sr);
    if (mimick_ && rep.lr_mimick > 0) mimick_opt_.step(rep.lr_mimick);
  } else {
    rep.skipped = true;
    rep.loss.l_res = l_res;
    rep.loss.l_deg = l_deg;
    rep.loss.l_cd = l_cd;
    rep.loss.lambda = tc_.lambda;
    rep.loss.l_total = l_res + l_deg + tc_.lambda * l_cd;
    ++skipped_batches_;
    if (static_cast<double>(skipped_batches_) > tc_.max_skip_fraction * static_cast<double>(tc_.iterations)) {
      throw NumericError("training aborted: " + std::to_string(skipped_batches_) +
                         " batches with non-finite losses exceed train.max_skip_fraction");
    }
  }
  sr_opt_.zero_grad();
  if (mimick_) mimick_opt_.zero_grad();
  iteration_ = std::max(iteration_, iter);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::optional<double> Trainer::validate() const {
  if (val_.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& s : val_) {
    const Image& input = s.aligned_lr_truth ? *s.aligned_lr_truth : s.lr;
    sum += psnr(infer(*sr_, input), s.hr, tc_.scale);
  }
  return sum / static_cast<double>(val_.size());
}

TensorArchive Trainer::checkpoint() {
  TensorArchive a;
  a.meta["iteration"] = iteration_;
  a.meta["skipped_batches"] = skipped_batches_;
  a.meta["config"] = cfg_.dump();
  // every random draw is derived from (seed, iteration), so this is the
  // complete generator state
  a.meta["rng"] = {{"scheme", "derived"}, {"seed", tc_.seed}, {"iteration", iteration_}};
  a.meta["mode"] = tc_.mode == TrainMode::kMimick ? "mimick" : "baseline";
  sr_->store(a);
  store_adam(a, "sr", sr_opt_);
  if (mimick_) {
    mimick_->store(a);
    store_adam(a, "mimick", mimick_opt_);
  }
  return a;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) { checkpoint().save(path); }

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  const TensorArchive a = TensorArchive::load(path);
  const std::string mode = tc_.mode == TrainMode::kMimick ? "mimick" : "baseline";
  if (a.meta.value("mode", "") != mode) throw DataError("checkpoint " + path.string() + " is not a " + mode + " run");
  if (a.meta.at("rng").at("seed").get<std::uint64_t>() != tc_.seed) {
    throw DataError("checkpoint " + path.string() + " was written with a different train.seed");
  }
  const auto spec = a.meta.at("sr");
  if (spec.at("name") != sr_->name() || spec.at("scale").get<int>() != sr_->scale()) {
    throw DataError("checkpoint " + path.string() + " holds a different SR model");
  }
  sr_->restore(a);
  restore_adam(a, "sr", sr_opt_);
  if (mimick_) {
    mimick_->restore(a);
    restore_adam(a, "mimick", mimick_opt_);
  }
  iteration_ = a.meta.at("iteration").get<std::int64_t>();
  skipped_batches_ = a.meta.value("skipped_batches", std::int64_t{0});
}

std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir) {
  const auto pointer = run_dir / "ckpt" / "latest";
  std::ifstream in(pointer);
  if (!in) return std::nullopt;
  std::string name;
  std::getline(in, name);
  const auto path = run_dir / "ckpt" / name;
  if (name.empty() || !std::filesystem::exists(path)) {
    throw DataError("checkpoint pointer " + pointer.string() + " names a missing file");
  }
  return path;
}

void Trainer::run(const std::filesystem::path& run_dir, const Callback& on_step) {
  std::filesystem::create_directories(run_dir / "ckpt");
  const auto log_path = run_dir / "train_log.jsonl";
  if (const auto latest = latest_checkpoint(run_dir)) {
    load_checkpoint(*latest);
    // drop log records written after the checkpoint; they are replayed
    if (std::filesystem::exists(log_path)) {
      std::ifstream in(log_path);
      std::string kept, line;
      while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.value("iter", std::int64_t{0}) <= iteration_) kept += line + "\n";
      }
      in.close();
      std::ofstream(log_path, std::ios::trunc) << kept;
    }
  }
  auto write_ckpt = [&] {
    const std::string name = std::to_string(iteration_) + ".bin";
    save_checkpoint(run_dir / "ckpt" / name);
    const auto tmp = run_dir / "ckpt" / "latest.tmp";
    {
      std::ofstream out(tmp);
      out << name << "\n";
    }
    std::filesystem::rename(tmp, run_dir / "ckpt" / "latest");
  };
  while (iteration_ < tc_.iterations) {
    const StepReport rep = step();
    if (rep.iteration % tc_.log_every == 0 || rep.skipped) {
      nlohmann::json j = rep.to_json();
      j["type"] = "step";
      append_line(log_path, j);
    }
    if (tc_.validate_every > 0 && rep.iteration % tc_.validate_every == 0) {
      if (const auto v = validate()) append_line(log_path, {{"type", "validation"}, {"iter", rep.iteration}, {"val_psnr", *v}});
    }
    if (tc_.checkpoint_every > 0 && rep.iteration % tc_.checkpoint_every == 0) write_ckpt();
    if (on_step) on_step(rep);
  }
  const auto latest = latest_checkpoint(run_dir);
  if (!latest || latest->filename() != std::to_string(iteration_) + ".bin") write_ckpt();
}

TensorArchive export_sr(const TensorArchive& checkpoint) {
  if (!checkpoint.meta.contains("sr")) throw DataError("checkpoint has no SR model");
  TensorArchive out;
  out.meta["sr"] = checkpoint.meta.at("sr");
  for (const auto& [name, entry] : checkpoint.tensors)
    if (name.rfind("sr.", 0) == 0) out.tensors[name] = entry;
  return out;
}

Image infer(const SRModel& model, const Image& lr) { return sr_forward(model, lr); }

Image infer_tiled(const SRModel& model, const Image& lr, int tile, int context) {
  MIMICSR_CHECK(tile >= 1 && context >= 0, "infer_tiled: tile must be >= 1 and context >= 0");
  const int s = model.scale();
  const int h = lr.height(), w = lr.width();
  Image out(h * s, w * s);
  for (int y0 = 0; y0 < h; y0 += tile)
    for (int x0 = 0; x0 < w; x0 += tile) {
      const int th = std::min(tile, h - y0), tw = std::min(tile, w - x0);
      const int cy0 = std::max(0, y0 - context), cx0 = std::max(0, x0 - context);
      const int cy1 = std::min(h, y0 + th + context), cx1 = std::min(w, x0 + tw + context);
      const Image piece = sr_forward(model, crop(lr, cy0, cx0, cy1 - cy0, cx1 - cx0));
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < th * s; ++y)
          for (int x = 0; x < tw * s; ++x)
            out.at(c, y0 * s + y, x0 * s + x) = piece.at(c, (y0 - cy0) * s + y, (x0 - cx0) * s + x);
    }
  return out;
}

}  // namespace mimicsr
