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

#include "mimicsr/mimick.hpp"

#include <algorithm>
#include <cmath>

#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"

namespace mimicsr {

using nn::Tensor;

// ---------------------------------------------------------------- config

void MimickConfig::validate() const {
  MIMICSR_CHECK(feature_width > 0, "mimick.feature_width must be positive");
  MIMICSR_CHECK(!dilations.empty(), "mimick.dilations must not be empty");
  for (int d : dilations) MIMICSR_CHECK(d >= 1, "mimick.dilations must be >= 1");
  MIMICSR_CHECK(guidance_blocks >= 1, "mimick.guidance_blocks must be >= 1");
  MIMICSR_CHECK(decoder_layers >= 0, "mimick.decoder_layers must be >= 0");
  MIMICSR_CHECK(sigma_lo >= 0 && sigma_lo <= sigma_hi && sigma_hi <= 0.2,
                "mimick.noise_sigma must be a range inside [0, 0.2]");
  MIMICSR_CHECK(quality_lo >= 1 && quality_lo <= quality_hi && quality_hi <= 100,
                "mimick.jpeg_quality must be a range inside [1, 100]");
}

MimickConfig MimickConfig::from_config(const Config& cfg) {
  MimickConfig m;
  m.feature_width = cfg.get_int("mimick.feature_width");
  m.dilations = cfg.get_int_list("mimick.dilations");
  m.guidance_blocks = cfg.get_int("mimick.guidance_blocks");
  m.decoder_layers = cfg.get_int("mimick.decoder_layers");
  m.gaussian = cfg.get_bool("mimick.gaussian");
  std::tie(m.sigma_lo, m.sigma_hi) = cfg.get_range("mimick.noise_sigma");
  m.jpeg = cfg.get_bool("mimick.jpeg");
  const auto [qlo, qhi] = cfg.get_range("mimick.jpeg_quality");
  m.quality_lo = static_cast<int>(qlo);
  m.quality_hi = static_cast<int>(qhi);
  const std::string mode = cfg.get_string("mimick.jpeg_mode");
  if (mode == "soft") {
    m.jpeg_rounding = JpegRounding::kSoft;
  } else if (mode == "ste") {
    m.jpeg_rounding = JpegRounding::kStraightThrough;
  } else {
    throw InvalidArgument("mimick.jpeg_mode must be soft or ste, got '" + mode + "'");
  }
  m.validate();
  return m;
}

nlohmann::json MimickConfig::to_json() const {
  return {{"feature_width", feature_width},
          {"dilations", dilations},
          {"guidance_blocks", guidance_blocks},
          {"decoder_layers", decoder_layers},
          {"gaussian", gaussian},
          {"sigma", {sigma_lo, sigma_hi}},
          {"jpeg", jpeg},
          {"quality", {quality_lo, quality_hi}},
          {"jpeg_mode", jpeg_rounding == JpegRounding::kSoft ? "soft" : "ste"}};
}

MimickConfig MimickConfig::from_json(const nlohmann::json& j) {
  MimickConfig m;
  m.feature_width = j.at("feature_width");
  m.dilations = j.at("dilations").get<std::vector<int>>();
  m.guidance_blocks = j.at("guidance_blocks");
  m.decoder_layers = j.at("decoder_layers");
  m.gaussian = j.at("gaussian");
  m.sigma_lo = j.at("sigma")[0];
  m.sigma_hi = j.at("sigma")[1];
  m.jpeg = j.at("jpeg");
  m.quality_lo = j.at("quality")[0];
  m.quality_hi = j.at("quality")[1];
  m.jpeg_rounding = j.at("jpeg_mode") == "ste" ? JpegRounding::kStraightThrough : JpegRounding::kSoft;
  m.validate();
  return m;
}

MimickConfig MimickConfig::without_noise() const {
  MimickConfig m = *this;
  m.gaussian = false;
  m.jpeg = false;
  return m;
}

bool MimickConfig::noise_enabled() const { return (gaussian && sigma_hi > 0) || jpeg; }

// ---------------------------------------------------------------- noise

Tensor inject_noise(const Tensor& x, const MimickConfig& cfg, Rng& rng, NoiseTape* tape) {
  Tensor y = x;
  const int n = x.n();
  const size_t map = x.map_size();
  if (tape) {
    tape->sigma.assign(n, 0.f);
    tape->quality.assign(n, 0);
    tape->jpeg.assign(n, JpegTape{});
    tape->pass_pre.assign(x.size(), 1);
    tape->pass_post.assign(x.size(), 1);
  }
  const bool gaussian = cfg.gaussian && cfg.sigma_hi > 0;
  for (int i = 0; i < n; ++i) {
    // draws happen in a fixed order per image so runs replay exactly
    const float sigma = gaussian ? static_cast<float>(uniform(rng, cfg.sigma_lo, cfg.sigma_hi)) : 0.f;
    const int quality = cfg.jpeg ? uniform_int(rng, cfg.quality_lo, cfg.quality_hi) : 0;
    if (tape) {
      tape->sigma[i] = sigma;
      tape->quality[i] = quality;
    }
    if (sigma > 0) {
      std::normal_distribution<float> dist(0.f, sigma);
      for (int c = 0; c < x.c(); ++c) {
        float* p = y.map(i, c);
        for (size_t k = 0; k < map; ++k) p[k] += dist(rng);
      }
    }
    if (quality > 0) {
      std::vector<float> buf(3 * map), out(3 * map);
      for (int c = 0; c < 3; ++c)
        for (size_t k = 0; k < map; ++k) {
          const size_t flat = static_cast<size_t>(c) * x.channel_stride() + i * map + k;
          const float v = y.map(i, c)[k];
          const float cl = std::clamp(v, 0.f, 1.f);
          if (tape) tape->pass_pre[flat] = v == cl;
          buf[c * map + k] = cl;
        }
      diff_jpeg_forward(buf.data(), out.data(), x.h(), x.w(), quality, cfg.jpeg_rounding,
                        tape ? &tape->jpeg[i] : nullptr);
      for (int c = 0; c < 3; ++c) std::copy(out.begin() + c * map, out.begin() + (c + 1) * map, y.map(i, c));
    }
  }
  float* d = y.data();
  for (size_t k = 0; k < y.size(); ++k) {
    const float cl = std::clamp(d[k], 0.f, 1.f);
    if (tape) tape->pass_post[k] = d[k] == cl;
    d[k] = cl;
  }
  return y;
}

Tensor inject_noise_backward(const NoiseTape& tape, const Tensor& dy) {
  Tensor dx = dy;
  float* g = dx.data();
  for (size_t k = 0; k < dx.size(); ++k)
    if (!tape.pass_post[k]) g[k] = 0.f;
  const size_t map = dx.map_size();
  for (int i = 0; i < dx.n(); ++i) {
    if (tape.quality[i] == 0) continue;
    std::vector<float> buf(3 * map), out(3 * map);
    for (int c = 0; c < 3; ++c) std::copy(dx.map(i, c), dx.map(i, c) + map, buf.begin() + c * map);
    diff_jpeg_backward(tape.jpeg[i], buf.data(), out.data());
    for (int c = 0; c < 3; ++c)
      for (size_t k = 0; k < map; ++k) {
        const size_t flat = static_cast<size_t>(c) * dx.channel_stride() + i * map + k;
        dx.map(i, c)[k] = tape.pass_pre[flat] ? out[c * map + k] : 0.f;
      }
  }
  return dx;
}

Image inject_noise(const Image& img, const MimickConfig& cfg, Rng& rng) {
  return inject_noise(Tensor::from_image(img), cfg, rng).to_image(0);
}

// ---------------------------------------------------------------- module

MimickModule::MimickModule(MimickConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int c = cfg_.feature_width;
  Rng rng = make_rng(seed, {0x6d696d69});
  for (int b = 0; b < cfg_.guidance_blocks; ++b) {
    guide_convs_.emplace_back("mimick.guidance.conv" + std::to_string(b), b == 0 ? 6 : c, c, 3, 1,
                              nn::Padding::kReflect);
    guide_convs_.back().init_default(rng);
    guide_acts_.emplace_back(0.2f);
  }
  guide_head_ = nn::Linear("mimick.guidance.head", c, 2 * c);
  guide_head_.init_default(rng);
  head_ = nn::Conv2d("mimick.transfer.head", 3, c, 3, 1, nn::Padding::kReflect);
  head_.init_default(rng);
  for (size_t i = 0; i < cfg_.dilations.size(); ++i) {
    branches_.emplace_back("mimick.transfer.branch" + std::to_string(i), c, c, 3, cfg_.dilations[i],
                           nn::Padding::kReflect);
    branches_.back().init_default(rng);
    branch_acts_.emplace_back(0.2f);
  }
  fuse_ = nn::Conv2d("mimick.transfer.fuse", c * static_cast<int>(cfg_.dilations.size()), c, 1);
  fuse_.init_default(rng);
  for (int i = 0; i < cfg_.decoder_layers; ++i) {
    decoder_.emplace_back("mimick.decoder.conv" + std::to_string(i), c, c, 1);
    decoder_.back().init_default(rng);
    decoder_acts_.emplace_back(0.2f);
  }
  final_ = nn::Conv2d("mimick.decoder.final", c, 3, 1);
  final_.init_zero();
}

void MimickModule::collect_parameters(std::vector<nn::Parameter*>& out) {
  for (auto& l : guide_convs_) l.collect_parameters(out);
  guide_head_.collect_parameters(out);
  head_.collect_parameters(out);
  for (auto& l : branches_) l.collect_parameters(out);
  fuse_.collect_parameters(out);
  for (auto& l : decoder_) l.collect_parameters(out);
  final_.collect_parameters(out);
}

Tensor MimickModule::guidance(const Tensor& lr, const Tensor& hr_down) const {
  MIMICSR_CHECK(lr.same_shape(hr_down), "mimick: lr and hr_down must have the same shape");
  MIMICSR_CHECK(lr.c() == 3, "mimick: inputs must be RGB");
  const Tensor* parts[] = {&lr, &hr_down};
  Tensor x = nn::concat_channels(parts);
  for (size_t b = 0; b < guide_convs_.size(); ++b) x = guide_acts_[b].apply(guide_convs_[b].apply(x));
  return guide_head_.apply(nn::global_avg_pool(x));
}

Tensor MimickModule::transfer(const Tensor& hr_down, const Tensor& g) const {
  const int c = cfg_.feature_width;
  MIMICSR_CHECK(g.c() == 2 * c && g.h() == 1 && g.w() == 1 && g.n() == hr_down.n(),
                "mimick: guidance vector length must be 2 * feature_width");
  const Tensor f = film_act_.apply(nn::film(head_.apply(hr_down), g));
  std::vector<Tensor> outs;
  for (size_t i = 0; i < branches_.size(); ++i) outs.push_back(branch_acts_[i].apply(branches_[i].apply(f)));
  std::vector<const Tensor*> parts;
  for (const auto& o : outs) parts.push_back(&o);
  Tensor x = fuse_act_.apply(fuse_.apply(nn::concat_channels(parts)));
  for (size_t i = 0; i < decoder_.size(); ++i) x = decoder_acts_[i].apply(decoder_[i].apply(x));
  Tensor y = final_.apply(x);
  nn::add_inplace(y, hr_down);
  return y;
}

Tensor MimickModule::apply(const Tensor& lr, const Tensor& hr_down) const {
  Tensor y = transfer(hr_down, guidance(lr, hr_down));
  for (float& v : y.values()) v = std::clamp(v, 0.f, 1.f);
  return y;
}

GuidanceVector MimickModule::guidance(const Image& lr, const Image& hr_down) const {
  require_same_shape(lr, hr_down, "guidance_forward");
  const Tensor g = guidance(Tensor::from_image(lr), Tensor::from_image(hr_down));
  const int c = cfg_.feature_width;
  GuidanceVector v;
  v.scale.assign(g.data(), g.data() + c);
  v.shift.assign(g.data() + c, g.data() + 2 * c);
  return v;
}

Image MimickModule::transfer(const Image& hr_down, const GuidanceVector& g) const {
  const int c = cfg_.feature_width;
  MIMICSR_CHECK(static_cast<int>(g.scale.size()) == c && static_cast<int>(g.shift.size()) == c,
                "mimick: guidance vector length must match feature_width");
  Tensor gt(1, 2 * c, 1, 1);
  std::copy(g.scale.begin(), g.scale.end(), gt.data());
  std::copy(g.shift.begin(), g.shift.end(), gt.data() + c);
  return transfer(Tensor::from_image(hr_down), gt).to_image(0);
}

Image MimickModule::mimick(const Image& lr, const Image& hr_down, Rng* noise_rng) const {
  require_same_shape(lr, hr_down, "mimick_forward");
  const Tensor pre = transfer(Tensor::from_image(hr_down), guidance(Tensor::from_image(lr), Tensor::from_image(hr_down)));
  Rng unused(0);
  const MimickConfig noise = noise_rng ? cfg_ : cfg_.without_noise();
  return inject_noise(pre, noise, noise_rng ? *noise_rng : unused).to_image(0);
}

Tensor MimickModule::forward(const Tensor& lr, const Tensor& hr_down, Rng* noise_rng) {
  MIMICSR_CHECK(lr.same_shape(hr_down), "mimick: lr and hr_down must have the same shape");
  MIMICSR_CHECK(lr.c() == 3, "mimick: inputs must be RGB");
  // guidance
  const Tensor* gparts[] = {&lr, &hr_down};
  Tensor x = nn::concat_channels(gparts);
  for (size_t b = 0; b < guide_convs_.size(); ++b) x = guide_acts_[b].forward(guide_convs_[b].forward(x));
  guide_h_ = x.h();
  guide_w_ = x.w();
  guidance_ = guide_head_.forward(nn::global_avg_pool(x));
  // transfer
  head_out_ = head_.forward(hr_down);
  const Tensor f = film_act_.forward(nn::film(head_out_, guidance_));
  std::vector<Tensor> outs;
  for (size_t i = 0; i < branches_.size(); ++i) outs.push_back(branch_acts_[i].forward(branches_[i].forward(f)));
  std::vector<const Tensor*> parts;
  for (const auto& o : outs) parts.push_back(&o);
  x = fuse_act_.forward(fuse_.forward(nn::concat_channels(parts)));
  for (size_t i = 0; i < decoder_.size(); ++i) x = decoder_acts_[i].forward(decoder_[i].forward(x));
  Tensor y = final_.forward(x);
  nn::add_inplace(y, hr_down);
  Rng unused(0);
  noise_used_ = noise_rng != nullptr;
  return inject_noise(y, noise_used_ ? cfg_ : cfg_.without_noise(), noise_used_ ? *noise_rng : unused, &tape_);
}

void MimickModule::backward(const Tensor& d_mim) {
  MIMICSR_CHECK(!tape_.pass_post.empty(), "mimick: backward without forward");
  Tensor g = inject_noise_backward(tape_, d_mim);
  // the hr_down skip carries no parameters
  g = final_.backward(g);
  for (int i = static_cast<int>(decoder_.size()) - 1; i >= 0; --i) g = decoder_[i].backward(decoder_acts_[i].backward(g));
  g = fuse_.backward(fuse_act_.backward(g));
  const int c = cfg_.feature_width;
  Tensor df;
  for (size_t i = 0; i < branches_.size(); ++i) {
    Tensor part = branches_[i].backward(branch_acts_[i].backward(nn::slice_channels(g, static_cast<int>(i) * c, c)));
    if (df.empty()) {
      df = std::move(part);
    } else {
      nn::add_inplace(df, part);
    }
  }
  df = film_act_.backward(df);
  Tensor dhead, dguid;
  nn::film_backward(head_out_, guidance_, df, dhead, dguid);
  head_.backward(dhead, false);
  Tensor gx = nn::global_avg_pool_backward(guide_head_.backward(dguid), guide_h_, guide_w_);
  for (int b = static_cast<int>(guide_convs_.size()) - 1; b >= 0; --b)
    gx = guide_convs_[b].backward(guide_acts_[b].backward(gx), b > 0);
}

void MimickModule::store(TensorArchive& archive) {
  archive.meta["mimick"] = cfg_.to_json();
  store_parameters(archive, parameters());
}

void MimickModule::restore(const TensorArchive& archive) { restore_parameters(archive, parameters()); }

MimickModule MimickModule::from_archive(const TensorArchive& archive) {
  if (!archive.meta.contains("mimick")) throw DataError("checkpoint holds no mimicking module");
  MimickModule m(MimickConfig::from_json(archive.meta.at("mimick")));
  m.restore(archive);
  return m;
}

}  // namespace mimicsr
