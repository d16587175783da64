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

#include "mimicsr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "mimicsr/checkpoint.hpp"
#include "mimicsr/color.hpp"
#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/filter.hpp"

namespace mimicsr {

namespace {

void require_flow_shape(int h, int w, const FlowField& flow, const char* what) {
  if (flow.height() != h || flow.width() != w) {
    throw InvalidArgument(std::string(what) + ": flow is " + std::to_string(flow.height()) + "x" +
                          std::to_string(flow.width()) + ", image is " + std::to_string(h) + "x" +
                          std::to_string(w));
  }
}

float sample_zero(const Plane& p, int y, int x) {
  return (y < 0 || x < 0 || y >= p.height || x >= p.width) ? 0.f : p(y, x);
}

}  // namespace

Plane warp(const Plane& img, const FlowField& flow) {
  require_flow_shape(img.height, img.width, flow, "warp");
  Plane out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double sx = x + static_cast<double>(flow.u(y, x));
      const double sy = y + static_cast<double>(flow.v(y, x));
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      if (!std::isfinite(sx) || !std::isfinite(sy) || fx0 < -2 || fy0 < -2 || fx0 > img.width + 1 ||
          fy0 > img.height + 1) {
        continue;  // far outside the frame
      }
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      const float ax = static_cast<float>(sx - fx0), ay = static_cast<float>(sy - fy0);
      float v = sample_zero(img, y0, x0) * (1 - ax) * (1 - ay);
      if (ax != 0) v += sample_zero(img, y0, x0 + 1) * ax * (1 - ay);
      if (ay != 0) v += sample_zero(img, y0 + 1, x0) * (1 - ax) * ay;
      if (ax != 0 && ay != 0) v += sample_zero(img, y0 + 1, x0 + 1) * ax * ay;
      out(y, x) = v;
    }
  return out;
}

Image warp(const Image& img, const FlowField& flow) {
  require_flow_shape(img.height(), img.width(), flow, "warp");
  Image out(img.height(), img.width());
  for (int c = 0; c < Image::kChannels; ++c) out.set_plane(c, warp(img.plane(c), flow));
  return out;
}

Plane validity_mask(const FlowField& flow, double epsilon) {
  MIMICSR_CHECK(epsilon > 0 && epsilon < 1, "validity_mask: epsilon must be in (0, 1)");
  const Plane ones(flow.height(), flow.width(), 1.f);
  Plane m = warp(ones, flow);
  const float threshold = static_cast<float>(1.0 - epsilon);
  for (float& v : m.values) v = v >= threshold ? 1.f : 0.f;
  return m;
}

size_t count_valid(const Plane& mask) {
  return static_cast<size_t>(std::count(mask.values.begin(), mask.values.end(), 1.f));
}

DegradationTarget degradation_target(const Image& lr, const Image& hr_down, const FlowBackend& backend,
                                     double epsilon) {
  require_same_shape(lr, hr_down, "degradation_loss");
  DegradationTarget t;
  t.flow = compute_flow(hr_down, lr, backend);
  t.lr_warped = warp(lr, t.flow);
  t.mask = validity_mask(t.flow, epsilon);
  t.valid_pixels = count_valid(t.mask);
  if (t.valid_pixels == 0) throw DegenerateMaskError("degradation_loss: every pixel is masked out");
  return t;
}

double masked_l1(const Image& mim, const DegradationTarget& target, Image* grad) {
  require_same_shape(mim, target.lr_warped, "degradation_loss");
  MIMICSR_CHECK(target.valid_pixels > 0, "degradation_loss: empty mask");
  const double n = static_cast<double>(target.valid_pixels) * Image::kChannels;
  if (grad) *grad = Image(mim.height(), mim.width());
  double sum = 0;
  const size_t plane = mim.plane_size();
  for (int c = 0; c < Image::kChannels; ++c) {
    const auto a = mim.channel(c);
    const auto b = target.lr_warped.channel(c);
    for (size_t i = 0; i < plane; ++i) {
      if (target.mask.values[i] == 0.f) continue;
      const double d = static_cast<double>(a[i]) - b[i];
      sum += std::abs(d);
      if (grad) grad->channel(c)[i] = static_cast<float>((d > 0) - (d < 0)) / static_cast<float>(n);
    }
  }
  return sum / n;
}

double degradation_loss(const Image& lr, const Image& hr_down, const Image& mim, const FlowBackend& backend,
                        double epsilon, Image* grad) {
  require_same_shape(lr, mim, "degradation_loss");
  return masked_l1(mim, degradation_target(lr, hr_down, backend, epsilon), grad);
}

// ---------------------------------------------------------------- color

double AnalyticColorScorer::score(const Image& a, const Image& b, Image* grad) const {
  require_same_shape(a, b, "color_loss");
  const Image ba = gaussian_blur(a, kBlurSigma), bb = gaussian_blur(b, kBlurSigma);
  const size_t n = a.plane_size();
  const double root_s = std::sqrt(kSmoothing);
  Image dblur;
  if (grad) dblur = Image(a.height(), a.width());
  double sum = 0;
  using D = Dual<3>;
  for (size_t i = 0; i < n; ++i) {
    const auto ref = color::srgb_to_lab<double>(bb.channel(0)[i], bb.channel(1)[i], bb.channel(2)[i]);
    if (grad) {
      const auto lab = color::srgb_to_lab<D>(D::variable(ba.channel(0)[i], 0), D::variable(ba.channel(1)[i], 1),
                                             D::variable(ba.channel(2)[i], 2));
      const std::array<D, 3> ref_d{D(ref[0]), D(ref[1]), D(ref[2])};
      const D e = sqrt(color::ciede2000_squared(lab, ref_d) + kSmoothing) - root_s;
      sum += e.v;
      for (int c = 0; c < 3; ++c) dblur.channel(c)[i] = static_cast<float>(e.d[c] / static_cast<double>(n));
    } else {
      const auto lab = color::srgb_to_lab<double>(ba.channel(0)[i], ba.channel(1)[i], ba.channel(2)[i]);
      sum += std::sqrt(std::max(0.0, color::ciede2000_squared(lab, ref)) + kSmoothing) - root_s;
    }
  }
  if (grad) *grad = gaussian_blur_adjoint(dblur, kBlurSigma);
  return sum / static_cast<double>(n);
}

LearnedColorScorer::LearnedColorScorer()
    : c1_("color.conv1", 3, 16, 3, 1, nn::Padding::kReflect),
      c2_("color.conv2", 16, 16, 3, 1, nn::Padding::kReflect),
      c3_("color.conv3", 16, 8, 1) {}

LearnedColorScorer LearnedColorScorer::untrained(std::uint64_t seed) {
  LearnedColorScorer s;
  Rng rng(seed);
  s.c1_.init_default(rng);
  s.c2_.init_default(rng);
  s.c3_.init_default(rng);
  return s;
}

LearnedColorScorer LearnedColorScorer::load(const std::filesystem::path& weights) {
  if (weights.empty()) throw DataError("loss.color_scorer=learned requires loss.color_weights_path");
  const TensorArchive ar = TensorArchive::load(weights);
  if (ar.meta.value("kind", "") != "color_scorer") {
    throw DataError(weights.string() + " does not hold color-scorer weights");
  }
  LearnedColorScorer s;
  restore_parameters(ar, s.c1_.parameters());
  restore_parameters(ar, s.c2_.parameters());
  restore_parameters(ar, s.c3_.parameters());
  return s;
}

void LearnedColorScorer::save(const std::filesystem::path& path) const {
  TensorArchive ar;
  ar.meta = {{"kind", "color_scorer"}};
  for (const nn::Conv2d* c : {&c1_, &c2_, &c3_})
    for (const nn::Parameter* p : {&c->weight(), &c->bias()}) ar.put(p->name, p->shape, p->value);
  ar.save(path);
}

double LearnedColorScorer::score(const Image& a, const Image& b, Image* grad) const {
  require_same_shape(a, b, "color_loss");
  nn::LeakyRelu act(0.f);
  const nn::Tensor fb = c3_.apply(act.apply(c2_.apply(act.apply(c1_.apply(nn::Tensor::from_image(b))))));
  // local copies keep the shared scorer read-only while caching activations
  nn::Conv2d c1 = c1_, c2 = c2_, c3 = c3_;
  nn::LeakyRelu r1(0.f), r2(0.f);
  const nn::Tensor fa = c3.forward(r2.forward(c2.forward(r1.forward(c1.forward(nn::Tensor::from_image(a))))));
  const size_t n = fa.map_size();
  const double root_s = std::sqrt(AnalyticColorScorer::kSmoothing);
  nn::Tensor dfa(1, fa.c(), fa.h(), fa.w());
  double sum = 0;
  for (size_t i = 0; i < n; ++i) {
    double d2 = 0;
    for (int c = 0; c < fa.c(); ++c) {
      const double d = fa.map(0, c)[i] - fb.map(0, c)[i];
      d2 += d * d;
    }
    const double r = std::sqrt(d2 + AnalyticColorScorer::kSmoothing);
    sum += r - root_s;
    for (int c = 0; c < fa.c(); ++c)
      dfa.map(0, c)[i] = static_cast<float>((fa.map(0, c)[i] - fb.map(0, c)[i]) / r / static_cast<double>(n));
  }
  if (grad) *grad = c1.backward(r1.backward(c2.backward(r2.backward(c3.backward(dfa))))).to_image(0);
  return sum / static_cast<double>(n);
}

std::unique_ptr<ColorScorer> make_color_scorer(const Config& cfg) {
  const std::string kind = cfg.get_string("loss.color_scorer");
  if (kind == "analytic") return std::make_unique<AnalyticColorScorer>();
  if (kind == "learned") {
    return std::make_unique<LearnedColorScorer>(LearnedColorScorer::load(cfg.get_string("loss.color_weights_path")));
  }
  throw InvalidArgument("loss.color_scorer must be analytic or learned, got '" + kind + "'");
}

double color_loss(const Image& mim, const Image& hr_down, const ColorScorer& scorer, Image* grad) {
  require_same_shape(mim, hr_down, "color_loss");
  return scorer.score(mim, hr_down, grad);
}

// ---------------------------------------------------------------- reconstruction / total

double reconstruction_loss(const Image& sr, const Image& hr, Image* grad) {
  require_same_shape(sr, hr, "reconstruction_loss");
  const auto a = sr.values();
  const auto b = hr.values();
  const double n = static_cast<double>(a.size());
  if (grad) *grad = Image(sr.height(), sr.width());
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += std::abs(d);
    if (grad) grad->values()[i] = static_cast<float>((d > 0) - (d < 0)) / static_cast<float>(n);
  }
  return sum / n;
}

LossReport total_loss(double l_res, double l_deg, double l_cd, double lambda) {
  MIMICSR_CHECK(lambda >= 0, "total_loss: lambda must be nonnegative");
  MIMICSR_CHECK(l_res >= 0 && l_deg >= 0 && l_cd >= 0, "total_loss: loss components must be nonnegative");
  return LossReport{l_res, l_deg, l_cd, l_res + l_deg + lambda * l_cd, lambda};
}

}  // namespace mimicsr
