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

#include "mimicsr/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mimicsr/checkpoint.hpp"
#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/filter.hpp"
#include "mimicsr/resample.hpp"

namespace mimicsr {

bool FlowField::all_finite() const {
  auto ok = [](const Plane& p) {
    return std::all_of(p.values.begin(), p.values.end(), [](float v) { return std::isfinite(v); });
  };
  return ok(u) && ok(v);
}

FlowField FlowField::uniform(int h, int w, float du, float dv) {
  FlowField f(h, w);
  std::fill(f.u.values.begin(), f.u.values.end(), du);
  std::fill(f.v.values.begin(), f.v.values.end(), dv);
  return f;
}

Plane warp_clamped(const Plane& img, const FlowField& flow) {
  const int h = img.height, w = img.width;
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float sx = std::clamp(x + flow.u(y, x), 0.f, static_cast<float>(w - 1));
      const float sy = std::clamp(y + flow.v(y, x), 0.f, static_cast<float>(h - 1));
      const int x0 = std::min(static_cast<int>(sx), w - 1), y0 = std::min(static_cast<int>(sy), h - 1);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const float fx = sx - x0, fy = sy - y0;
      out(y, x) = (img(y0, x0) * (1 - fx) + img(y0, x1) * fx) * (1 - fy) +
                  (img(y1, x0) * (1 - fx) + img(y1, x1) * fx) * fy;
    }
  return out;
}

namespace {

Plane normalized_luma(const Image& img, double presmooth) {
  Plane y = luma(img);
  double mean = 0.0, sq = 0.0;
  for (float v : y.values) mean += v;
  mean /= static_cast<double>(y.size());
  for (float v : y.values) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(y.size()));
  const float inv = static_cast<float>(1.0 / (sd + 1e-3));
  for (float& v : y.values) v = static_cast<float>((v - mean) * inv);
  return presmooth > 0 ? gaussian_blur(y, presmooth) : y;
}

// Resize a flow field to (h, w), scaling vectors by the size ratio.
FlowField resize_flow(const FlowField& f, int h, int w) {
  FlowField out(h, w);
  const float sy = static_cast<float>(f.height()) / h, sx = static_cast<float>(f.width()) / w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float fy = std::clamp((y + 0.5f) * sy - 0.5f, 0.f, static_cast<float>(f.height() - 1));
      const float fx = std::clamp((x + 0.5f) * sx - 0.5f, 0.f, static_cast<float>(f.width() - 1));
      const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
      const int y1 = std::min(y0 + 1, f.height() - 1), x1 = std::min(x0 + 1, f.width() - 1);
      const float ay = fy - y0, ax = fx - x0;
      auto sample = [&](const Plane& p) {
        return (p(y0, x0) * (1 - ax) + p(y0, x1) * ax) * (1 - ay) + (p(y1, x0) * (1 - ax) + p(y1, x1) * ax) * ay;
      };
      out.u(y, x) = sample(f.u) / sx;
      out.v(y, x) = sample(f.v) / sy;
    }
  return out;
}

Plane median3(const Plane& p) {
  Plane out(p.height, p.width);
  std::array<float, 9> buf;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          buf[n++] = p(std::clamp(y + dy, 0, p.height - 1), std::clamp(x + dx, 0, p.width - 1));
      std::nth_element(buf.begin(), buf.begin() + 4, buf.end());
      out(y, x) = buf[4];
    }
  return out;
}

void refine_level(const Plane& ref, const Plane& mov, FlowField& flow, const ClassicalFlowOptions& opt) {
  const int h = ref.height, w = ref.width;
  const float alpha2 = static_cast<float>(opt.alpha * opt.alpha);
  Plane ix(h, w), iy(h, w), it(h, w), denom(h, w);
  for (int pass = 0; pass < opt.warps; ++pass) {
    const Plane warped = warp_clamped(mov, flow);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
        const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
        const float gx = 0.5f * ((warped(y, xr) - warped(y, xl)) + (ref(y, xr) - ref(y, xl))) /
                         static_cast<float>(std::max(xr - xl, 1));
        const float gy = 0.5f * ((warped(yd, x) - warped(yu, x)) + (ref(yd, x) - ref(yu, x))) /
                         static_cast<float>(std::max(yd - yu, 1));
        ix(y, x) = gx;
        iy(y, x) = gy;
        it(y, x) = warped(y, x) - ref(y, x);
        denom(y, x) = 1.f / (alpha2 + gx * gx + gy * gy);
      }
    const FlowField base = flow;
    FlowField next = flow;
    for (int iter = 0; iter < opt.iterations; ++iter) {
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
          const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
          const float ubar = 0.25f * (flow.u(y, xl) + flow.u(y, xr) + flow.u(yu, x) + flow.u(yd, x));
          const float vbar = 0.25f * (flow.v(y, xl) + flow.v(y, xr) + flow.v(yu, x) + flow.v(yd, x));
          const float a = ubar - base.u(y, x), b = vbar - base.v(y, x);
          const float r = (ix(y, x) * a + iy(y, x) * b + it(y, x)) * denom(y, x);
          next.u(y, x) = base.u(y, x) + a - ix(y, x) * r;
          next.v(y, x) = base.v(y, x) + b - iy(y, x) * r;
        }
      std::swap(flow, next);
    }
    flow.u = median3(flow.u);
    flow.v = median3(flow.v);
  }
}

}  // namespace

ClassicalFlow::ClassicalFlow(ClassicalFlowOptions options) : opt_(options) {
  MIMICSR_CHECK(opt_.levels >= 1, "ClassicalFlow: levels must be >= 1");
  MIMICSR_CHECK(opt_.warps >= 1 && opt_.iterations >= 1, "ClassicalFlow: warps and iterations must be >= 1");
  MIMICSR_CHECK(opt_.alpha > 0, "ClassicalFlow: alpha must be positive");
}

FlowField ClassicalFlow::compute(const Image& ref, const Image& mov) const {
  require_same_shape(ref, mov, "compute_flow");
  std::vector<Plane> ref_pyr{normalized_luma(ref, opt_.presmooth)};
  std::vector<Plane> mov_pyr{normalized_luma(mov, opt_.presmooth)};
  for (int l = 1; l < opt_.levels; ++l) {
    if (ref_pyr.back().height < 8 || ref_pyr.back().width < 8) break;
    ref_pyr.push_back(imresize(ref_pyr.back(), 0.5));
    mov_pyr.push_back(imresize(mov_pyr.back(), 0.5));
  }
  FlowField flow(ref_pyr.back().height, ref_pyr.back().width);
  for (int l = static_cast<int>(ref_pyr.size()) - 1; l >= 0; --l) {
    if (flow.height() != ref_pyr[l].height || flow.width() != ref_pyr[l].width) {
      flow = resize_flow(flow, ref_pyr[l].height, ref_pyr[l].width);
    }
    refine_level(ref_pyr[l], mov_pyr[l], flow, opt_);
  }
  return flow;
}

// ---------------------------------------------------------------- learned backend

LearnedFlow::LearnedFlow(int levels) {
  MIMICSR_CHECK(levels >= 1, "LearnedFlow: levels must be >= 1");
  for (int l = 0; l < levels; ++l) {
    const std::string p = "flow.level" + std::to_string(l);
    nets_.push_back(LevelNet{nn::Conv2d(p + ".conv1", 8, kWidth, 3, 1, nn::Padding::kReflect),
                             nn::Conv2d(p + ".conv2", kWidth, kWidth, 3, 1, nn::Padding::kReflect),
                             nn::Conv2d(p + ".conv3", kWidth, kWidth / 2, 3, 1, nn::Padding::kReflect),
                             nn::Conv2d(p + ".conv4", kWidth / 2, 2, 3, 1, nn::Padding::kReflect)});
  }
}

LearnedFlow LearnedFlow::untrained(int levels, std::uint64_t seed) {
  LearnedFlow f(levels);
  Rng rng(seed);
  for (auto& n : f.nets_) {
    n.c1.init_default(rng);
    n.c2.init_default(rng);
    n.c3.init_default(rng);
    n.c4.init_zero();
  }
  return f;
}

LearnedFlow LearnedFlow::load(const std::filesystem::path& weights) {
  if (weights.empty()) throw DataError("flow.backend=learned requires flow.weights");
  const TensorArchive archive = TensorArchive::load(weights);
  if (archive.meta.value("kind", "") != "learned_flow") {
    throw DataError(weights.string() + " does not hold learned-flow weights");
  }
  LearnedFlow f(archive.meta.at("levels").get<int>());
  for (auto& n : f.nets_) {
    for (nn::Conv2d* c : {&n.c1, &n.c2, &n.c3, &n.c4}) {
      for (nn::Parameter* p : c->parameters()) {
        const auto& e = archive.at(p->name);
        if (e.values.size() != p->size()) throw DataError("flow weights: wrong size for " + p->name);
        p->value = e.values;
      }
    }
  }
  return f;
}

void LearnedFlow::save(const std::filesystem::path& path) const {
  TensorArchive archive;
  archive.meta = {{"kind", "learned_flow"}, {"levels", levels()}};
  for (const auto& n : nets_)
    for (const nn::Conv2d* c : {&n.c1, &n.c2, &n.c3, &n.c4})
      for (const nn::Parameter* p : {&c->weight(), &c->bias()}) archive.put(p->name, p->shape, p->value);
  archive.save(path);
}

FlowField LearnedFlow::compute(const Image& ref, const Image& mov) const {
  require_same_shape(ref, mov, "compute_flow");
  // Pyramids of the normalized RGB images.
  auto normalize = [](const Image& img) {
    Image out = img;
    for (float& v : out.values()) v = (v - 0.45f) / 0.25f;
    return out;
  };
  std::vector<Image> ref_pyr{normalize(ref)}, mov_pyr{normalize(mov)};
  for (int l = 1; l < levels(); ++l) {
    if (ref_pyr.back().height() < 8 || ref_pyr.back().width() < 8) break;
    ref_pyr.push_back(imresize(ref_pyr.back(), 0.5));
    mov_pyr.push_back(imresize(mov_pyr.back(), 0.5));
  }
  FlowField flow(ref_pyr.back().height(), ref_pyr.back().width());
  nn::LeakyRelu relu(0.f);
  for (int l = static_cast<int>(ref_pyr.size()) - 1; l >= 0; --l) {
    const Image& r = ref_pyr[l];
    if (flow.height() != r.height() || flow.width() != r.width()) flow = resize_flow(flow, r.height(), r.width());
    Image warped(r.height(), r.width());
    for (int c = 0; c < 3; ++c) warped.set_plane(c, warp_clamped(mov_pyr[l].plane(c), flow));
    nn::Tensor x(1, 8, r.height(), r.width());
    for (int c = 0; c < 3; ++c) {
      std::copy(r.channel(c).begin(), r.channel(c).end(), x.map(0, c));
      std::copy(warped.channel(c).begin(), warped.channel(c).end(), x.map(0, 3 + c));
    }
    std::copy(flow.u.values.begin(), flow.u.values.end(), x.map(0, 6));
    std::copy(flow.v.values.begin(), flow.v.values.end(), x.map(0, 7));
    const LevelNet& net = nets_[l];
    nn::Tensor y = net.c4.apply(relu.apply(net.c3.apply(relu.apply(net.c2.apply(relu.apply(net.c1.apply(x)))))));
    for (size_t i = 0; i < flow.u.size(); ++i) {
      flow.u.values[i] += y.map(0, 0)[i];
      flow.v.values[i] += y.map(0, 1)[i];
    }
  }
  return flow;
}

std::unique_ptr<FlowBackend> make_flow_backend(const Config& cfg) {
  const std::string kind = cfg.get_string("flow.backend");
  if (kind == "classical") {
    ClassicalFlowOptions o;
    o.levels = cfg.get_int("flow.levels");
    o.warps = cfg.get_int("flow.warps");
    o.iterations = cfg.get_int("flow.iterations");
    o.alpha = cfg.get_real("flow.alpha");
    o.presmooth = cfg.get_real("flow.presmooth");
    return std::make_unique<ClassicalFlow>(o);
  }
  if (kind == "learned") return std::make_unique<LearnedFlow>(LearnedFlow::load(cfg.get_string("flow.weights")));
  throw InvalidArgument("flow.backend must be classical or learned, got '" + kind + "'");
}

FlowField compute_flow(const Image& ref, const Image& mov, const FlowBackend& backend) {
  require_same_shape(ref, mov, "compute_flow");
  return backend.compute(ref, mov);
}

}  // namespace mimicsr
