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

#include "mimicsr/srmodels.hpp"

#include <algorithm>

#include "mimicsr/error.hpp"
#include "mimicsr/nn/tensor.hpp"
#include "mimicsr/resample.hpp"

namespace mimicsr {

using nn::Tensor;

SRModelSpec SRModel::spec() { return SRModelSpec{name(), scale(), parameter_count(), options()}; }

void SRModel::store(TensorArchive& archive) {
  archive.meta["sr"] = {{"name", name()}, {"scale", scale()}, {"options", options()}};
  store_parameters(archive, parameters());
}

void SRModel::restore(const TensorArchive& archive) { restore_parameters(archive, parameters()); }

// ---------------------------------------------------------------- reference model

ReferenceSR::ReferenceSR(int scale, Options options, std::uint64_t seed) : scale_(scale), opt_(options) {
  MIMICSR_CHECK(scale == 2 || scale == 3 || scale == 4, "SR scale must be 2, 3 or 4");
  MIMICSR_CHECK(opt_.blocks >= 1 && opt_.width >= 1, "ReferenceSR: blocks and width must be positive");
  Rng rng = make_rng(seed, {0x7372});
  const int w = opt_.width;
  head_ = nn::Conv2d("sr.head", 3, w, 3);
  head_.init_default(rng);
  for (int b = 0; b < opt_.blocks; ++b) {
    const std::string p = "sr.block" + std::to_string(b);
    Block blk{nn::Conv2d(p + ".conv1", w, w, 3), nn::Conv2d(p + ".conv2", w, w, 3), nn::LeakyRelu(0.f)};
    blk.c1.init_default(rng);
    blk.c2.init_default(rng);
    blocks_.push_back(std::move(blk));
  }
  body_ = nn::Conv2d("sr.body", w, w, 3);
  body_.init_default(rng);
  up_ = nn::Conv2d("sr.upsample", w, 3 * scale * scale, 3);
  up_.init_default(rng);
  up_.scale_weights(0.1f);  // start close to the bilinear skip
}

void ReferenceSR::collect_parameters(std::vector<nn::Parameter*>& out) {
  head_.collect_parameters(out);
  for (auto& b : blocks_) {
    b.c1.collect_parameters(out);
    b.c2.collect_parameters(out);
  }
  body_.collect_parameters(out);
  up_.collect_parameters(out);
}

namespace {

Tensor bilinear_skip(const Tensor& lr, int scale) {
  Tensor out(lr.n(), 3, lr.h() * scale, lr.w() * scale);
  for (int i = 0; i < lr.n(); ++i) {
    const Image up = upsample_bilinear(lr.to_image(i), scale);
    for (int c = 0; c < 3; ++c) std::copy(up.channel(c).begin(), up.channel(c).end(), out.map(i, c));
  }
  return out;
}

}  // namespace

Tensor ReferenceSR::apply(const Tensor& lr) const {
  MIMICSR_CHECK(lr.c() == 3, "SR model input must be RGB");
  const Tensor f0 = head_.apply(lr);
  Tensor x = f0;
  for (const auto& b : blocks_) {
    Tensor r = b.c2.apply(b.act.apply(b.c1.apply(x)));
    nn::add_inplace(r, x);
    x = std::move(r);
  }
  Tensor body = body_.apply(x);
  nn::add_inplace(body, f0);
  Tensor y = nn::pixel_shuffle(up_.apply(body), scale_);
  nn::add_inplace(y, bilinear_skip(lr, scale_));
  return y;
}

Tensor ReferenceSR::forward(const Tensor& lr) {
  MIMICSR_CHECK(lr.c() == 3, "SR model input must be RGB");
  const Tensor f0 = head_.forward(lr);
  Tensor x = f0;
  for (auto& b : blocks_) {
    Tensor r = b.c2.forward(b.act.forward(b.c1.forward(x)));
    nn::add_inplace(r, x);
    x = std::move(r);
  }
  Tensor body = body_.forward(x);
  nn::add_inplace(body, f0);
  Tensor y = nn::pixel_shuffle(up_.forward(body), scale_);
  nn::add_inplace(y, bilinear_skip(lr, scale_));
  return y;
}

void ReferenceSR::backward(const Tensor& d_out) {
  // the bilinear skip has no parameters and the input needs no gradient
  const Tensor d_body = up_.backward(nn::pixel_unshuffle(d_out, scale_));
  Tensor dx = body_.backward(d_body);
  for (int b = static_cast<int>(blocks_.size()) - 1; b >= 0; --b) {
    Block& blk = blocks_[b];
    Tensor dr = blk.c1.backward(blk.act.backward(blk.c2.backward(dx)));
    nn::add_inplace(dx, dr);
  }
  nn::add_inplace(dx, d_body);  // feature skip around the body
  head_.backward(dx, false);
}

// ---------------------------------------------------------------- registry

ModelRegistry& ModelRegistry::global() {
  static ModelRegistry* reg = [] {
    auto* r = new ModelRegistry;
    r->add("ref", [](int scale, std::uint64_t seed) {
      return std::make_unique<ReferenceSR>(scale, ReferenceSR::Options{8, 64}, seed);
    });
    r->add("ref_small", [](int scale, std::uint64_t seed) {
      auto m = std::make_unique<ReferenceSR>(scale, ReferenceSR::Options{4, 32}, seed);
      m->set_name("ref_small");
      return m;
    });
    return r;
  }();
  return *reg;
}

void ModelRegistry::add(const std::string& name, Factory factory) {
  MIMICSR_CHECK(!name.empty() && factory, "model registration needs a name and a factory");
  std::lock_guard lock(mu_);
  if (!factories_.emplace(name, std::move(factory)).second) {
    throw InvalidArgument("SR model '" + name + "' is already registered");
  }
}

std::vector<std::string> ModelRegistry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [n, f] : factories_) out.push_back(n);
  return out;
}

bool ModelRegistry::contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return factories_.count(name) != 0;
}

std::unique_ptr<SRModel> ModelRegistry::create(const std::string& name, int scale, std::uint64_t seed) const {
  Factory f;
  {
    std::lock_guard lock(mu_);
    const auto it = factories_.find(name);
    if (it != factories_.end()) f = it->second;
  }
  if (!f) {
    std::string list;
    for (const auto& n : names()) list += (list.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown SR model '" + name + "'; registered: " + list);
  }
  auto m = f(scale, seed);
  MIMICSR_CHECK(m && m->scale() == scale, "SR model factory for '" + name + "' returned the wrong scale");
  return m;
}

void register_model(const std::string& name, ModelRegistry::Factory factory) {
  ModelRegistry::global().add(name, std::move(factory));
}

std::unique_ptr<SRModel> make_model(const std::string& name, int scale, std::uint64_t seed) {
  return ModelRegistry::global().create(name, scale, seed);
}

std::unique_ptr<SRModel> load_sr_model(const TensorArchive& archive) {
  if (!archive.meta.contains("sr")) throw DataError("checkpoint holds no SR model");
  const auto& meta = archive.meta.at("sr");
  auto model = make_model(meta.at("name").get<std::string>(), meta.at("scale").get<int>(), 0);
  model->restore(archive);
  return model;
}

Image sr_forward(const SRModel& model, const Image& lr) {
  return clamp01(model.apply(Tensor::from_image(lr)).to_image(0));
}

}  // namespace mimicsr
