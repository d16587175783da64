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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mimicsr/checkpoint.hpp"
#include "mimicsr/image.hpp"
#include "mimicsr/nn/layers.hpp"

namespace mimicsr {

struct SRModelSpec {
  std::string name;
  int scale = 4;
  size_t param_count = 0;
  nlohmann::json config;
};

// Super-resolution network R(.). forward/backward is the training path;
// apply() is the stateless evaluation path.
class SRModel : public nn::Module {
 public:
  virtual std::string name() const = 0;
  virtual int scale() const = 0;
  virtual nlohmann::json options() const = 0;
  // Distance in LR pixels beyond which an input pixel cannot affect an output.
  virtual int receptive_radius() const = 0;

  virtual nn::Tensor forward(const nn::Tensor& lr) = 0;
  virtual void backward(const nn::Tensor& d_out) = 0;
  virtual nn::Tensor apply(const nn::Tensor& lr) const = 0;

  SRModelSpec spec();
  void store(TensorArchive& archive);
  void restore(const TensorArchive& archive);
};

// Residual CNN: head conv, N residual blocks, body conv with a feature skip,
// one sub-pixel convolution to scale*scale*3 channels, plus a bilinear
// upsampling of the input as a global skip.
class ReferenceSR : public SRModel {
 public:
  struct Options {
    int blocks = 8;
    int width = 64;
  };
  ReferenceSR(int scale, Options options, std::uint64_t seed);

  std::string name() const override { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  int scale() const override { return scale_; }
  nlohmann::json options() const override { return {{"blocks", opt_.blocks}, {"width", opt_.width}}; }
  int receptive_radius() const override { return 2 * opt_.blocks + 3; }

  nn::Tensor forward(const nn::Tensor& lr) override;
  void backward(const nn::Tensor& d_out) override;
  nn::Tensor apply(const nn::Tensor& lr) const override;
  void collect_parameters(std::vector<nn::Parameter*>& out) override;

 private:
  struct Block {
    nn::Conv2d c1, c2;
    nn::LeakyRelu act;
  };
  std::string name_ = "ref";
  int scale_;
  Options opt_;
  nn::Conv2d head_;
  std::vector<Block> blocks_;
  nn::Conv2d body_, up_;
};

// Name -> constructor map. Factories receive (scale, seed).
class ModelRegistry {
 public:
  using Factory = std::function<std::unique_ptr<SRModel>(int scale, std::uint64_t seed)>;

  static ModelRegistry& global();  // holds "ref" and "ref_small"

  void add(const std::string& name, Factory factory);
  std::unique_ptr<SRModel> create(const std::string& name, int scale, std::uint64_t seed) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Factory> factories_;
};

void register_model(const std::string& name, ModelRegistry::Factory factory);
std::unique_ptr<SRModel> make_model(const std::string& name, int scale, std::uint64_t seed);

// Model rebuilt from the "sr" entry of a checkpoint's metadata plus its
// "sr." tensors. Nothing else in the archive is read.
std::unique_ptr<SRModel> load_sr_model(const TensorArchive& archive);

// Evaluation forward of one image, clamped to [0, 1].
Image sr_forward(const SRModel& model, const Image& lr);

}  // namespace mimicsr
