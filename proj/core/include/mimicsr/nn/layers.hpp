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

#include <cstdint>
#include <string>
#include <vector>

#include "mimicsr/nn/tensor.hpp"
#include "mimicsr/rng.hpp"

namespace mimicsr::nn {

// A trainable array with its gradient accumulator.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> s);
  size_t size() const { return value.size(); }
  void zero_grad();
};

// Anything owning parameters. Layers cache what their backward pass needs
// during forward; a backward call consumes the most recent forward.
class Module {
 public:
  virtual ~Module() = default;
  virtual void collect_parameters(std::vector<Parameter*>& out) = 0;

  std::vector<Parameter*> parameters();
  void zero_grad();
  size_t parameter_count();
};

enum class Padding { kZeros, kReflect };

// 2D convolution, stride 1, "same" output size, optional dilation.
class Conv2d : public Module {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int dilation = 1,
         Padding padding = Padding::kZeros);

  // PyTorch default initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  // weights and bias.
  void init_default(Rng& rng);
  void init_zero();
  void scale_weights(float s);

  Tensor forward(const Tensor& x);
  // Forward without caching anything; safe to call concurrently.
  Tensor apply(const Tensor& x) const;
  // Accumulates parameter gradients; returns dL/dx unless want_input_grad is
  // false (then returns an empty tensor).
  Tensor backward(const Tensor& dy, bool want_input_grad = true);
  void collect_parameters(std::vector<Parameter*>& out) override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  int dilation() const { return dilation_; }

 private:
  void im2col(const Tensor& x, std::vector<float>& col) const;
  void col2im(const std::vector<float>& col, Tensor& dx) const;

  int in_ = 0, out_ = 0, k_ = 1, dilation_ = 1;
  Padding padding_ = Padding::kZeros;
  Parameter weight_, bias_;
  Tensor input_;
};

// Fully connected layer over (n, c, 1, 1) tensors.
class Linear : public Module {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features);
  void init_default(Rng& rng);
  void init_zero();

  Tensor forward(const Tensor& x);
  Tensor apply(const Tensor& x) const;
  Tensor backward(const Tensor& dy);
  void collect_parameters(std::vector<Parameter*>& out) override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int in_ = 0, out_ = 0;
  Parameter weight_, bias_;
  Tensor input_;
};

// max(x, slope * x); slope 0 is ReLU.
class LeakyRelu {
 public:
  explicit LeakyRelu(float slope = 0.f) : slope_(slope) {}
  Tensor forward(const Tensor& x);
  Tensor apply(const Tensor& x) const;
  Tensor backward(const Tensor& dy) const;

 private:
  float slope_;
  Tensor input_;
};

// (n, c*r*r, h, w) -> (n, c, h*r, w*r) with PyTorch's channel ordering.
Tensor pixel_shuffle(const Tensor& x, int r);
Tensor pixel_unshuffle(const Tensor& y, int r);  // exact inverse, also the adjoint

// (n, c, h, w) -> (n, c, 1, 1)
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& dy, int h, int w);

// Feature-wise affine modulation: y = x * (1 + gamma) + beta, where
// `guidance` is (n, 2c, 1, 1) holding gamma in channels [0, c) and beta in
// [c, 2c).
Tensor film(const Tensor& x, const Tensor& guidance);
void film_backward(const Tensor& x, const Tensor& guidance, const Tensor& dy, Tensor& dx, Tensor& dguidance);

}  // namespace mimicsr::nn
