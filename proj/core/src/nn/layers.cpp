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

#include "mimicsr/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimicsr/error.hpp"
#include "mimicsr/resample.hpp"

namespace mimicsr::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

void fill_uniform(std::vector<float>& v, float bound, Rng& rng) {
  std::uniform_real_distribution<float> dist(-bound, bound);
  for (float& x : v) x = dist(rng);
}

}  // namespace

Parameter::Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  const size_t count = std::accumulate(shape.begin(), shape.end(), size_t{1},
                                       [](size_t a, int b) { return a * static_cast<size_t>(b); });
  value.assign(count, 0.f);
  grad.assign(count, 0.f);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.f); }

std::vector<Parameter*> Module::parameters() {
  std::vector<Parameter*> out;
  collect_parameters(out);
  return out;
}

void Module::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

size_t Module::parameter_count() {
  size_t n = 0;
  for (Parameter* p : parameters()) n += p->size();
  return n;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int dilation, Padding padding)
    : in_(in_channels),
      out_(out_channels),
      k_(kernel),
      dilation_(dilation),
      padding_(padding),
      weight_(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias_(name + ".bias", {out_channels}) {
  MIMICSR_CHECK(in_channels > 0 && out_channels > 0, "Conv2d: channel counts must be positive");
  MIMICSR_CHECK(kernel >= 1 && kernel % 2 == 1, "Conv2d: kernel must be odd");
  MIMICSR_CHECK(dilation >= 1, "Conv2d: dilation must be >= 1");
}

void Conv2d::init_default(Rng& rng) {
  const float bound = 1.f / std::sqrt(static_cast<float>(in_ * k_ * k_));
  fill_uniform(weight_.value, bound, rng);
  fill_uniform(bias_.value, bound, rng);
}

void Conv2d::init_zero() {
  std::fill(weight_.value.begin(), weight_.value.end(), 0.f);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.f);
}

void Conv2d::scale_weights(float s) {
  for (float& v : weight_.value) v *= s;
  for (float& v : bias_.value) v *= s;
}

void Conv2d::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Conv2d::im2col(const Tensor& x, std::vector<float>& col) const {
  const int n = x.n(), h = x.h(), w = x.w();
  const int r = k_ / 2;
  const size_t cols = static_cast<size_t>(n) * h * w;
  col.assign(static_cast<size_t>(in_) * k_ * k_ * cols, 0.f);
  std::vector<int> xmap(w);
  for (int ci = 0; ci < in_; ++ci) {
    for (int ky = 0; ky < k_; ++ky) {
      const int dy = (ky - r) * dilation_;
      for (int kx = 0; kx < k_; ++kx) {
        const int dx = (kx - r) * dilation_;
        float* dst = col.data() + ((static_cast<size_t>(ci) * k_ + ky) * k_ + kx) * cols;
        for (int x = 0; x < w; ++x) xmap[x] = x + dx;
        const int x_lo = std::clamp(-dx, 0, w), x_hi = std::clamp(w - dx, 0, w);
        for (int i = 0; i < n; ++i) {
          const float* src = x.map(i, ci);
          for (int y = 0; y < h; ++y) {
            float* row = dst + (static_cast<size_t>(i) * h + y) * w;
            int sy = y + dy;
            if (sy < 0 || sy >= h) {
              if (padding_ == Padding::kZeros) continue;
              sy = reflect_mirror(sy, h);
            }
            const float* srow = src + static_cast<size_t>(sy) * w;
            if (padding_ == Padding::kZeros) {
              for (int xx = x_lo; xx < x_hi; ++xx) row[xx] = srow[xx + dx];
            } else {
              for (int xx = 0; xx < w; ++xx) {
                const int sx = (xx >= x_lo && xx < x_hi) ? xmap[xx] : reflect_mirror(xmap[xx], w);
                row[xx] = srow[sx];
              }
            }
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const std::vector<float>& col, Tensor& dx) const {
  const int n = dx.n(), h = dx.h(), w = dx.w();
  const int r = k_ / 2;
  const size_t cols = static_cast<size_t>(n) * h * w;
  std::vector<int> xmap(w);
  for (int ci = 0; ci < in_; ++ci) {
    for (int ky = 0; ky < k_; ++ky) {
      const int dy = (ky - r) * dilation_;
      for (int kx = 0; kx < k_; ++kx) {
        const int ddx = (kx - r) * dilation_;
        const float* src = col.data() + ((static_cast<size_t>(ci) * k_ + ky) * k_ + kx) * cols;
        for (int x = 0; x < w; ++x) xmap[x] = x + ddx;
        const int x_lo = std::clamp(-ddx, 0, w), x_hi = std::clamp(w - ddx, 0, w);
        for (int i = 0; i < n; ++i) {
          float* dst = dx.map(i, ci);
          for (int y = 0; y < h; ++y) {
            const float* row = src + (static_cast<size_t>(i) * h + y) * w;
            int sy = y + dy;
            if (sy < 0 || sy >= h) {
              if (padding_ == Padding::kZeros) continue;
              sy = reflect_mirror(sy, h);
            }
            float* drow = dst + static_cast<size_t>(sy) * w;
            if (padding_ == Padding::kZeros) {
              for (int xx = x_lo; xx < x_hi; ++xx) drow[xx + ddx] += row[xx];
            } else {
              for (int xx = 0; xx < w; ++xx) {
                const int sx = (xx >= x_lo && xx < x_hi) ? xmap[xx] : reflect_mirror(xmap[xx], w);
                drow[sx] += row[xx];
              }
            }
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  Tensor y = apply(x);
  input_ = x;
  return y;
}

Tensor Conv2d::apply(const Tensor& x) const {
  if (x.c() != in_) {
    throw InvalidArgument(weight_.name + ": expected " + std::to_string(in_) + " input channels, got " +
                          x.shape_string());
  }
  Tensor y(x.n(), out_, x.h(), x.w());
  const Eigen::Index cols = static_cast<Eigen::Index>(x.channel_stride());
  const Eigen::Index kdim = static_cast<Eigen::Index>(in_) * k_ * k_;
  ConstMatMap wmat(weight_.value.data(), out_, kdim);
  MatMap ymat(y.data(), out_, cols);
  if (k_ == 1) {
    ymat.noalias() = wmat * ConstMatMap(x.data(), kdim, cols);
  } else {
    std::vector<float> col;
    im2col(x, col);
    ymat.noalias() = wmat * ConstMatMap(col.data(), kdim, cols);
  }
  for (int o = 0; o < out_; ++o) {
    const float b = bias_.value[o];
    float* row = y.channel(o);
    for (Eigen::Index j = 0; j < cols; ++j) row[j] += b;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, bool want_input_grad) {
  MIMICSR_CHECK(dy.c() == out_ && dy.n() == input_.n() && dy.h() == input_.h() && dy.w() == input_.w(),
                weight_.name + ": gradient shape mismatch");
  const Eigen::Index cols = static_cast<Eigen::Index>(dy.channel_stride());
  const Eigen::Index kdim = static_cast<Eigen::Index>(in_) * k_ * k_;
  ConstMatMap dymat(dy.data(), out_, cols);
  MatMap dw(weight_.grad.data(), out_, kdim);
  for (int o = 0; o < out_; ++o) {
    const float* row = dy.channel(o);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) acc += row[j];
    bias_.grad[o] += static_cast<float>(acc);
  }
  ConstMatMap wmat(weight_.value.data(), out_, kdim);
  if (k_ == 1) {
    dw.noalias() += dymat * ConstMatMap(input_.data(), kdim, cols).transpose();
    if (!want_input_grad) return {};
    Tensor dx(input_.n(), in_, input_.h(), input_.w());
    MatMap(dx.data(), kdim, cols).noalias() = wmat.transpose() * dymat;
    return dx;
  }
  std::vector<float> col;
  im2col(input_, col);
  dw.noalias() += dymat * ConstMatMap(col.data(), kdim, cols).transpose();
  if (!want_input_grad) return {};
  MatMap(col.data(), kdim, cols).noalias() = wmat.transpose() * dymat;
  Tensor dx(input_.n(), in_, input_.h(), input_.w());
  col2im(col, dx);
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(std::string name, int in_features, int out_features)
    : in_(in_features),
      out_(out_features),
      weight_(name + ".weight", {out_features, in_features}),
      bias_(name + ".bias", {out_features}) {
  MIMICSR_CHECK(in_features > 0 && out_features > 0, "Linear: feature counts must be positive");
}

void Linear::init_default(Rng& rng) {
  const float bound = 1.f / std::sqrt(static_cast<float>(in_));
  fill_uniform(weight_.value, bound, rng);
  fill_uniform(bias_.value, bound, rng);
}

void Linear::init_zero() {
  std::fill(weight_.value.begin(), weight_.value.end(), 0.f);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.f);
}

void Linear::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

Tensor Linear::forward(const Tensor& x) {
  Tensor y = apply(x);
  input_ = x;
  return y;
}

Tensor Linear::apply(const Tensor& x) const {
  MIMICSR_CHECK(x.c() == in_ && x.h() == 1 && x.w() == 1, weight_.name + ": expected (n," + std::to_string(in_) +
                                                              ",1,1) input, got " + x.shape_string());
  Tensor y(x.n(), out_, 1, 1);
  MatMap(y.data(), out_, x.n()).noalias() =
      ConstMatMap(weight_.value.data(), out_, in_) * ConstMatMap(x.data(), in_, x.n());
  for (int o = 0; o < out_; ++o)
    for (int i = 0; i < x.n(); ++i) y.channel(o)[i] += bias_.value[o];
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  MIMICSR_CHECK(dy.c() == out_ && dy.n() == input_.n(), weight_.name + ": gradient shape mismatch");
  const int n = dy.n();
  ConstMatMap dymat(dy.data(), out_, n);
  MatMap(weight_.grad.data(), out_, in_).noalias() += dymat * ConstMatMap(input_.data(), in_, n).transpose();
  for (int o = 0; o < out_; ++o)
    for (int i = 0; i < n; ++i) bias_.grad[o] += dy.channel(o)[i];
  Tensor dx(n, in_, 1, 1);
  MatMap(dx.data(), in_, n).noalias() = ConstMatMap(weight_.value.data(), out_, in_).transpose() * dymat;
  return dx;
}

// ---------------------------------------------------------------- LeakyRelu

Tensor LeakyRelu::forward(const Tensor& x) {
  input_ = x;
  return apply(x);
}

Tensor LeakyRelu::apply(const Tensor& x) const {
  Tensor y = x;
  for (float& v : y.values()) v = v > 0.f ? v : v * slope_;
  return y;
}

Tensor LeakyRelu::backward(const Tensor& dy) const {
  MIMICSR_CHECK(dy.same_shape(input_), "LeakyRelu: gradient shape mismatch");
  Tensor dx = dy;
  const float* x = input_.data();
  float* d = dx.data();
  for (size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > 0.f)) d[i] *= slope_;
  return dx;
}

// ---------------------------------------------------------------- reshaping ops

Tensor pixel_shuffle(const Tensor& x, int r) {
  MIMICSR_CHECK(r >= 1 && x.c() % (r * r) == 0, "pixel_shuffle: channels not divisible by r^2");
  const int c_out = x.c() / (r * r);
  Tensor y(x.n(), c_out, x.h() * r, x.w() * r);
  for (int c = 0; c < c_out; ++c)
    for (int i = 0; i < x.n(); ++i)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          const float* src = x.map(i, c * r * r + a * r + b);
          for (int yy = 0; yy < x.h(); ++yy)
            for (int xx = 0; xx < x.w(); ++xx) y.at(i, c, yy * r + a, xx * r + b) = src[yy * x.w() + xx];
        }
  return y;
}

Tensor pixel_unshuffle(const Tensor& y, int r) {
  MIMICSR_CHECK(r >= 1 && y.h() % r == 0 && y.w() % r == 0, "pixel_unshuffle: size not divisible by r");
  const int h = y.h() / r, w = y.w() / r;
  Tensor x(y.n(), y.c() * r * r, h, w);
  for (int c = 0; c < y.c(); ++c)
    for (int i = 0; i < y.n(); ++i)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          float* dst = x.map(i, c * r * r + a * r + b);
          for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx) dst[yy * w + xx] = y.at(i, c, yy * r + a, xx * r + b);
        }
  return x;
}

Tensor global_avg_pool(const Tensor& x) {
  Tensor y(x.n(), x.c(), 1, 1);
  const double inv = 1.0 / static_cast<double>(x.map_size());
  for (int c = 0; c < x.c(); ++c)
    for (int i = 0; i < x.n(); ++i) {
      const float* m = x.map(i, c);
      double acc = 0.0;
      for (size_t k = 0; k < x.map_size(); ++k) acc += m[k];
      y.at(i, c, 0, 0) = static_cast<float>(acc * inv);
    }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& dy, int h, int w) {
  Tensor dx(dy.n(), dy.c(), h, w);
  const float inv = 1.f / static_cast<float>(h * w);
  for (int c = 0; c < dy.c(); ++c)
    for (int i = 0; i < dy.n(); ++i) std::fill_n(dx.map(i, c), dx.map_size(), dy.at(i, c, 0, 0) * inv);
  return dx;
}

Tensor film(const Tensor& x, const Tensor& guidance) {
  MIMICSR_CHECK(guidance.n() == x.n() && guidance.c() == 2 * x.c() && guidance.h() == 1 && guidance.w() == 1,
                "film: guidance must be (n, 2c, 1, 1), got " + guidance.shape_string() + " for " + x.shape_string());
  Tensor y(x.n(), x.c(), x.h(), x.w());
  for (int c = 0; c < x.c(); ++c)
    for (int i = 0; i < x.n(); ++i) {
      const float scale = 1.f + guidance.at(i, c, 0, 0);
      const float shift = guidance.at(i, x.c() + c, 0, 0);
      const float* src = x.map(i, c);
      float* dst = y.map(i, c);
      for (size_t k = 0; k < x.map_size(); ++k) dst[k] = src[k] * scale + shift;
    }
  return y;
}

void film_backward(const Tensor& x, const Tensor& guidance, const Tensor& dy, Tensor& dx, Tensor& dguidance) {
  MIMICSR_CHECK(dy.same_shape(x), "film_backward: gradient shape mismatch");
  dx = Tensor(x.n(), x.c(), x.h(), x.w());
  dguidance = Tensor(guidance.n(), guidance.c(), 1, 1);
  for (int c = 0; c < x.c(); ++c)
    for (int i = 0; i < x.n(); ++i) {
      const float scale = 1.f + guidance.at(i, c, 0, 0);
      const float* xs = x.map(i, c);
      const float* g = dy.map(i, c);
      float* d = dx.map(i, c);
      double dscale = 0.0, dshift = 0.0;
      for (size_t k = 0; k < x.map_size(); ++k) {
        d[k] = g[k] * scale;
        dscale += static_cast<double>(g[k]) * xs[k];
        dshift += g[k];
      }
      dguidance.at(i, c, 0, 0) = static_cast<float>(dscale);
      dguidance.at(i, x.c() + c, 0, 0) = static_cast<float>(dshift);
    }
}

}  // namespace mimicsr::nn
