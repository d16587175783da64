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

#include <cmath>

#include "doctest.h"
#include "mimicsr/error.hpp"
#include "mimicsr/nn/tensor.hpp"
#include "mimicsr/srmodels.hpp"
#include "unit/test_support.hpp"

using namespace mimicsr;
using nn::Tensor;

TEST_SUITE("srmodels") {
  TEST_CASE("output is exactly scale times the input for every registered model") {
    for (const auto& name : ModelRegistry::global().names())
      for (int scale : {2, 3, 4})
        for (int s : {16, 32, 48}) {
          const auto m = make_model(name, scale, 1);
          const Image out = sr_forward(*m, test::random_image(s, s + 3, 2));
          CHECK(out.height() == s * scale);
          CHECK(out.width() == (s + 3) * scale);
          CHECK(in_unit_range(out));
        }
    CHECK_THROWS_AS(make_model("ref", 5, 0), InvalidArgument);
  }

  TEST_CASE("32x32 at x4 gives 128x128") {
    const auto m = make_model("ref", 4, 0);
    const Image out = sr_forward(*m, test::random_image(32, 32, 1));
    CHECK(out.height() == 128);
    CHECK(out.width() == 128);
  }

  TEST_CASE("constant input gives near-constant output at initialization") {
    const auto m = make_model("ref", 4, 3);
    const Image out = sr_forward(*m, Image(24, 24, 0.4f));
    double mean = 0, sq = 0;
    for (float v : out.values()) mean += v;
    mean /= out.size();
    for (float v : out.values()) sq += (v - mean) * (v - mean);
    CHECK(std::sqrt(sq / out.size()) < 0.05);
  }

  TEST_CASE("batch items do not interact and evaluation is deterministic") {
    const auto m = make_model("ref_small", 4, 2);
    const Image a = test::random_image(12, 14, 1), b = test::random_image(12, 14, 2);
    const Image both[] = {a, a};
    const Tensor twin = m->apply(Tensor::from_images(both));
    CHECK(twin.to_image(0) == twin.to_image(1));
    const Image mixed[] = {a, b};
    const Tensor out = m->apply(Tensor::from_images(mixed));
    CHECK(mean_abs_diff(out.to_image(0), m->apply(Tensor::from_image(a)).to_image(0)) < 1e-6);
    CHECK(sr_forward(*m, a) == sr_forward(*m, a));
  }

  TEST_CASE("training forward equals evaluation forward and gradients match finite differences") {
    ReferenceSR m(2, {1, 4}, 5);
    const Tensor x = Tensor::from_image(test::random_image(6, 5, 1));
    const Tensor w = Tensor::from_image(test::random_image(12, 10, 2, -1.f, 1.f));
    const Tensor y = m.forward(x);
    CHECK(mean_abs_diff(y.to_image(0), m.apply(x).to_image(0)) == 0.0);
    m.zero_grad();
    m.backward(w);
    auto objective = [&]() {
      const Tensor o = m.apply(x);
      double s = 0;
      for (size_t i = 0; i < o.size(); ++i) s += double(o.data()[i]) * w.data()[i];
      return s;
    };
    for (nn::Parameter* p : m.parameters())
      for (size_t i = 0; i < p->size(); i += std::max<size_t>(1, p->size() / 4)) {
        const float orig = p->value[i];
        p->value[i] = orig + 2e-3f;
        const double fp = objective();
        p->value[i] = orig - 2e-3f;
        const double fm = objective();
        p->value[i] = orig;
        const double fd = (fp - fm) / 4e-3;
        CAPTURE(p->name);
        CHECK(std::abs(fd - p->grad[i]) <= 1e-2 * std::max(1.0, std::abs(fd)));
      }
  }

  TEST_CASE("registry") {
    ModelRegistry reg;
    int made = 0;
    reg.add("tiny", [&](int scale, std::uint64_t seed) {
      ++made;
      return std::make_unique<ReferenceSR>(scale, ReferenceSR::Options{1, 4}, seed);
    });
    auto a = reg.create("tiny", 2, 0), b = reg.create("tiny", 2, 0);
    CHECK(made == 2);
    CHECK(a.get() != b.get());
    a->parameters()[0]->value[0] += 1.f;
    CHECK(a->parameters()[0]->value[0] != b->parameters()[0]->value[0]);
    CHECK_THROWS_AS(reg.add("tiny", [](int s, std::uint64_t) { return std::make_unique<ReferenceSR>(s, ReferenceSR::Options{}, 0); }),
                    InvalidArgument);
    try {
      make_model("swinir", 4, 0);
      FAIL("expected an error");
    } catch (const InvalidArgument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("ref") != std::string::npos);
      CHECK(msg.find("ref_small") != std::string::npos);
    }
    CHECK(ModelRegistry::global().contains("ref_small"));
    CHECK(make_model("ref_small", 4, 0)->name() == "ref_small");
  }

  TEST_CASE("reference backbone size and checkpoint round trip") {
    auto m = make_model("ref", 4, 1);
    const SRModelSpec spec = m->spec();
    CHECK(spec.name == "ref");
    CHECK(spec.scale == 4);
    MESSAGE("ref x4 parameters: " << spec.param_count);
    CHECK(spec.param_count > 500000);
    CHECK(spec.param_count < 800000);
    TensorArchive ar;
    m->store(ar);
    const auto back = load_sr_model(ar);
    const Image lr = test::random_image(10, 10, 4);
    CHECK(sr_forward(*back, lr) == sr_forward(*m, lr));
    CHECK_THROWS_AS(load_sr_model(TensorArchive{}), DataError);
    ar.tensors.erase("sr.head.weight");
    CHECK_THROWS_AS(load_sr_model(ar), DataError);
  }
}
