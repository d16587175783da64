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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/flow.hpp"
#include "mimicsr/resample.hpp"
#include "unit/test_support.hpp"

using namespace mimicsr;

namespace {

Image lr_photo(const std::string& name, int size) {
  const Image hr = read_png(test::photo(name));
  return imresize(crop(hr, 0, 0, size * 4, size * 4), 0.25);
}

// mov(y, x) = ref(y + dy, x + dx) with mirror reflection at the borders.
Image shifted(const Image& ref, int dx, int dy) {
  Image out(ref.height(), ref.width());
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < ref.height(); ++y)
      for (int x = 0; x < ref.width(); ++x)
        out.at(c, y, x) = ref.at(c, reflect_mirror(y + dy, ref.height()), reflect_mirror(x + dx, ref.width()));
  return out;
}

float interior_median(const Plane& p, int margin) {
  std::vector<float> v;
  for (int y = margin; y < p.height - margin; ++y)
    for (int x = margin; x < p.width - margin; ++x) v.push_back(p(y, x));
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double interior_l1(const Image& a, const Image& b, int margin) {
  double s = 0;
  size_t n = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = margin; y < a.height() - margin; ++y)
      for (int x = margin; x < a.width() - margin; ++x, ++n) s += std::abs(a.at(c, y, x) - b.at(c, y, x));
  return s / static_cast<double>(n);
}

Image warp_image(const Image& img, const FlowField& f) {
  Image out(img.height(), img.width());
  for (int c = 0; c < 3; ++c) out.set_plane(c, warp_clamped(img.plane(c), f));
  return out;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("identity pair gives near-zero flow") {
    const Image ref = lr_photo("astronaut", 96);
    const FlowField f = compute_flow(ref, ref, ClassicalFlow{});
    CHECK(f.height() == ref.height());
    CHECK(f.width() == ref.width());
    CHECK(f.all_finite());
    for (int y = 4; y < f.height() - 4; ++y)
      for (int x = 4; x < f.width() - 4; ++x) {
        CHECK(std::abs(f.u(y, x)) < 0.25f);
        CHECK(std::abs(f.v(y, x)) < 0.25f);
      }
  }

  TEST_CASE("integer translation recovers (-3, 0) with the warp-mov-onto-ref sign") {
    for (const char* name : {"astronaut", "coffee", "chelsea"}) {
      const Image ref = lr_photo(name, 72);
      const Image mov = shifted(ref, 3, 0);
      const FlowField f = compute_flow(ref, mov, ClassicalFlow{});
      CHECK(std::abs(interior_median(f.u, 8) + 3.f) < 0.5f);
      CHECK(std::abs(interior_median(f.v, 8)) < 0.5f);
      // warp-consistency
      CHECK(interior_l1(warp_image(mov, f), ref, 8) <= interior_l1(mov, ref, 8));
    }
  }

  TEST_CASE("vertical and fractional shifts stay consistent") {
    const Image ref = lr_photo("motorcycle", 80);
    const Image mov = shifted(ref, 0, -2);
    const FlowField f = compute_flow(ref, mov, ClassicalFlow{});
    CHECK(std::abs(interior_median(f.v, 8) - 2.f) < 0.5f);
    CHECK(interior_l1(warp_image(mov, f), ref, 8) <= interior_l1(mov, ref, 8));
  }

  TEST_CASE("textureless images give finite bounded flow") {
    const Image a(40, 40, 0.3f), b(40, 40, 0.7f);
    const FlowField f = compute_flow(a, b, ClassicalFlow{});
    CHECK(f.all_finite());
    for (float v : f.u.values) CHECK(std::abs(v) < 1.f);
    for (float v : f.v.values) CHECK(std::abs(v) < 1.f);
  }

  TEST_CASE("dimension mismatch throws") {
    CHECK_THROWS_AS(compute_flow(Image(16, 16), Image(16, 18), ClassicalFlow{}), InvalidArgument);
  }

  TEST_CASE("backends are never trainable and config selects them") {
    Config cfg;
    auto b = make_flow_backend(cfg);
    CHECK(b->kind() == FlowKind::kClassical);
    CHECK_FALSE(b->trainable());
    cfg.set("flow.backend", "learned");
    cfg.set("flow.weights", "/nonexistent/flow.bin");
    CHECK_THROWS_AS(make_flow_backend(cfg), DataError);
    cfg.set("flow.weights", "");
    CHECK_THROWS_AS(make_flow_backend(cfg), DataError);
    cfg.set("flow.backend", "raft");
    CHECK_THROWS_AS(make_flow_backend(cfg), InvalidArgument);
  }

  TEST_CASE("learned backend round-trips weights and is deterministic") {
    test::TempDir dir("flow");
    const LearnedFlow net = LearnedFlow::untrained(3, 11);
    net.save(dir.path() / "flow.bin");
    Config cfg;
    cfg.set("flow.backend", "learned");
    cfg.set("flow.weights", (dir.path() / "flow.bin").string());
    auto loaded = make_flow_backend(cfg);
    CHECK(loaded->kind() == FlowKind::kLearned);
    const Image ref = test::smooth_texture(32, 40, 3);
    const Image mov = test::smooth_texture(32, 40, 4);
    const FlowField a = loaded->compute(ref, mov);
    const FlowField b = net.compute(ref, mov);
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    CHECK(a.all_finite());
  }
}
