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
#include <numbers>

#include "doctest.h"
#include "mimicsr/color.hpp"
#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/losses.hpp"
#include "mimicsr/resample.hpp"
#include "unit/test_support.hpp"

using namespace mimicsr;

namespace {

// Flow backend returning a fixed uniform flow, for mask edge cases.
class FixedFlow : public FlowBackend {
 public:
  FixedFlow(float u, float v) : u_(u), v_(v) {}
  FlowKind kind() const override { return FlowKind::kClassical; }
  FlowField compute(const Image& ref, const Image&) const override {
    return FlowField::uniform(ref.height(), ref.width(), u_, v_);
  }

 private:
  float u_, v_;
};

// Fraction of the bilinear footprint of sample position s that lies on a
// grid of n pixels.
double coverage(double s, int n) {
  if (s >= 0 && s <= n - 1) return 1.0;
  if (s > -1 && s < 0) return 1.0 + s;
  if (s > n - 1 && s < n) return n - s;
  return 0.0;
}

// Rotate colors about the gray axis by `deg` degrees.
Image hue_rotate(const Image& img, double deg) {
  const double t = deg * std::numbers::pi / 180, c = std::cos(t), s = std::sin(t), k = (1 - c) / 3,
               r = s / std::sqrt(3.0);
  const double m[3][3] = {{c + k, k - r, k + r}, {k + r, c + k, k - r}, {k - r, k + r, c + k}};
  Image out(img.height(), img.width());
  for (size_t i = 0; i < img.plane_size(); ++i)
    for (int a = 0; a < 3; ++a) {
      double v = 0;
      for (int b = 0; b < 3; ++b) v += m[a][b] * img.channel(b)[i];
      out.channel(a)[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return out;
}

Image lr_photo(const std::string& name, int size) {
  return imresize(crop(read_png(test::photo(name)), 0, 0, size * 4, size * 4), 0.25);
}

// Central finite difference of f at coordinate i of img, dividing by the
// step actually applied after float rounding.
template <typename F>
double central_difference(Image img, size_t i, double h, F f) {
  const float orig = img.values()[i];
  img.values()[i] = static_cast<float>(orig + h);
  const double xp = img.values()[i];
  const double fp = f(img);
  img.values()[i] = static_cast<float>(orig - h);
  const double xm = img.values()[i];
  const double fm = f(img);
  return (fp - fm) / (xp - xm);
}

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("warp: zero flow is the identity") {
    const Image img = test::random_image(13, 17, 1);
    CHECK(warp(img, FlowField(13, 17)) == img);
  }

  TEST_CASE("warp: integer flow equals the index shift, zeros outside") {
    const Image img = test::random_image(12, 20, 2);
    const Image out = warp(img, FlowField::uniform(12, 20, -3.f, 0.f));
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 20; ++x) CHECK(out.at(c, y, x) == (x >= 3 ? img.at(c, y, x - 3) : 0.f));
    const Image down = warp(img, FlowField::uniform(12, 20, 2.f, 1.f));
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 18; ++x) CHECK(down.at(1, y, x) == img.at(1, y + 1, x + 2));
  }

  TEST_CASE("warp: bilinear is exact on a linear ramp") {
    Image ramp(6, 16);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 16; ++x) ramp.at(c, y, x) = 0.05f * x + 0.1f;
    const Image out = warp(ramp, FlowField::uniform(6, 16, -0.5f, 0.f));
    for (int y = 0; y < 6; ++y)
      for (int x = 1; x < 16; ++x) CHECK(out.at(0, y, x) == doctest::Approx(0.05 * (x - 0.5) + 0.1).epsilon(1e-6));
    CHECK_THROWS_AS(warp(ramp, FlowField(6, 15)), InvalidArgument);
  }

  TEST_CASE("validity mask") {
    SUBCASE("zero flow: all ones") {
      const Plane m = validity_mask(FlowField(9, 11), 1e-3);
      CHECK(count_valid(m) == 99);
    }
    SUBCASE("(-3, 0): three invalid columns on the left border") {
      const int w = 20;
      const Plane m = validity_mask(FlowField::uniform(7, w, -3.f, 0.f), 1e-3);
      for (int y = 0; y < 7; ++y) {
        int valid = 0;
        for (int x = 0; x < w; ++x) valid += m(y, x) == 1.f;
        CHECK(valid == w - 3);
        CHECK(m(y, 0) == 0.f);
        CHECK(m(y, 2) == 0.f);
        CHECK(m(y, 3) == 1.f);
      }
    }
    SUBCASE("random uniform flows match the analytic footprint count") {
      Rng rng(77);
      for (int t = 0; t < 20; ++t) {
        const int h = uniform_int(rng, 8, 24), w = uniform_int(rng, 8, 24);
        const float u = static_cast<float>(uniform(rng, -4, 4)), v = static_cast<float>(uniform(rng, -4, 4));
        const double eps = 1e-3;
        size_t expect = 0;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            expect += coverage(x + double(u), w) * coverage(y + double(v), h) >= 1 - eps - 1e-6;
        CHECK(count_valid(validity_mask(FlowField::uniform(h, w, u, v), eps)) == expect);
      }
    }
    SUBCASE("epsilon near 1 keeps every partially covered pixel") {
      // every sample position stays within one pixel of the frame
      const Plane m = validity_mask(FlowField::uniform(8, 8, -0.9f, 0.7f), 1 - 1e-9);
      CHECK(count_valid(m) == 64);
    }
    SUBCASE("epsilon outside (0, 1) is rejected") {
      CHECK_THROWS_AS(validity_mask(FlowField(4, 4), 0.0), InvalidArgument);
      CHECK_THROWS_AS(validity_mask(FlowField(4, 4), 1.0), InvalidArgument);
    }
  }

  TEST_CASE("degradation loss") {
    const ClassicalFlow flow;
    const Image lr = lr_photo("coffee", 64);
    SUBCASE("perfect mimic with no misalignment") {
      CHECK(degradation_loss(lr, lr, lr, flow, 1e-3) < 1e-3);
    }
    SUBCASE("constant offset 0.1 with zero flow") {
      Image mim = lr;
      for (float& v : mim.values()) v += 0.1f;
      CHECK(degradation_loss(lr, lr, mim, flow, 1e-3) == doctest::Approx(0.1).epsilon(1e-5));
    }
    SUBCASE("warping recovers a 3 px shift") {
      const Image truth = lr;
      Image shifted(truth.height(), truth.width());
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < truth.height(); ++y)
          for (int x = 0; x < truth.width(); ++x)
            shifted.at(c, y, x) = truth.at(c, y, reflect_mirror(x + 3, truth.width()));
      CHECK(degradation_loss(shifted, truth, truth, flow, 1e-3) < mean_abs_diff(shifted, truth));
    }
    SUBCASE("identity flow gives the unmasked L1") {
      const Image mim = test::random_image(lr.height(), lr.width(), 5);
      CHECK(degradation_loss(lr, lr, mim, FixedFlow(0, 0), 1e-3) == doctest::Approx(mean_abs_diff(mim, lr)));
    }
    SUBCASE("an all-invalid mask is an error") {
      CHECK_THROWS_AS(degradation_loss(lr, lr, lr, FixedFlow(500, 0), 1e-3), DegenerateMaskError);
    }
    SUBCASE("shape mismatch") {
      CHECK_THROWS_AS(degradation_loss(lr, lr, Image(3, 3), flow, 1e-3), InvalidArgument);
    }
  }

  TEST_CASE("degradation gradient matches central differences on 8x8 patches") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const Image lr = test::random_image(8, 8, 100 + seed);
      const Image mim = test::random_image(8, 8, 200 + seed);
      const DegradationTarget target = degradation_target(lr, lr, FixedFlow(-1.25f, 0.5f), 1e-3);
      Image grad;
      masked_l1(mim, target, &grad);
      for (size_t i = 0; i < mim.size(); ++i) {
        // keep the step on one side of the |d| kink
        const double d = std::abs(double(mim.values()[i]) - target.lr_warped.values()[i]);
        const double h = std::min(1e-3, 0.5 * d);
        const double fd = central_difference(mim, i, h, [&](const Image& m) { return masked_l1(m, target); });
        const double g = grad.values()[i];
        CHECK(std::abs(fd - g) <= 1e-4 * std::max(std::abs(fd), 1e-12) + 1e-12);
      }
    }
  }

  TEST_CASE("CIEDE2000 matches published and reference values") {
    // Sharma, Wu and Dalal test pairs
    const double pairs[][7] = {{50, 2.6772, -79.7751, 50, 0, -82.7485, 2.0425},
                               {50, 3.1571, -77.2803, 50, 0, -82.7485, 2.8615},
                               {50, 0, 0, 50, -1, 2, 2.3669},
                               {50, 2.49, -0.001, 50, -2.49, 0.0009, 7.1792},
                               {50, 2.5, 0, 73, 25, -18, 27.1492},
                               {50, 2.5, 0, 50, 3.1736, 0.5854, 1.0000},
                               {60.2574, -34.0099, 36.2677, 60.4626, -34.1751, 39.4387, 1.2644},
                               {2.0776, 0.0795, -1.135, 0.9033, -0.0636, -0.5514, 0.9082}};
    for (const auto& p : pairs)
      CHECK(color::ciede2000({p[0], p[1], p[2]}, {p[3], p[4], p[5]}) == doctest::Approx(p[6]).epsilon(1e-4));

    // scikit-image rgb2lab + deltaE_ciede2000 (tests/oracles/ciede2000_oracle.py)
    const double rgb[][10] = {
        {0.5, 0.5, 0.5, 0.55, 0.5, 0.5, 53.38896474, -0.001468496524, 0.002783586865, 6.482070538},
        {0.9, 0.1, 0.1, 0.1, 0.9, 0.1, 48.92731173, 71.62035248, 54.39343178, 83.48957735},
        {0.2, 0.3, 0.8, 0.25, 0.3, 0.75, 38.37478611, 35.09719486, -68.66864885, 1.950906073},
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 100.0000002},
        {0.02, 0.01, 0.03, 0.03, 0.02, 0.01, 0.9487425492, 1.375902333, -1.69492272, 3.192129531},
        {0.3451448764, 0.5567149642, 0.6257771761, 0.0578287453, 0.3743837877, 0.6084052124, 56.01940524,
         -13.04229673, -14.9122378, 21.04708711},
        {0.01456785638, 0.1497635045, 0.4986711473, 0, 0, 0.4520169127, 19.87547254, 27.38184568, -52.6951527,
         8.937299705},
        {0.4200347584, 0.4870695232, 0.2535519108, 0.2728246487, 0.356388318, 0.5421709921, 49.46755969,
         -16.54360926, 30.28908448, 43.35484207},
        {0.7350103965, 0.8612868038, 0.3927227862, 0.7652725822, 0.6645455241, 0.3217284875, 83.19628121,
         -28.29089047, 54.36632024, 17.94433241},
        {0.9599197643, 0.4409781665, 0.8958831193, 0.7736834458, 0.1553614136, 0.6852351004, 67.04417632,
         64.89738634, -35.59060845, 17.86824098}};
    for (const auto& r : rgb) {
      const auto la = color::srgb_to_lab<double>(r[0], r[1], r[2]);
      const auto lb = color::srgb_to_lab<double>(r[3], r[4], r[5]);
      CHECK(la[0] == doctest::Approx(r[6]).epsilon(1e-6));
      CHECK(la[1] == doctest::Approx(r[7]).epsilon(1e-6).scale(1));
      CHECK(la[2] == doctest::Approx(r[8]).epsilon(1e-6).scale(1));
      CHECK(color::ciede2000(la, lb) == doctest::Approx(r[9]).epsilon(1e-6));
    }
  }

  TEST_CASE("analytic color loss") {
    const AnalyticColorScorer scorer;
    const Image img = lr_photo("astronaut", 48);
    CHECK(color_loss(img, img, scorer) == 0.0);
    const double rotated = color_loss(hue_rotate(img, 30), img, scorer);
    CHECK(rotated > 0.0);

    Image gained = img, noisy = img;
    for (float& v : gained.values()) v = std::min(1.f, 1.2f * v);
    Rng rng(5);
    std::normal_distribution<float> n(0.f, 0.02f);
    for (float& v : noisy.values()) v = std::clamp(v + n(rng), 0.f, 1.f);
    const double gain_score = color_loss(gained, img, scorer), noise_score = color_loss(noisy, img, scorer);
    MESSAGE("gain 1.2: " << gain_score << "  noise 0.02: " << noise_score << "  hue 30deg: " << rotated);
    CHECK(gain_score > noise_score);
    CHECK_THROWS_AS(color_loss(img, Image(3, 3), scorer), InvalidArgument);
  }

  TEST_CASE("color loss gradients match central differences") {
    const Image ref = test::random_image(10, 9, 1, 0.1f, 0.9f);
    const Image a = test::random_image(10, 9, 2, 0.1f, 0.9f);
    const AnalyticColorScorer analytic;
    const LearnedColorScorer learned = LearnedColorScorer::untrained(3);
    for (const ColorScorer* s : {static_cast<const ColorScorer*>(&analytic), static_cast<const ColorScorer*>(&learned)}) {
      Image grad;
      s->score(a, ref, &grad);
      for (size_t i = 0; i < a.size(); i += 5) {
        const double fd = central_difference(a, i, 1e-3, [&](const Image& m) { return s->score(m, ref); });
        CAPTURE(s->name());
        CHECK(std::abs(fd - grad.values()[i]) <= 2e-2 * std::abs(fd) + 2e-4);
      }
    }
  }

  TEST_CASE("color scorer selection") {
    Config cfg;
    CHECK(make_color_scorer(cfg)->name() == "analytic");
    cfg.set("loss.color_scorer", "learned");
    CHECK_THROWS_AS(make_color_scorer(cfg), DataError);
    cfg.set("loss.color_weights_path", "/nonexistent/cd.bin");
    CHECK_THROWS_AS(make_color_scorer(cfg), DataError);
    test::TempDir dir("color");
    LearnedColorScorer::untrained(1).save(dir.path() / "cd.bin");
    cfg.set("loss.color_weights_path", (dir.path() / "cd.bin").string());
    const auto s = make_color_scorer(cfg);
    CHECK(s->name() == "learned");
    const Image img = test::random_image(12, 12, 3);
    CHECK(s->score(img, img) == 0.0);
    cfg.set("loss.color_scorer", "cdnet");
    CHECK_THROWS_AS(make_color_scorer(cfg), InvalidArgument);
  }

  TEST_CASE("reconstruction loss") {
    const Image a = test::random_image(9, 7, 1), b = test::random_image(9, 7, 2);
    CHECK(reconstruction_loss(a, a) == 0.0);
    Image off = a;
    for (float& v : off.values()) v += 0.25f;
    CHECK(reconstruction_loss(off, a) == doctest::Approx(0.25).epsilon(1e-6));
    double brute = 0;
    for (size_t i = 0; i < a.size(); ++i) brute += std::abs(double(a.values()[i]) - b.values()[i]);
    CHECK(reconstruction_loss(a, b) == doctest::Approx(brute / a.size()).epsilon(1e-12));
    Image g;
    reconstruction_loss(a, b, &g);
    for (size_t i = 0; i < a.size(); i += 11) {
      const double fd = central_difference(a, i, 1e-4, [&](const Image& m) { return reconstruction_loss(m, b); });
      CHECK(std::abs(fd - g.values()[i]) < 1e-9);
    }
    CHECK_THROWS_AS(reconstruction_loss(a, Image(9, 8)), InvalidArgument);
  }

  TEST_CASE("total loss") {
    CHECK(total_loss(1.0, 2.0, 3.0, 0.0).l_total == 3.0);
    CHECK(total_loss(0, 0, 0, 5.0).l_total == 0.0);
    const LossReport r = total_loss(0.5, 0.2, 0.4, 0.1);
    CHECK(std::abs(r.l_total - 0.74) < 1e-12);
    CHECK(std::abs(r.l_total - (r.l_res + r.l_deg + r.lambda * r.l_cd)) < 1e-6);
    CHECK_THROWS_AS(total_loss(1, 1, 1, -0.1), InvalidArgument);
  }
}
