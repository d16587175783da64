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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mimicsr/dual.hpp"

namespace mimicsr::color {

// sRGB in [0, 1] -> CIE L*a*b* under D65 (2 degree observer).
template <typename T>
std::array<T, 3> srgb_to_lab(const T& r, const T& g, const T& b) {
  using std::cbrt;
  using std::pow;
  auto linear = [](const T& c) { return c > 0.04045 ? pow((c + 0.055) / 1.055, 2.4) : c / 12.92; };
  const T lr = linear(r), lg = linear(g), lb = linear(b);
  const T x = (0.412453 * lr + 0.357580 * lg + 0.180423 * lb) / 0.95047;
  const T y = 0.212671 * lr + 0.715160 * lg + 0.072169 * lb;
  const T z = (0.019334 * lr + 0.119193 * lg + 0.950227 * lb) / 1.08883;
  auto f = [](const T& t) { return t > 0.008856 ? cbrt(t) : 7.787 * t + 16.0 / 116.0; };
  const T fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

// Squared CIEDE2000 color difference (kL = kC = kH = 1).
template <typename T>
T ciede2000_squared(const std::array<T, 3>& lab1, const std::array<T, 3>& lab2) {
  using std::abs;
  using std::atan2;
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::sqrt;
  constexpr double kDeg = 180.0 / std::numbers::pi;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double p25 = std::pow(25.0, 7.0);

  const T& l1 = lab1[0];
  const T& l2 = lab2[0];
  const T c1 = sqrt(lab1[1] * lab1[1] + lab1[2] * lab1[2]);
  const T c2 = sqrt(lab2[1] * lab2[1] + lab2[2] * lab2[2]);
  const T cbar7 = pow((c1 + c2) / 2.0, 7.0);
  const T g = 0.5 * (1.0 - sqrt(cbar7 / (cbar7 + p25)));
  const T a1 = (1.0 + g) * lab1[1], a2 = (1.0 + g) * lab2[1];
  const T cp1 = sqrt(a1 * a1 + lab1[2] * lab1[2]);
  const T cp2 = sqrt(a2 * a2 + lab2[2] * lab2[2]);
  auto hue = [&](const T& b, const T& a) {
    if (value_of(a) == 0.0 && value_of(b) == 0.0) return T(0.0);
    T h = atan2(b, a) * kDeg;
    if (h < 0.0) h = h + 360.0;
    return h;
  };
  const T h1 = hue(lab1[2], a1), h2 = hue(lab2[2], a2);
  const bool achromatic = value_of(cp1) * value_of(cp2) == 0.0;

  const T dl = l2 - l1;
  const T dc = cp2 - cp1;
  T dh(0.0);
  if (!achromatic) {
    dh = h2 - h1;
    if (dh > 180.0) dh = dh - 360.0;
    else if (dh < -180.0) dh = dh + 360.0;
  }
  const T dhh = 2.0 * sqrt(cp1 * cp2) * sin(dh * (kRad / 2.0));

  const T lbar = (l1 + l2) / 2.0;
  const T cbar = (cp1 + cp2) / 2.0;
  T hbar = h1 + h2;
  if (!achromatic) {
    if (value_of(abs(h1 - h2)) <= 180.0) hbar = (h1 + h2) / 2.0;
    else if (h1 + h2 < 360.0) hbar = (h1 + h2 + 360.0) / 2.0;
    else hbar = (h1 + h2 - 360.0) / 2.0;
  }
  const T t = 1.0 - 0.17 * cos((hbar - 30.0) * kRad) + 0.24 * cos(2.0 * hbar * kRad) +
              0.32 * cos((3.0 * hbar + 6.0) * kRad) - 0.20 * cos((4.0 * hbar - 63.0) * kRad);
  const T q = (hbar - 275.0) / 25.0;
  const T dtheta = 30.0 * exp(-(q * q));
  const T cbar7p = pow(cbar, 7.0);
  const T rc = 2.0 * sqrt(cbar7p / (cbar7p + p25));
  const T lm = (lbar - 50.0) * (lbar - 50.0);
  const T sl = 1.0 + 0.015 * lm / sqrt(20.0 + lm);
  const T sc = 1.0 + 0.045 * cbar;
  const T sh = 1.0 + 0.015 * cbar * t;
  const T rt = -sin(2.0 * dtheta * kRad) * rc;
  const T tl = dl / sl, tc = dc / sc, th = dhh / sh;
  return tl * tl + tc * tc + th * th + rt * tc * th;
}

inline double ciede2000(const std::array<double, 3>& lab1, const std::array<double, 3>& lab2) {
  return std::sqrt(std::max(0.0, ciede2000_squared(lab1, lab2)));
}

}  // namespace mimicsr::color
