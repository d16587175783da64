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

#include "mimicsr/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/resample.hpp"

namespace mimicsr {

namespace {

// BT.601 luma in double precision, border removed.
struct Luma {
  int height = 0, width = 0;
  std::vector<double> v;
  double operator()(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
};

Luma cropped_luma(const Image& img, int border, const char* what) {
  MIMICSR_CHECK(border >= 0, std::string(what) + ": border must be >= 0");
  MIMICSR_CHECK(img.height() > 2 * border && img.width() > 2 * border,
                std::string(what) + ": image smaller than the border crop");
  Luma l;
  l.height = img.height() - 2 * border;
  l.width = img.width() - 2 * border;
  l.v.resize(static_cast<size_t>(l.height) * l.width);
  for (int y = 0; y < l.height; ++y)
    for (int x = 0; x < l.width; ++x)
      l.v[static_cast<size_t>(y) * l.width + x] = 0.299 * img.at(0, y + border, x + border) +
                                                  0.587 * img.at(1, y + border, x + border) +
                                                  0.114 * img.at(2, y + border, x + border);
  return l;
}

}  // namespace

double psnr(const Image& a, const Image& b, int border) {
  require_same_shape(a, b, "psnr");
  const Luma ya = cropped_luma(a, border, "psnr"), yb = cropped_luma(b, border, "psnr");
  double se = 0;
  for (size_t i = 0; i < ya.v.size(); ++i) {
    const double d = ya.v[i] - yb.v[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(ya.v.size());
  if (mse == 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, int border) {
  require_same_shape(a, b, "ssim");
  const Luma ya = cropped_luma(a, border, "ssim"), yb = cropped_luma(b, border, "ssim");
  constexpr int kRadius = 5;
  constexpr double kSigma = 1.5;
  if (ya.height < 2 * kRadius + 1 || ya.width < 2 * kRadius + 1) {
    throw InvalidArgument("ssim: image smaller than the 11x11 window after the border crop");
  }
  std::array<double, 2 * kRadius + 1> g{};
  double gs = 0;
  for (int i = -kRadius; i <= kRadius; ++i) gs += g[i + kRadius] = std::exp(-(i * i) / (2 * kSigma * kSigma));
  for (double& v : g) v /= gs;
  const int h = ya.height, w = ya.width;
  const int oh = h - 2 * kRadius, ow = w - 2 * kRadius;
  // separable filtering of the five moment images, valid region
  auto filter = [&](auto value) {
    std::vector<double> rows(static_cast<size_t>(h) * ow), out(static_cast<size_t>(oh) * ow);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = 0;
        for (int k = 0; k <= 2 * kRadius; ++k) s += g[k] * value(y, x + k);
        rows[static_cast<size_t>(y) * ow + x] = s;
      }
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = 0;
        for (int k = 0; k <= 2 * kRadius; ++k) s += g[k] * rows[static_cast<size_t>(y + k) * ow + x];
        out[static_cast<size_t>(y) * ow + x] = s;
      }
    return out;
  };
  auto A = [&](int y, int x) { return ya(y, x); };
  auto B = [&](int y, int x) { return yb(y, x); };
  const auto mu_a = filter(A), mu_b = filter(B);
  const auto aa = filter([&](int y, int x) { return A(y, x) * A(y, x); });
  const auto bb = filter([&](int y, int x) { return B(y, x) * B(y, x); });
  const auto ab = filter([&](int y, int x) { return A(y, x) * B(y, x); });
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double sum = 0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double va = aa[i] - mu_a[i] * mu_a[i], vb = bb[i] - mu_b[i] * mu_b[i];
    const double cov = ab[i] - mu_a[i] * mu_b[i];
    sum += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
           ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

// ---------------------------------------------------------------- NIQE

NiqeParams NiqeParams::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open NIQE parameter file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed NIQE parameter file " + path.string() + ": " + e.what());
  }
  NiqeParams p;
  p.mu = j.at("mu").get<std::vector<double>>();
  p.cov = j.at("cov").get<std::vector<double>>();
  if (p.mu.size() != kFeatures || p.cov.size() != static_cast<size_t>(kFeatures * kFeatures)) {
    throw DataError("NIQE parameter file " + path.string() + " has the wrong dimensions");
  }
  return p;
}

void NiqeParams::save(const std::filesystem::path& path, const std::string& source) const {
  nlohmann::json j = {{"source", source}, {"feature_count", kFeatures}, {"mu", mu}, {"cov", cov}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << "\n";
}

std::filesystem::path default_niqe_params_path() {
  const char* name = "niqe_pris_params.json";
  if (const char* env = std::getenv("MIMICSR_DATA_DIR")) {
    const std::filesystem::path p = std::filesystem::path(env) / name;
    if (std::filesystem::exists(p)) return p;
  }
  for (const char* dir : {MIMICSR_INSTALL_DATA_DIR, MIMICSR_SOURCE_DATA_DIR}) {
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    if (std::filesystem::exists(p)) return p;
  }
  throw DataError("NIQE parameter file not found; set metrics.niqe_params or MIMICSR_DATA_DIR");
}

NiqeParams load_niqe_params(const Config& cfg) {
  const std::string p = cfg.get_string("metrics.niqe_params");
  return NiqeParams::load(p.empty() ? default_niqe_params_path() : std::filesystem::path(p));
}

namespace {

struct AggdTable {
  std::vector<double> gam, r_gam;
  AggdTable() {
    for (int i = 0; i < 9801; ++i) {
      const double g = 0.2 + 0.001 * i;
      gam.push_back(g);
      r_gam.push_back(std::pow(std::tgamma(2 / g), 2) / (std::tgamma(1 / g) * std::tgamma(3 / g)));
    }
  }
};

const AggdTable& aggd_table() {
  static const AggdTable t;
  return t;
}

struct Aggd {
  double alpha, beta_l, beta_r;
};

Aggd estimate_aggd(const std::vector<double>& v) {
  double ls = 0, rs = 0, abs_sum = 0, sq = 0;
  size_t ln = 0, rn = 0;
  for (double x : v) {
    if (x < 0) {
      ls += x * x;
      ++ln;
    } else if (x > 0) {
      rs += x * x;
      ++rn;
    }
    abs_sum += std::abs(x);
    sq += x * x;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double left_std = ln ? std::sqrt(ls / ln) : nan;
  const double right_std = rn ? std::sqrt(rs / rn) : nan;
  const double gammahat = left_std / right_std;
  const double n = static_cast<double>(v.size());
  const double rhat = (abs_sum / n) * (abs_sum / n) / (sq / n);
  const double rhatnorm = rhat * (std::pow(gammahat, 3) + 1) * (gammahat + 1) / std::pow(gammahat * gammahat + 1, 2);
  const auto& t = aggd_table();
  size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  if (std::isfinite(rhatnorm)) {
    for (size_t i = 0; i < t.gam.size(); ++i) {
      const double e = (t.r_gam[i] - rhatnorm) * (t.r_gam[i] - rhatnorm);
      if (e < best_err) {
        best_err = e;
        best = i;
      }
    }
  }
  const double alpha = t.gam[best];
  const double k = std::sqrt(std::tgamma(1 / alpha) / std::tgamma(3 / alpha));
  return {alpha, left_std * k, right_std * k};
}

// 18 features of one MSCN block (row-major, bh x bw).
void block_features(const std::vector<double>& b, int bh, int bw, std::vector<double>& feat) {
  const Aggd a = estimate_aggd(b);
  feat.push_back(a.alpha);
  feat.push_back((a.beta_l + a.beta_r) / 2);
  // circular neighbours: (0,1), (1,0), (1,1), (1,-1) as in np.roll
  const int shifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  std::vector<double> prod(b.size());
  for (const auto& s : shifts) {
    for (int y = 0; y < bh; ++y)
      for (int x = 0; x < bw; ++x) {
        const int sy = ((y - s[0]) % bh + bh) % bh, sx = ((x - s[1]) % bw + bw) % bw;
        prod[static_cast<size_t>(y) * bw + x] = b[static_cast<size_t>(y) * bw + x] * b[static_cast<size_t>(sy) * bw + sx];
      }
    const Aggd p = estimate_aggd(prod);
    const double mean = (p.beta_r - p.beta_l) * (std::tgamma(2 / p.alpha) / std::tgamma(1 / p.alpha));
    feat.insert(feat.end(), {p.alpha, mean, p.beta_l, p.beta_r});
  }
}

// Mean-subtracted contrast-normalized coefficients, 7x7 Gaussian (sigma 7/6),
// edge-replicated borders.
std::vector<double> mscn(const Plane& img, std::vector<double>* sigma_out = nullptr) {
  double win[7][7], total = 0;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) total += win[i + 3][j + 3] = std::exp(-(i * i + j * j) / (2.0 * (7.0 / 6) * (7.0 / 6)));
  const int h = img.height, w = img.width;
  std::vector<double> out(static_cast<size_t>(h) * w);
  if (sigma_out) sigma_out->assign(out.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // moments about the centre value, so flat neighbourhoods give exact zeros
      const double c = img(y, x);
      double mu = 0, m2 = 0;
      for (int i = -3; i <= 3; ++i)
        for (int j = -3; j <= 3; ++j) {
          const double v = img(std::clamp(y + i, 0, h - 1), std::clamp(x + j, 0, w - 1)) - c;
          const double k = win[i + 3][j + 3] / total;
          mu += k * v;
          m2 += k * v * v;
        }
      const double sigma = std::sqrt(std::abs(m2 - mu * mu));
      if (sigma_out) (*sigma_out)[static_cast<size_t>(y) * w + x] = sigma;
      out[static_cast<size_t>(y) * w + x] = -mu / (sigma + 1);
    }
  return out;
}

// Feature rows for all blocks at both scales, plus each block's mean sigma
// at scale 1 (used by the fitting sharpness filter).
std::vector<std::vector<double>> features_and_sharpness(const Plane& y255, int block, std::vector<double>* sharpness) {
  const int nh = y255.height / block, nw = y255.width / block;
  if (nh == 0 || nw == 0) throw InvalidArgument("niqe: image must be at least 96x96");
  Plane img = crop(y255, 0, 0, nh * block, nw * block);
  std::vector<std::vector<double>> rows(static_cast<size_t>(nh) * nw);
  for (int scale = 1; scale <= 2; ++scale) {
    std::vector<double> sigma;
    const std::vector<double> norm = mscn(img, scale == 1 && sharpness ? &sigma : nullptr);
    const int bs = block / scale;
    for (int bw = 0; bw < nw; ++bw)
      for (int bh = 0; bh < nh; ++bh) {
        std::vector<double> b(static_cast<size_t>(bs) * bs);
        for (int y = 0; y < bs; ++y)
          for (int x = 0; x < bs; ++x) b[static_cast<size_t>(y) * bs + x] = norm[static_cast<size_t>(bh * bs + y) * img.width + bw * bs + x];
        block_features(b, bs, bs, rows[static_cast<size_t>(bw) * nh + bh]);
        if (scale == 1 && sharpness) {
          double s = 0;
          for (int y = 0; y < bs; ++y)
            for (int x = 0; x < bs; ++x) s += sigma[static_cast<size_t>(bh * bs + y) * img.width + bw * bs + x];
          sharpness->push_back(s / (bs * bs));
        }
      }
    if (scale == 1) img = imresize(img, 0.5);
  }
  return rows;
}

}  // namespace

std::vector<std::vector<double>> niqe_block_features(const Plane& y, int block) {
  return features_and_sharpness(y, block, nullptr);
}

double niqe_y255(const Plane& y, const NiqeParams& params) {
  const auto rows = niqe_block_features(y, 96);
  constexpr int d = NiqeParams::kFeatures;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  std::vector<int> counts(d, 0);
  for (const auto& r : rows)
    for (int k = 0; k < d; ++k)
      if (!std::isnan(r[k])) {
        mu[k] += r[k];
        ++counts[k];
      }
  for (int k = 0; k < d; ++k) mu[k] = counts[k] ? mu[k] / counts[k] : std::numeric_limits<double>::quiet_NaN();
  std::vector<const std::vector<double>*> clean;
  for (const auto& r : rows)
    if (std::none_of(r.begin(), r.end(), [](double v) { return std::isnan(v); })) clean.push_back(&r);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  if (clean.size() >= 2) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
    for (const auto* r : clean) m += Eigen::Map<const Eigen::VectorXd>(r->data(), d);
    m /= static_cast<double>(clean.size());
    for (const auto* r : clean) {
      const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(r->data(), d) - m;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(clean.size() - 1);
  }
  // a single block has no sample covariance; the pristine model's alone is used
  const Eigen::Map<const Eigen::VectorXd> mu_p(params.mu.data(), d);
  const Eigen::Map<const Eigen::Matrix<double, d, d, Eigen::RowMajor>> cov_p(params.cov.data());
  const Eigen::MatrixXd pooled = (cov_p + cov) / 2;
  if (!pooled.allFinite() || !mu.allFinite()) throw NumericError("niqe: feature statistics are not finite");
  const Eigen::MatrixXd pinv = pooled.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::VectorXd diff = mu_p - mu;
  return std::sqrt(std::max(0.0, diff.dot(pinv * diff)));
}

double niqe(const Image& img, const NiqeParams& params) {
  Plane y = matlab_y255(img);
  for (float& v : y.values) v = std::nearbyint(v);
  return niqe_y255(y, params);
}

NiqeParams fit_niqe_params(const std::vector<Image>& pristine, double sharpness_fraction) {
  MIMICSR_CHECK(!pristine.empty(), "fit_niqe_params: no images");
  std::vector<std::vector<double>> all;
  for (const Image& img : pristine) {
    Plane y = matlab_y255(img);
    for (float& v : y.values) v = std::nearbyint(v);
    std::vector<double> sharp;
    auto rows = features_and_sharpness(y, 96, &sharp);
    const double top = *std::max_element(sharp.begin(), sharp.end());
    for (size_t i = 0; i < rows.size(); ++i)
      if (sharp[i] >= sharpness_fraction * top &&
          std::none_of(rows[i].begin(), rows[i].end(), [](double v) { return std::isnan(v); }))
        all.push_back(std::move(rows[i]));
  }
  constexpr int d = NiqeParams::kFeatures;
  if (all.size() < 2) throw NumericError("fit_niqe_params: fewer than two usable blocks");
  NiqeParams p;
  p.mu.assign(d, 0.0);
  for (const auto& r : all)
    for (int k = 0; k < d; ++k) p.mu[k] += r[k] / static_cast<double>(all.size());
  p.cov.assign(d * d, 0.0);
  for (const auto& r : all)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) p.cov[i * d + j] += (r[i] - p.mu[i]) * (r[j] - p.mu[j]) / static_cast<double>(all.size() - 1);
  return p;
}

double perceptual_index(double niqe, double nrqm) {
  MIMICSR_CHECK(std::isfinite(niqe) && std::isfinite(nrqm), "perceptual_index: inputs must be finite");
  return 0.5 * ((10.0 - nrqm) + niqe);
}

// ---------------------------------------------------------------- NRQM

ExternalNrqm::ExternalNrqm(std::string command) : command_(std::move(command)) {
  MIMICSR_CHECK(!command_.empty(), "ExternalNrqm: empty command");
}

double ExternalNrqm::score(const Image& img) const {
  std::random_device rd;
  const auto path = std::filesystem::temp_directory_path() / ("mimicsr_nrqm_" + std::to_string(rd()) + ".png");
  write_png(path, img);
  const std::string cmd = command_ + " '" + path.string() + "'";
  std::string output;
  int status = -1;
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    char buf[256];
    while (fgets(buf, sizeof buf, pipe)) output += buf;
    status = pclose(pipe);
  }
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (status != 0) throw DataError("NRQM scorer failed (status " + std::to_string(status) + "): " + command_);
  std::istringstream is(output);
  double v = 0;
  if (!(is >> v) || !std::isfinite(v)) throw DataError("NRQM scorer printed no number: '" + output + "'");
  return v;
}

std::unique_ptr<NrqmScorer> make_nrqm_scorer(const Config& cfg) {
  const std::string cmd = cfg.get_string("metrics.nrqm_command");
  if (cmd.empty()) return nullptr;
  return std::make_unique<ExternalNrqm>(cmd);
}

MetricReport evaluate_image(const Image& output, const Image* reference, const MetricOptions& options) {
  MetricReport r;
  try {
    if (reference) {
      r.psnr = psnr(output, *reference, options.border);
      r.ssim = ssim(output, *reference, options.border);
    }
    if (options.niqe) r.niqe = niqe(output, *options.niqe);
    if (options.nrqm) {
      r.nrqm = options.nrqm->score(output);
      if (r.niqe) r.pi = perceptual_index(*r.niqe, *r.nrqm);
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace mimicsr
