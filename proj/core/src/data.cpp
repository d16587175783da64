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

#include "mimicsr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "mimicsr/config.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/filter.hpp"
#include "mimicsr/jpeg_codec.hpp"
#include "mimicsr/parallel.hpp"
#include "mimicsr/resample.hpp"

namespace mimicsr {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- samples

void check_sample(const PairedSample& s, int scale) {
  if (s.hr.height() != s.lr.height() * scale || s.hr.width() != s.lr.width() * scale) {
    throw InvalidArgument("sample: HR " + std::to_string(s.hr.height()) + "x" + std::to_string(s.hr.width()) +
                          " is not " + std::to_string(scale) + "x LR " + std::to_string(s.lr.height()) + "x" +
                          std::to_string(s.lr.width()));
  }
  require_same_shape(s.hr_down, s.lr, "sample hr_down");
  if (s.aligned_lr_truth) require_same_shape(*s.aligned_lr_truth, s.lr, "sample aligned_lr_truth");
}

PairedSample make_sample(Image lr, Image hr, int scale, std::optional<Image> truth) {
  PairedSample s;
  s.lr = std::move(lr);
  s.hr = std::move(hr);
  s.aligned_lr_truth = std::move(truth);
  if (s.hr.height() != s.lr.height() * scale || s.hr.width() != s.lr.width() * scale) {
    check_sample(s, scale);  // throws with the sizes
  }
  s.hr_down = downscale_hr(s.hr, scale);
  check_sample(s, scale);
  return s;
}

PairedSample crop_at(const PairedSample& pair, int patch, int lr_y, int lr_x, int dihedral) {
  const int scale = pair.scale();
  MIMICSR_CHECK(scale >= 1, "crop_at: empty sample");
  if (patch <= 0 || patch > pair.lr.height() || patch > pair.lr.width()) {
    throw InvalidArgument("crop: patch " + std::to_string(patch) + " larger than LR image " +
                          std::to_string(pair.lr.height()) + "x" + std::to_string(pair.lr.width()));
  }
  PairedSample out;
  out.lr = crop(pair.lr, lr_y, lr_x, patch, patch);
  out.hr = crop(pair.hr, lr_y * scale, lr_x * scale, patch * scale, patch * scale);
  out.hr_down = downscale_hr(out.hr, scale);
  if (pair.aligned_lr_truth) out.aligned_lr_truth = crop(*pair.aligned_lr_truth, lr_y, lr_x, patch, patch);
  if (dihedral != 0) {
    out.lr = apply_dihedral(out.lr, dihedral);
    out.hr = apply_dihedral(out.hr, dihedral);
    out.hr_down = apply_dihedral(out.hr_down, dihedral);
    if (out.aligned_lr_truth) out.aligned_lr_truth = apply_dihedral(*out.aligned_lr_truth, dihedral);
  }
  out.meta = pair.meta;
  out.meta.crop_y = lr_y;
  out.meta.crop_x = lr_x;
  out.meta.dihedral = dihedral;
  return out;
}

PairedSample crop_augment(const PairedSample& pair, int patch, Rng& rng, bool augment) {
  if (patch <= 0 || patch > pair.lr.height() || patch > pair.lr.width()) {
    throw InvalidArgument("crop_augment: patch " + std::to_string(patch) + " larger than LR image " +
                          std::to_string(pair.lr.height()) + "x" + std::to_string(pair.lr.width()));
  }
  const int y = uniform_int(rng, 0, pair.lr.height() - patch);
  const int x = uniform_int(rng, 0, pair.lr.width() - patch);
  const int k = augment ? uniform_int(rng, 0, 7) : 0;
  return crop_at(pair, patch, y, x, k);
}

// ---------------------------------------------------------------- misalignment

void MisalignSpec::validate() const {
  auto ordered = [](const Range& r, const char* name) {
    if (!(r.first <= r.second)) throw InvalidArgument(std::string("MisalignSpec: ") + name + " range not ordered");
  };
  ordered(translation, "translation");
  ordered(rotation, "rotation");
  ordered(scale_jitter, "scale_jitter");
  ordered(color_gain, "color_gain");
  ordered(brightness_offset, "brightness_offset");
  ordered(gamma, "gamma");
  ordered(blur_sigma, "blur_sigma");
  ordered(noise_sigma, "noise_sigma");
  if (jpeg_quality.first > jpeg_quality.second) throw InvalidArgument("MisalignSpec: jpeg_quality range not ordered");
  if (jpeg_quality.first < 1 || jpeg_quality.second > 100) {
    throw InvalidArgument("MisalignSpec: jpeg_quality must lie in [1, 100]");
  }
  if (gamma.first <= 0) throw InvalidArgument("MisalignSpec: gamma must be positive");
  if (blur_sigma.first < 0 || noise_sigma.first < 0) throw InvalidArgument("MisalignSpec: sigmas must be >= 0");
  if (scale_jitter.first <= -1) throw InvalidArgument("MisalignSpec: scale_jitter must be > -1");
}

MisalignSpec MisalignSpec::from_config(const Config& cfg) {
  MisalignSpec s;
  s.translation = cfg.get_range("misalign.translation");
  s.rotation = cfg.get_range("misalign.rotation");
  s.scale_jitter = cfg.get_range("misalign.scale_jitter");
  s.color_gain = cfg.get_range("misalign.color_gain");
  s.brightness_offset = cfg.get_range("misalign.brightness_offset");
  s.gamma = cfg.get_range("misalign.gamma");
  s.blur_sigma = cfg.get_range("misalign.blur_sigma");
  s.noise_sigma = cfg.get_range("misalign.noise_sigma");
  s.jpeg = cfg.get_bool("misalign.jpeg");
  const auto q = cfg.get_range("misalign.jpeg_quality");
  if (q.first != std::floor(q.first) || q.second != std::floor(q.second)) {
    throw InvalidArgument("misalign.jpeg_quality must be integers");
  }
  s.jpeg_quality = {static_cast<int>(q.first), static_cast<int>(q.second)};
  s.rng_seed = static_cast<std::uint64_t>(cfg.get_int("misalign.seed"));
  s.validate();
  return s;
}

nlohmann::json MisalignDraw::to_json() const {
  return {{"tx", tx},
          {"ty", ty},
          {"rotation_deg", rotation_deg},
          {"zoom", zoom},
          {"gain", {gain[0], gain[1], gain[2]}},
          {"offset", offset},
          {"gamma", gamma},
          {"blur_sigma", blur_sigma},
          {"noise_sigma", noise_sigma},
          {"jpeg_quality", jpeg_quality},
          {"noise_seed", noise_seed}};
}

MisalignDraw draw_misalignment(const MisalignSpec& spec, Rng& rng) {
  spec.validate();
  MisalignDraw d;
  d.tx = uniform(rng, spec.translation.first, spec.translation.second);
  d.ty = uniform(rng, spec.translation.first, spec.translation.second);
  d.rotation_deg = uniform(rng, spec.rotation.first, spec.rotation.second);
  d.zoom = 1.0 + uniform(rng, spec.scale_jitter.first, spec.scale_jitter.second);
  for (double& g : d.gain) g = uniform(rng, spec.color_gain.first, spec.color_gain.second);
  d.offset = uniform(rng, spec.brightness_offset.first, spec.brightness_offset.second);
  d.gamma = uniform(rng, spec.gamma.first, spec.gamma.second);
  d.blur_sigma = uniform(rng, spec.blur_sigma.first, spec.blur_sigma.second);
  d.noise_sigma = uniform(rng, spec.noise_sigma.first, spec.noise_sigma.second);
  d.jpeg_quality = spec.jpeg ? uniform_int(rng, spec.jpeg_quality.first, spec.jpeg_quality.second) : 0;
  d.noise_seed = rng();
  return d;
}

namespace {

// Source position sampled for output pixel (x, y): q = A^-1 (p - c - t) + c.
struct InverseAffine {
  double a00, a01, a10, a11, cx, cy, tx, ty;

  InverseAffine(const MisalignDraw& d, int h, int w) {
    const double th = d.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th) / d.zoom, s = std::sin(th) / d.zoom;
    // inverse of zoom * [[cos, -sin], [sin, cos]]
    a00 = c;
    a01 = s;
    a10 = -s;
    a11 = c;
    cx = (w - 1) / 2.0;
    cy = (h - 1) / 2.0;
    tx = d.tx;
    ty = d.ty;
  }

  void map(double x, double y, double& qx, double& qy) const {
    const double px = x - cx - tx, py = y - cy - ty;
    qx = a00 * px + a01 * py + cx;
    qy = a10 * px + a11 * py + cy;
  }
};

int margin_for(double displacement, int scale) {
  if (displacement <= 0.0) return 0;
  const int m = static_cast<int>(std::ceil(displacement)) + 1;
  return (m + scale - 1) / scale * scale;
}

}  // namespace

double max_displacement(const MisalignDraw& d, int h, int w) {
  const InverseAffine inv(d, h, w);
  double best = 0.0;
  for (double y : {0.0, static_cast<double>(h - 1)})
    for (double x : {0.0, static_cast<double>(w - 1)}) {
      double qx, qy;
      inv.map(x, y, qx, qy);
      best = std::max(best, std::hypot(qx - x, qy - y));
    }
  return best;
}

Image apply_color_transform(const Image& img, const MisalignDraw& d) {
  Image out = img;
  for (int c = 0; c < Image::kChannels; ++c) {
    const bool identity = d.gain[c] == 1.0 && d.offset == 0.0 && d.gamma == 1.0;
    if (identity) continue;
    for (float& v : out.channel(c)) {
      const double g = d.gamma == 1.0 ? v : std::pow(std::max(0.f, v), d.gamma);
      v = static_cast<float>(std::clamp(d.gain[c] * g + d.offset, 0.0, 1.0));
    }
  }
  return out;
}

Image apply_affine(const Image& img, const MisalignDraw& d) {
  const int h = img.height(), w = img.width();
  if (d.tx == 0 && d.ty == 0 && d.rotation_deg == 0 && d.zoom == 1) return img;
  const InverseAffine inv(d, h, w);
  Image out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double qx, qy;
      inv.map(x, y, qx, qy);
      const double fx0 = std::floor(qx), fy0 = std::floor(qy);
      const float fx = static_cast<float>(qx - fx0), fy = static_cast<float>(qy - fy0);
      const int x0 = reflect_mirror(static_cast<int>(fx0), w), x1 = reflect_mirror(static_cast<int>(fx0) + 1, w);
      const int y0 = reflect_mirror(static_cast<int>(fy0), h), y1 = reflect_mirror(static_cast<int>(fy0) + 1, h);
      for (int c = 0; c < Image::kChannels; ++c) {
        float v = img.at(c, y0, x0) * (1.f - fx) * (1.f - fy);
        if (fx != 0.f) v += img.at(c, y0, x1) * fx * (1.f - fy);
        if (fy != 0.f) v += img.at(c, y1, x0) * (1.f - fx) * fy;
        if (fx != 0.f && fy != 0.f) v += img.at(c, y1, x1) * fx * fy;
        out.at(c, y, x) = v;
      }
    }
  return out;
}

Image degrade(const Image& hr, const MisalignDraw& d, int scale) {
  Image img = d.blur_sigma > 0 ? gaussian_blur(hr, d.blur_sigma) : hr;
  img = downscale_hr(img, scale);
  if (d.noise_sigma > 0) {
    Rng noise(d.noise_seed);
    std::normal_distribution<float> dist(0.f, static_cast<float>(d.noise_sigma));
    for (float& v : img.values()) v += dist(noise);
    img = clamp01(std::move(img));
  }
  if (d.jpeg_quality > 0) img = jpeg_roundtrip(img, d.jpeg_quality);
  return img;
}

PairedSample synth_misalign(const Image& hr_in, const MisalignDraw& d, int scale) {
  MIMICSR_CHECK(scale >= 1, "synth_misalign: scale must be >= 1");
  const int h = hr_in.height() / scale * scale, w = hr_in.width() / scale * scale;
  const Image hr = (h == hr_in.height() && w == hr_in.width()) ? hr_in : crop(hr_in, 0, 0, h, w);
  const int margin = margin_for(max_displacement(d, h, w), scale);
  const int out_h = h - 2 * margin, out_w = w - 2 * margin;
  if (out_h < 4 * scale || out_w < 4 * scale) {
    throw InvalidArgument("synth_misalign: warp displacement needs a " + std::to_string(margin) +
                          " px margin, leaving no usable interior in a " + std::to_string(h) + "x" +
                          std::to_string(w) + " image");
  }
  const Image moved = apply_affine(apply_color_transform(hr, d), d);
  const Image lr_full = degrade(moved, d, scale);
  const Image truth_full = degrade(hr, d, scale);
  const int lm = margin / scale;
  PairedSample s = make_sample(crop(lr_full, lm, lm, out_h / scale, out_w / scale),
                               crop(hr, margin, margin, out_h, out_w), scale,
                               crop(truth_full, lm, lm, out_h / scale, out_w / scale));
  s.meta.transform = d.to_json();
  s.meta.transform["margin_hr"] = margin;
  return s;
}

PairedSample synth_misalign(const Image& hr, const MisalignSpec& spec, int scale, Rng& rng) {
  return synth_misalign(hr, draw_misalignment(spec, rng), scale);
}

// ---------------------------------------------------------------- manifests

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + s + "' (train|val|test)");
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!header) {
      if (!j.contains("scale")) throw DataError(path.string() + ": first line must carry \"scale\"");
      m.scale = j.at("scale").get<int>();
      m.split = parse_split(j.value("split", "train"));
      if (m.scale < 2 || m.scale > 4) throw DataError(path.string() + ": scale must be 2, 3 or 4");
      header = true;
      continue;
    }
    ManifestEntry e;
    try {
      e.lr = j.at("lr").get<std::string>();
      e.hr = j.at("hr").get<std::string>();
      if (j.contains("truth")) e.truth = j.at("truth").get<std::string>();
      e.meta = j.value("meta", nlohmann::json::object());
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    m.entries.push_back(std::move(e));
  }
  if (!header) throw DataError(path.string() + ": empty manifest");
  return m;
}

void DatasetManifest::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << nlohmann::json{{"scale", scale}, {"split", to_string(split)}}.dump() << "\n";
  for (const auto& e : entries) {
    nlohmann::json j{{"lr", e.lr.string()}, {"hr", e.hr.string()}};
    if (e.truth) j["truth"] = e.truth->string();
    if (!e.meta.empty()) j["meta"] = e.meta;
    out << j.dump() << "\n";
  }
}

fs::path DatasetManifest::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

void DatasetManifest::check_paths() const {
  for (const auto& e : entries) {
    for (const fs::path* p : {&e.lr, &e.hr}) {
      if (!fs::exists(resolve(*p))) throw DataError("manifest entry not found: " + resolve(*p).string());
    }
    if (e.truth && !fs::exists(resolve(*e.truth))) {
      throw DataError("manifest entry not found: " + resolve(*e.truth).string());
    }
  }
}

std::vector<PairedSample> load_samples(const DatasetManifest& manifest) {
  manifest.check_paths();
  std::vector<PairedSample> samples(manifest.entries.size());
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    const auto& e = manifest.entries[i];
    std::optional<Image> truth;
    if (e.truth) truth = read_png(manifest.resolve(*e.truth));
    Image lr = read_png(manifest.resolve(e.lr));
    Image hr = read_png(manifest.resolve(e.hr));
    if (hr.height() != lr.height() * manifest.scale || hr.width() != lr.width() * manifest.scale) {
      throw DataError("entry " + e.lr.string() + ": HR/LR sizes do not match manifest scale " +
                      std::to_string(manifest.scale));
    }
    samples[i] = make_sample(std::move(lr), std::move(hr), manifest.scale, std::move(truth));
    samples[i].meta.source_id = e.hr.stem().string();
  });
  return samples;
}

DatasetManifest generate_synthetic(const fs::path& src_dir, const fs::path& out_dir, const MisalignSpec& spec,
                                   int scale, std::uint64_t seed, Split split, const SynthCrops& crops) {
  spec.validate();
  if (scale < 2 || scale > 4) throw InvalidArgument("gen-synth: scale must be 2, 3 or 4");
  if (crops.count < 0 || (crops.count > 0 && crops.size < 8 * scale)) {
    throw InvalidArgument("gen-synth: crop size must be at least " + std::to_string(8 * scale) + " HR pixels");
  }
  if (!fs::is_directory(src_dir)) throw DataError("source directory not found: " + src_dir.string());
  std::vector<fs::path> sources;
  for (const auto& entry : fs::directory_iterator(src_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") sources.push_back(entry.path());
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw DataError("no PNG files in " + src_dir.string());

  std::vector<Image> images;
  if (crops.count > 0) {
    for (const auto& p : sources) {
      images.push_back(read_png(p));
      if (images.back().height() < crops.size || images.back().width() < crops.size) {
        throw DataError(p.string() + " is smaller than the " + std::to_string(crops.size) + " px crop");
      }
    }
  }
  const int n = crops.count > 0 ? crops.count : static_cast<int>(sources.size());

  for (const char* sub : {"lr", "hr", "truth"}) fs::create_directories(out_dir / sub);
  DatasetManifest manifest;
  manifest.scale = scale;
  manifest.split = split;
  manifest.base_dir = out_dir;
  manifest.entries.resize(n);
  parallel_for(n, [&](int i) {
    Rng rng = make_rng(seed, {spec.rng_seed, static_cast<std::uint64_t>(i)});
    const size_t src = crops.count > 0 ? static_cast<size_t>(i) % sources.size() : static_cast<size_t>(i);
    std::string name = sources[src].stem().string();
    nlohmann::json meta = {{"source", name}};
    Image hr;
    if (crops.count > 0) {
      const Image& full = images[src];
      Rng pos = make_rng(seed, {spec.rng_seed, static_cast<std::uint64_t>(i), 1});
      const int y = uniform_int(pos, 0, full.height() - crops.size);
      const int x = uniform_int(pos, 0, full.width() - crops.size);
      hr = crop(full, y, x, crops.size, crops.size);
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%04d", i);
      name += suffix;
      meta["crop"] = {{"y", y}, {"x", x}, {"size", crops.size}};
    } else {
      hr = read_png(sources[src]);
    }
    const PairedSample s = synth_misalign(hr, spec, scale, rng);
    name += ".png";
    write_png(out_dir / "lr" / name, s.lr);
    write_png(out_dir / "hr" / name, s.hr);
    write_png(out_dir / "truth" / name, *s.aligned_lr_truth);
    ManifestEntry& e = manifest.entries[i];
    e.lr = fs::path("lr") / name;
    e.hr = fs::path("hr") / name;
    e.truth = fs::path("truth") / name;
    meta["transform"] = s.meta.transform;
    e.meta = std::move(meta);
  });
  manifest.save(out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace mimicsr
