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

#include "mimicsr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mimicsr/error.hpp"

namespace mimicsr {
namespace {

using T = Config::Type;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

bool parse_int(const std::string& s, int& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

bool parse_real(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  try {
    size_t used = 0;
    out = std::stod(t, &used);
    return used == t.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool& out) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    out = true;
    return true;
  }
  if (t == "false" || t == "0" || t == "no" || t == "off") {
    out = false;
    return true;
  }
  return false;
}

bool parse_range(const std::string& s, std::pair<double, double>& out) {
  const auto parts = split(s, ',');
  if (parts.size() == 1) {
    double v;
    if (!parse_real(parts[0], v)) return false;
    out = {v, v};
    return true;
  }
  if (parts.size() != 2) return false;
  return parse_real(parts[0], out.first) && parse_real(parts[1], out.second) && out.first <= out.second;
}

bool parse_int_list(const std::string& s, std::vector<int>& out) {
  out.clear();
  for (const auto& p : split(s, ',')) {
    int v;
    if (!parse_int(p, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

bool valid_for(T type, const std::string& value) {
  int i;
  double d;
  bool b;
  std::pair<double, double> r;
  std::vector<int> l;
  switch (type) {
    case T::kInt: return parse_int(value, i);
    case T::kReal: return parse_real(value, d);
    case T::kBool: return parse_bool(value, b);
    case T::kString: return true;
    case T::kRange: return parse_range(value, r);
    case T::kIntList: return parse_int_list(value, l);
  }
  return false;
}

}  // namespace

const std::vector<Config::Key>& Config::schema() {
  static const std::vector<Key> keys = {
      // data
      {"data.scale", T::kInt, "4", "super-resolution factor (2, 3 or 4)"},
      {"data.train_manifest", T::kString, "", "training manifest (JSON lines)"},
      {"data.val_manifest", T::kString, "", "validation manifest (optional)"},
      // model
      {"model.name", T::kString, "ref", "registered SR backbone"},
      {"model.scale", T::kInt, "4", "backbone upscaling factor; must equal data.scale"},
      // flow
      {"flow.backend", T::kString, "classical", "optical flow provider: classical | learned"},
      {"flow.weights", T::kString, "", "weights file for the learned flow backend"},
      {"flow.levels", T::kInt, "3", "pyramid levels of the classical backend"},
      {"flow.warps", T::kInt, "4", "warping passes per pyramid level"},
      {"flow.iterations", T::kInt, "60", "Jacobi iterations per warping pass"},
      {"flow.alpha", T::kReal, "0.3", "smoothness weight of the classical backend"},
      {"flow.presmooth", T::kReal, "0.7", "Gaussian pre-smoothing sigma (LR pixels)"},
      // mimicking module
      {"mimick.feature_width", T::kInt, "32", "transfer/guidance feature width C"},
      {"mimick.dilations", T::kIntList, "1,2,4", "dilations of the parallel encoder branches"},
      {"mimick.guidance_blocks", T::kInt, "4", "3x3 conv blocks in the guidance network"},
      {"mimick.decoder_layers", T::kInt, "3", "1x1 conv layers in the decoder before the projection"},
      {"mimick.gaussian", T::kBool, "true", "inject Gaussian noise"},
      {"mimick.noise_sigma", T::kRange, "0,0.02", "Gaussian noise sigma range, within [0, 0.2]"},
      {"mimick.jpeg", T::kBool, "false", "inject JPEG artifacts"},
      {"mimick.jpeg_quality", T::kRange, "60,95", "JPEG quality range, within [1, 100]"},
      {"mimick.jpeg_mode", T::kString, "soft", "soft | straight_through"},
      // losses
      {"loss.lambda", T::kReal, "0.1", "weight of the color-difference loss"},
      {"loss.epsilon", T::kReal, "0.001", "validity-mask tolerance, in (0, 1)"},
      {"loss.color_scorer", T::kString, "analytic", "analytic | learned"},
      {"loss.color_weights_path", T::kString, "", "weights for the learned color scorer"},
      // training
      {"train.mode", T::kString, "mimick", "mimick (joint training) | baseline (plain L1 on LR-HR)"},
      {"train.optimizer", T::kString, "adam", "optimizer; only adam is supported"},
      {"train.iterations", T::kInt, "200000", "optimization steps"},
      {"train.batch_size", T::kInt, "32", "samples per step"},
      {"train.lr", T::kReal, "0.001", "initial learning rate"},
      {"train.eta_min", T::kReal, "0.000001", "final learning rate of the cosine schedule"},
      {"train.schedule", T::kString, "cosine", "learning-rate schedule; only cosine is supported"},
      {"train.adam_beta1", T::kReal, "0.9", "Adam beta1"},
      {"train.adam_beta2", T::kReal, "0.999", "Adam beta2"},
      {"train.mimick_lr_scale", T::kReal, "1", "multiplier on the mimicking-module learning rate (0 freezes it)"},
      {"train.patch", T::kInt, "128", "training patch size on the HR side"},
      {"train.augment", T::kBool, "true", "random flips and quarter turns"},
      {"train.seed", T::kInt, "0", "root seed of every random draw"},
      {"train.checkpoint_every", T::kInt, "5000", "checkpoint cadence in iterations"},
      {"train.validate_every", T::kInt, "1000", "validation cadence in iterations"},
      {"train.log_every", T::kInt, "1", "training-log cadence in iterations"},
      {"train.max_skip_fraction", T::kReal, "0.01", "abort when more than this fraction of batches is skipped"},
      {"train.verify_routing_every", T::kInt, "0", "check gradient isolation every N steps (0 = never)"},
      // metrics
      {"metrics.niqe_params", T::kString, "", "NIQE pristine-model file (empty = bundled parameters)"},
      {"metrics.nrqm_command", T::kString, "", "external NRQM scorer command; image path is appended"},
      {"metrics.border", T::kInt, "4", "border crop (px) before full-reference metrics"},
      // synthetic misalignment
      {"misalign.translation", T::kRange, "0,0", "translation range in HR pixels (per axis)"},
      {"misalign.rotation", T::kRange, "0,0", "rotation range in degrees"},
      {"misalign.scale_jitter", T::kRange, "0,0", "relative zoom range (0 = none)"},
      {"misalign.color_gain", T::kRange, "1,1", "per-channel multiplicative gain range"},
      {"misalign.brightness_offset", T::kRange, "0,0", "additive brightness range"},
      {"misalign.gamma", T::kRange, "1,1", "gamma range"},
      {"misalign.blur_sigma", T::kRange, "0,0", "Gaussian blur sigma range in HR pixels"},
      {"misalign.noise_sigma", T::kRange, "0,0", "Gaussian noise sigma range (LR)"},
      {"misalign.jpeg", T::kBool, "false", "apply JPEG compression to the LR"},
      {"misalign.jpeg_quality", T::kRange, "90,90", "JPEG quality range, within [1, 100]"},
      {"misalign.seed", T::kInt, "0", "seed of the misalignment draws"},
  };
  return keys;
}

const Config::Key* Config::find_key(const std::string& name) {
  for (const auto& k : schema())
    if (k.name == name) return &k;
  return nullptr;
}

std::string Config::type_name(Type t) {
  switch (t) {
    case T::kInt: return "int";
    case T::kReal: return "real";
    case T::kBool: return "bool";
    case T::kString: return "string";
    case T::kRange: return "range";
    case T::kIntList: return "int-list";
  }
  return "?";
}

Config::Config() {
  for (const auto& k : schema()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw InvalidArgument("unknown config key '" + key + "'");
  const std::string v = trim(value);
  if (!valid_for(k->type, v)) {
    throw InvalidArgument("config key '" + key + "' expects " + type_name(k->type) + ", got '" + v + "'");
  }
  values_[key] = v;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  load_text(text.str(), path.string());
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      set(key, line.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("unknown config key '" + key + "'");
  return it->second;
}

int Config::get_int(const std::string& key) const {
  int v;
  if (!parse_int(raw(key), v)) throw InvalidArgument("config key '" + key + "' is not an int");
  return v;
}

double Config::get_real(const std::string& key) const {
  double v;
  if (!parse_real(raw(key), v)) throw InvalidArgument("config key '" + key + "' is not a real");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  bool v;
  if (!parse_bool(raw(key), v)) throw InvalidArgument("config key '" + key + "' is not a bool");
  return v;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::pair<double, double> Config::get_range(const std::string& key) const {
  std::pair<double, double> r;
  if (!parse_range(raw(key), r)) throw InvalidArgument("config key '" + key + "' is not a range lo,hi");
  return r;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> v;
  if (!parse_int_list(raw(key), v)) throw InvalidArgument("config key '" + key + "' is not an int list");
  return v;
}

std::string Config::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

}  // namespace mimicsr
