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

#include "mimicsr/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mimicsr/error.hpp"
#include "mimicsr/losses.hpp"
#include "mimicsr/parallel.hpp"
#include "mimicsr/trainer.hpp"

namespace mimicsr {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

double masked_mean(const Plane& err, const Plane& mask) {
  double s = 0;
  size_t n = 0;
  for (size_t i = 0; i < err.size(); ++i)
    if (mask.values[i] > 0) {
      s += err.values[i];
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- align-compare

double reduction_percent(double e_ref, double e_candidate) {
  MIMICSR_CHECK(e_ref > 0, "reduction_percent: reference error must be > 0");
  return 100.0 * (e_ref - e_candidate) / e_ref;
}

Plane error_map(const Image& a, const Image& b) {
  require_same_shape(a, b, "error_map");
  Plane p(a.height(), a.width());
  for (int c = 0; c < 3; ++c) {
    auto ca = a.channel(c), cb = b.channel(c);
    for (size_t i = 0; i < p.size(); ++i) p.values[i] += std::abs(ca[i] - cb[i]) / 3.f;
  }
  return p;
}

Image heatmap(const Plane& err, double max_value) {
  MIMICSR_CHECK(max_value > 0, "heatmap: max_value must be > 0");
  // control points of an inferno-like ramp
  static constexpr std::array<std::array<float, 3>, 5> kRamp = {{{0.00f, 0.00f, 0.02f},
                                                                 {0.34f, 0.06f, 0.43f},
                                                                 {0.73f, 0.21f, 0.33f},
                                                                 {0.98f, 0.55f, 0.04f},
                                                                 {0.99f, 1.00f, 0.64f}}};
  Image out(err.height, err.width);
  for (int y = 0; y < err.height; ++y)
    for (int x = 0; x < err.width; ++x) {
      const float t = std::clamp(static_cast<float>(err(y, x) / max_value), 0.f, 1.f) * (kRamp.size() - 1);
      const int k = std::min(static_cast<int>(t), static_cast<int>(kRamp.size()) - 2);
      const float f = t - k;
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = kRamp[k][c] * (1 - f) + kRamp[k + 1][c] * f;
    }
  return out;
}

nlohmann::json AlignCompareResult::to_json() const {
  nlohmann::json j;
  j["reference"] = reference == AlignReference::kTruth ? "truth" : "flow";
  j["images"] = images.size();
  j["mean_error"] = {{"hr_down", mean_hr_down}, {"mim", mean_mim}};
  if (mean_flow_warped) j["mean_error"]["flow_warped"] = *mean_flow_warped;
  j["reduction_percent"] = {{"vs_hr_down", reduction_vs_hr_down}};
  if (reduction_vs_flow_warped) j["reduction_percent"]["vs_flow_warped"] = *reduction_vs_flow_warped;
  return j;
}

AlignCompareResult align_compare(const MimickModule& mimick, const std::vector<PairedSample>& samples,
                                 const FlowBackend& flow, const AlignCompareOptions& options) {
  MIMICSR_CHECK(!samples.empty(), "align_compare: no samples");
  AlignCompareResult res;
  res.reference = options.reference;
  const bool truth = options.reference == AlignReference::kTruth;
  for (const auto& s : samples) {
    if (truth && !s.aligned_lr_truth) {
      throw DataError("align_compare: sample " + s.meta.source_id + " has no aligned LR truth");
    }
  }
  res.images.resize(samples.size());
  std::vector<std::array<Plane, 3>> maps(samples.size());
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    const PairedSample& s = samples[i];
    const DegradationTarget target = degradation_target(s.lr, s.hr_down, flow, options.epsilon);
    const Image mim = mimick.mimick(s.lr, s.hr_down, nullptr);
    const Image& ref = truth ? *s.aligned_lr_truth : target.lr_warped;
    AlignImageStats& st = res.images[i];
    st.id = s.meta.source_id.empty() ? "image" + std::to_string(i) : s.meta.source_id;
    st.pixels = target.valid_pixels;
    maps[i][0] = error_map(s.hr_down, ref);
    maps[i][2] = error_map(mim, ref);
    st.err_hr_down = masked_mean(maps[i][0], target.mask);
    st.err_mim = masked_mean(maps[i][2], target.mask);
    if (truth) {
      maps[i][1] = error_map(target.lr_warped, ref);
      st.err_flow_warped = masked_mean(maps[i][1], target.mask);
    }
  });
  double sh = 0, sm = 0, sf = 0;
  for (const auto& st : res.images) {
    sh += st.err_hr_down;
    sm += st.err_mim;
    if (st.err_flow_warped) sf += *st.err_flow_warped;
  }
  const double n = static_cast<double>(res.images.size());
  res.mean_hr_down = sh / n;
  res.mean_mim = sm / n;
  res.reduction_vs_hr_down = reduction_percent(res.mean_hr_down, res.mean_mim);
  if (truth) {
    res.mean_flow_warped = sf / n;
    if (*res.mean_flow_warped > 0) res.reduction_vs_flow_warped = reduction_percent(*res.mean_flow_warped, res.mean_mim);
  }

  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    std::ostringstream csv;
    csv << "id,valid_pixels,err_hr_down,err_flow_warped,err_mim,reduction_vs_hr_down,reduction_vs_flow_warped\n";
    for (size_t i = 0; i < res.images.size(); ++i) {
      const auto& st = res.images[i];
      csv << st.id << "," << st.pixels << "," << fmt(st.err_hr_down, 8) << ","
          << (st.err_flow_warped ? fmt(*st.err_flow_warped, 8) : "") << "," << fmt(st.err_mim, 8) << ","
          << (st.err_hr_down > 0 ? fmt(reduction_percent(st.err_hr_down, st.err_mim), 4) : "") << ","
          << (st.err_flow_warped && *st.err_flow_warped > 0
                  ? fmt(reduction_percent(*st.err_flow_warped, st.err_mim), 4)
                  : "")
          << "\n";
      write_png(*options.out_dir / (st.id + "_hr_down.png"), heatmap(maps[i][0], options.heatmap_max));
      if (truth) write_png(*options.out_dir / (st.id + "_flow.png"), heatmap(maps[i][1], options.heatmap_max));
      write_png(*options.out_dir / (st.id + "_mim.png"), heatmap(maps[i][2], options.heatmap_max));
    }
    csv << "mean,," << fmt(res.mean_hr_down, 8) << "," << (res.mean_flow_warped ? fmt(*res.mean_flow_warped, 8) : "")
        << "," << fmt(res.mean_mim, 8) << "," << fmt(res.reduction_vs_hr_down, 4) << ","
        << (res.reduction_vs_flow_warped ? fmt(*res.reduction_vs_flow_warped, 4) : "") << "\n";
    write_text(*options.out_dir / "align_compare.csv", csv.str());
    write_text(*options.out_dir / "align_compare.json", res.to_json().dump(2) + "\n");
  }
  return res;
}

// ---------------------------------------------------------------- eval

namespace {

void accumulate(std::optional<double>& sum, const std::optional<double>& v) {
  if (v) sum = sum.value_or(0.0) + *v;
}

void finish_mean(EvalTable& t) {
  MetricReport sum;
  std::array<int, 5> counts{};
  for (const auto& r : t.rows) {
    if (!r.report.error.empty()) ++t.failed;
    const MetricReport& m = r.report;
    accumulate(sum.psnr, m.psnr);
    accumulate(sum.ssim, m.ssim);
    accumulate(sum.niqe, m.niqe);
    accumulate(sum.nrqm, m.nrqm);
    accumulate(sum.pi, m.pi);
    counts[0] += m.psnr.has_value();
    counts[1] += m.ssim.has_value();
    counts[2] += m.niqe.has_value();
    counts[3] += m.nrqm.has_value();
    counts[4] += m.pi.has_value();
  }
  auto div = [](std::optional<double>& v, int n) {
    if (v && n > 0) *v /= n;
  };
  div(sum.psnr, counts[0]);
  div(sum.ssim, counts[1]);
  div(sum.niqe, counts[2]);
  div(sum.nrqm, counts[3]);
  div(sum.pi, counts[4]);
  t.mean = sum;
}

std::string opt_field(const std::optional<double>& v) { return v ? fmt(*v, 6) : ""; }

nlohmann::json report_json(const MetricReport& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.psnr) j["psnr"] = *r.psnr;
  if (r.ssim) j["ssim"] = *r.ssim;
  if (r.niqe) j["niqe"] = *r.niqe;
  if (r.nrqm) j["nrqm"] = *r.nrqm;
  if (r.pi) j["pi"] = *r.pi;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string EvalTable::to_csv() const {
  std::ostringstream out;
  out << "id,psnr,ssim,niqe,nrqm,pi,error\n";
  for (const auto& r : rows) {
    const MetricReport& m = r.report;
    out << csv_escape(r.id) << "," << opt_field(m.psnr) << "," << opt_field(m.ssim) << "," << opt_field(m.niqe) << ","
        << opt_field(m.nrqm) << "," << opt_field(m.pi) << "," << csv_escape(m.error) << "\n";
  }
  return out.str();
}

nlohmann::json EvalTable::to_json() const {
  nlohmann::json j;
  j["count"] = rows.size();
  j["failed"] = failed;
  j["mean"] = report_json(mean);
  j["images"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e = report_json(r.report);
    e["id"] = r.id;
    j["images"].push_back(e);
  }
  return j;
}

void EvalTable::write(const fs::path& csv, const fs::path& json) const {
  write_text(csv, to_csv());
  write_text(json, to_json().dump(2) + "\n");
}

EvalTable eval_dataset(const SRModel& model, const std::vector<PairedSample>& samples, const MetricOptions& metrics,
                       EvalInput input) {
  MIMICSR_CHECK(!samples.empty(), "eval: no samples");
  for (const auto& s : samples) {
    if (s.scale() != model.scale()) {
      throw DataError("eval: sample " + s.meta.source_id + " is x" + std::to_string(s.scale()) + " but the model is x" +
                      std::to_string(model.scale()));
    }
    if (input == EvalInput::kTruth && !s.aligned_lr_truth) {
      throw DataError("eval: sample " + s.meta.source_id + " has no aligned LR truth");
    }
  }
  EvalTable t;
  t.rows.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    const PairedSample& s = samples[i];
    const bool use_truth = input != EvalInput::kLr && s.aligned_lr_truth.has_value();
    const Image out = infer(model, use_truth ? *s.aligned_lr_truth : s.lr);
    t.rows[i].id = s.meta.source_id.empty() ? "image" + std::to_string(i) : s.meta.source_id;
    t.rows[i].report = evaluate_image(out, &s.hr, metrics);
  });
  finish_mean(t);
  return t;
}

EvalTable eval_images(const SRModel& model, const std::vector<std::pair<std::string, Image>>& lr_images,
                      const MetricOptions& metrics) {
  MIMICSR_CHECK(!lr_images.empty(), "eval: no images");
  EvalTable t;
  t.rows.resize(lr_images.size());
  parallel_for(static_cast<int>(lr_images.size()), [&](int i) {
    t.rows[i].id = lr_images[i].first;
    t.rows[i].report = evaluate_image(infer(model, lr_images[i].second), nullptr, metrics);
  });
  finish_mean(t);
  return t;
}

// ---------------------------------------------------------------- plot

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr double kW = 720, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e5)) {
    std::snprintf(buf, sizeof buf, "%.2g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", v);
  }
  return buf;
}

std::string svg_header(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
    << " " << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";
  return o.str();
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& series,
                           bool log_y) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  size_t points = 0;
  for (const auto& s : series) {
    MIMICSR_CHECK(s.x.size() == s.y.size(), "svg_line_chart: x/y length mismatch in " + s.name);
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0)) continue;
      const double y = log_y ? std::log10(s.y[i]) : s.y[i];
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      ++points;
    }
  }
  if (points == 0) throw DataError("plot '" + title + "': no finite data points");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1 - (y - y0) / (y1 - y0)) * ph; };
  std::ostringstream o;
  o << svg_header(title);
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(xv)
      << "</text>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << tick_label(log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    o << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
    << "</text>\n";
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" data-series=\""
      << xml_escape(s.name) << "\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0)) continue;
      o << fmt(px(s.x[i]), 2) << "," << fmt(py(log_y ? std::log10(s.y[i]) : s.y[i]), 2) << " ";
    }
    o << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(si);
    o << "<line x1=\"" << kW - kRight + 12 << "\" x2=\"" << kW - kRight + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<Series>& groups) {
  MIMICSR_CHECK(!labels.empty() && !groups.empty(), "svg_bar_chart: nothing to draw");
  double lo = 0, hi = 0;
  for (const auto& g : groups) {
    MIMICSR_CHECK(g.y.size() == labels.size(), "svg_bar_chart: group " + g.name + " has the wrong length");
    for (double v : g.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (hi == lo) hi = lo + 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto py = [&](double y) { return kTop + (1 - (y - lo) / (hi - lo)) * ph; };
  const double slot = pw / static_cast<double>(labels.size());
  const double bar = slot * 0.8 / static_cast<double>(groups.size());
  std::ostringstream o;
  o << svg_header(title);
  o << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
    << "\" stroke=\"#444\"/>\n";
  for (size_t li = 0; li < labels.size(); ++li) {
    const double sx = kLeft + slot * static_cast<double>(li) + slot * 0.1;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const double v = groups[gi].y[li];
      if (!std::isfinite(v)) continue;
      const double top = std::min(py(v), py(0)), height = std::abs(py(v) - py(0));
      o << "<rect x=\"" << fmt(sx + bar * static_cast<double>(gi), 2) << "\" y=\"" << fmt(top, 2) << "\" width=\""
        << fmt(bar, 2) << "\" height=\"" << fmt(height, 2) << "\" fill=\"" << kPalette[gi % std::size(kPalette)]
        << "\"><title>" << xml_escape(groups[gi].name + " " + labels[li] + " " + tick_label(v)) << "</title></rect>\n";
      o << "<text x=\"" << fmt(sx + bar * (static_cast<double>(gi) + 0.5), 2) << "\" y=\"" << fmt(top - 4, 2)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(v) << "</text>\n";
    }
    o << "<text x=\"" << fmt(sx + slot * 0.4, 2) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << xml_escape(labels[li]) << "</text>\n";
  }
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const double ly = kTop + 14 + 18 * static_cast<double>(gi);
    o << "<rect x=\"" << kW - kRight + 12 << "\" y=\"" << ly - 6 << "\" width=\"14\" height=\"10\" fill=\""
      << kPalette[gi % std::size(kPalette)] << "\"/>\n";
    o << "<text x=\"" << kW - kRight + 32 << "\" y=\"" << ly + 4 << "\">" << xml_escape(groups[gi].name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

TrainLog TrainLog::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open training log " + path.string());
  TrainLog log;
  std::string line;
  int lineno = 0;
  size_t records = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.value("type", "step");
      const double it = j.at("iter").get<double>();
      if (type == "validation") {
        log.val_psnr.x.push_back(it);
        log.val_psnr.y.push_back(j.at("val_psnr").get<double>());
      } else {
        for (auto* s : {&log.l_res, &log.l_deg, &log.l_cd, &log.l_total, &log.lr_sr, &log.lr_mimick}) {
          s->x.push_back(it);
          s->y.push_back(j.at(s->name).get<double>());
        }
      }
      ++records;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (records == 0) throw DataError(path.string() + ": empty training log");
  return log;
}

Series lr_schedule_series(const TrainConfig& cfg, int points) {
  MIMICSR_CHECK(points >= 2, "lr_schedule_series: need at least 2 points");
  Series s{"lr_at (cosine)", {}, {}};
  const std::int64_t total = cfg.iterations;
  std::int64_t prev = -1;
  for (int k = 0; k < points; ++k) {
    const std::int64_t it = total * k / (points - 1);
    if (it == prev) continue;
    prev = it;
    s.x.push_back(static_cast<double>(it));
    s.y.push_back(lr_at(it, cfg));
  }
  return s;
}

std::vector<fs::path> plot_train_log(const fs::path& log_path, const fs::path& out_dir, const TrainConfig* schedule) {
  const TrainLog log = TrainLog::load(log_path);
  std::vector<fs::path> written;
  if (log.l_res.x.empty()) throw DataError(log_path.string() + ": no step records");
  const bool has_mimick = std::any_of(log.l_deg.y.begin(), log.l_deg.y.end(), [](double v) { return v != 0; });
  std::vector<Series> losses{log.l_total, log.l_res};
  if (has_mimick) {
    losses.push_back(log.l_deg);
    losses.push_back(log.l_cd);
  }
  write_text(out_dir / "loss_curves.svg", svg_line_chart("Training losses", "iteration", losses, true));
  written.push_back(out_dir / "loss_curves.svg");
  // step n runs with lr_at(n - 1)
  auto applied_at = [](Series s) {
    for (double& x : s.x) x -= 1;
    return s;
  };
  std::vector<Series> lrs;
  if (schedule) lrs.push_back(lr_schedule_series(*schedule));
  lrs.push_back(applied_at(log.lr_sr));
  if (has_mimick && log.lr_mimick.y != log.lr_sr.y) lrs.push_back(applied_at(log.lr_mimick));
  write_text(out_dir / "lr_schedule.svg", svg_line_chart("Learning rate", "iteration", lrs));
  written.push_back(out_dir / "lr_schedule.svg");
  if (!log.val_psnr.x.empty()) {
    write_text(out_dir / "val_psnr.svg", svg_line_chart("Validation PSNR (dB)", "iteration", {log.val_psnr}));
    written.push_back(out_dir / "val_psnr.svg");
  }
  return written;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<fs::path> plot_metric_csvs(const std::vector<fs::path>& csvs, const fs::path& out_dir) {
  MIMICSR_CHECK(!csvs.empty(), "plot: no CSV files");
  std::vector<std::string> columns;
  std::vector<Series> groups;
  for (const auto& path : csvs) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos) {
      throw DataError(path.string() + ":1: empty CSV");
    }
    const auto header = split_csv_line(line);
    std::vector<double> sums(header.size(), 0.0);
    std::vector<int> counts(header.size(), 0);
    int lineno = 1, rows = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != header.size()) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
      }
      if (fields[0] == "mean") continue;
      ++rows;
      for (size_t k = 1; k < fields.size(); ++k) {
        if (fields[k].empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(fields[k].c_str(), &end);
        if (end && *end == '\0' && std::isfinite(v)) {
          sums[k] += v;
          ++counts[k];
        }
      }
    }
    if (rows == 0) throw DataError(path.string() + ": CSV has no data rows");
    Series g;
    g.name = path.stem().string();
    if (columns.empty()) {
      for (size_t k = 1; k < header.size(); ++k)
        if (counts[k] > 0) columns.push_back(header[k]);
    }
    for (const auto& col : columns) {
      const auto it = std::find(header.begin(), header.end(), col);
      const size_t k = static_cast<size_t>(it - header.begin());
      g.y.push_back(it != header.end() && counts[k] > 0 ? sums[k] / counts[k] : NAN);
    }
    groups.push_back(std::move(g));
  }
  if (columns.empty()) throw DataError("plot: no numeric columns in " + csvs.front().string());
  std::vector<fs::path> written;
  for (const auto& col : columns) {
    std::vector<Series> one;
    const size_t k = static_cast<size_t>(std::find(columns.begin(), columns.end(), col) - columns.begin());
    for (const auto& g : groups) one.push_back({g.name, {}, {g.y[k]}});
    const fs::path file = out_dir / ("metric_" + col + ".svg");
    write_text(file, svg_bar_chart("Mean " + col, {col}, one));
    written.push_back(file);
  }
  return written;
}

}  // namespace mimicsr
