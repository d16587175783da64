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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "mimicsr/checkpoint.hpp"
#include "mimicsr/config.hpp"
#include "mimicsr/data.hpp"
#include "mimicsr/error.hpp"
#include "mimicsr/flow.hpp"
#include "mimicsr/metrics.hpp"
#include "mimicsr/mimick.hpp"
#include "mimicsr/pipeline.hpp"
#include "mimicsr/srmodels.hpp"
#include "mimicsr/trainer.hpp"

namespace mimicsr::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_file;
  std::string out_root = "runs";
  std::string run_dir;
  std::optional<std::int64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_file, "config file (key = value, [section] headers)")
      ->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out_root, "parent of the timestamped run directory")->capture_default_str();
  sub->add_option("--run-dir", c.run_dir, "exact run directory (overrides --out)");
  sub->add_option("--seed", c.seed, "root seed (sets train.seed and misalign.seed)");
  sub->add_option("-s,--set", c.overrides, "config override key=value (repeatable; wins over --config)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->footer("Config keys accepted by --set and --config:\n" + config_keys_help());
}

// Config resolution order: base, --config file, --set overrides, --seed.
Config resolve_config(const Common& c, Config base = Config()) {
  if (!c.config_file.empty()) base.load_file(c.config_file);
  for (const auto& o : c.overrides) base.apply_override(o);
  if (c.seed) {
    base.set("train.seed", std::to_string(*c.seed));
    base.set("misalign.seed", std::to_string(*c.seed));
  }
  return base;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path make_run_dir(const Common& c, const std::string& command) {
  if (!c.run_dir.empty()) {
    fs::create_directories(c.run_dir);
    return c.run_dir;
  }
  const fs::path base = fs::path(c.out_root) / (command + "-" + timestamp());
  fs::path dir = base;
  for (int k = 1; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// Resolved config plus the invocation, saved next to every artifact.
void snapshot(const fs::path& run_dir, const std::string& command, const Config& cfg, int argc,
              const char* const* argv) {
  write_file(run_dir / "config.ini", cfg.dump());
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = std::vector<std::string>(argv, argv + argc);
  j["started"] = timestamp();
  j["seed"] = cfg.get_int("train.seed");
  j["version"] = "0.1.0";
  write_file(run_dir / "run.json", j.dump(2) + "\n");
}

Config checkpoint_config(const TensorArchive& archive) {
  Config cfg;
  if (archive.meta.contains("config")) cfg.load_text(archive.meta.at("config").get<std::string>(), "checkpoint config");
  return cfg;
}

std::vector<PairedSample> load_dataset(const fs::path& manifest_path, int expected_scale) {
  const DatasetManifest m = DatasetManifest::load(manifest_path);
  if (m.scale != expected_scale) {
    throw DataError(manifest_path.string() + " is a x" + std::to_string(m.scale) + " dataset but the model is x" +
                    std::to_string(expected_scale));
  }
  m.check_paths();
  return load_samples(m);
}

std::vector<fs::path> list_pngs(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no PNG files in " + input.string());
  } else if (fs::is_regular_file(input)) {
    files.push_back(input);
  } else {
    throw DataError("input not found: " + input.string());
  }
  return files;
}

std::string fixed(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

void print_mean(std::ostream& out, const EvalTable& t) {
  out << "images " << t.rows.size() << ", failed " << t.failed;
  const MetricReport& m = t.mean;
  if (m.psnr) out << ", psnr " << fixed(*m.psnr, 4);
  if (m.ssim) out << ", ssim " << fixed(*m.ssim, 4);
  if (m.niqe) out << ", niqe " << fixed(*m.niqe, 4);
  if (m.nrqm) out << ", nrqm " << fixed(*m.nrqm, 4);
  if (m.pi) out << ", pi " << fixed(*m.pi, 4);
  out << "\n";
}

}  // namespace

std::string config_keys_help() {
  std::ostringstream out;
  size_t width = 0;
  for (const auto& k : Config::schema()) width = std::max(width, k.name.size());
  for (const auto& k : Config::schema()) {
    out << "  " << std::left << std::setw(static_cast<int>(width) + 2) << k.name << k.help << " ["
        << Config::type_name(k.type) << ", default '" << k.default_value << "']\n";
  }
  return out.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Super-resolution training on misaligned LR-HR pairs with an LR mimicking module", "mimicsr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  Common common;

  auto* gen = app.add_subcommand("gen-synth", "synthesize a misaligned dataset with aligned LR truth");
  std::string gen_src, gen_split = "train";
  int gen_count = 0, gen_crop = 0;
  gen->add_option("--src", gen_src, "directory of clean HR PNG images")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--split", gen_split, "train | val | test")->capture_default_str();
  gen->add_option("--count", gen_count, "number of random crops (0 = one sample per source image)");
  gen->add_option("--crop", gen_crop, "crop side in HR pixels (with --count)");
  add_common(gen, common);

  auto* train = app.add_subcommand("train", "train an SR model (mimick or baseline mode)");
  std::string train_manifest, val_manifest, resume;
  int progress = 100;
  train->add_option("--train", train_manifest, "training manifest (default data.train_manifest)");
  train->add_option("--val", val_manifest, "validation manifest (default data.val_manifest)");
  train->add_option("--resume", resume, "continue the run in this directory")->check(CLI::ExistingDirectory);
  train->add_option("--progress", progress, "print a progress line every N steps (0 = quiet)")->capture_default_str();
  add_common(train, common);

  auto* inf = app.add_subcommand("infer", "super-resolve LR images with a trained SR model");
  std::string inf_ckpt, inf_input, inf_export;
  int tile = 0, context = -1;
  inf->add_option("--checkpoint", inf_ckpt, "training checkpoint or exported model")->required()->check(CLI::ExistingFile);
  inf->add_option("--input", inf_input, "LR PNG file or directory");
  inf->add_option("--export", inf_export, "also write the SR-only model (mimicking module stripped) here");
  inf->add_option("--tile", tile, "tile side in LR pixels (0 = whole image)");
  inf->add_option("--context", context, "context LR pixels around each tile (default: receptive radius)");
  add_common(inf, common);

  auto* ev = app.add_subcommand("eval", "PSNR/SSIM/NIQE/NRQM/PI of an SR model on a dataset");
  std::string ev_ckpt, ev_manifest, ev_images, ev_input = "auto";
  bool no_niqe = false;
  ev->add_option("--checkpoint", ev_ckpt, "training checkpoint or exported model")->required()->check(CLI::ExistingFile);
  auto* ev_m = ev->add_option("--manifest", ev_manifest, "paired test manifest (full-reference metrics)");
  auto* ev_i = ev->add_option("--images", ev_images, "directory of LR-only PNGs (no-reference metrics)");
  ev_m->excludes(ev_i);
  ev->add_option("--input", ev_input, "model input for paired data: auto | lr | truth")
      ->check(CLI::IsMember({"auto", "lr", "truth"}))
      ->capture_default_str();
  ev->add_flag("--no-niqe", no_niqe, "skip NIQE (and PI)");
  add_common(ev, common);

  auto* al = app.add_subcommand("align-compare", "per-pixel error of HR-naive, flow-warped LR and Mim_LR");
  std::string al_ckpt, al_manifest, al_reference = "truth";
  double heatmap_max = 0.1;
  al->add_option("--checkpoint", al_ckpt, "training checkpoint with a mimicking module")->required()->check(CLI::ExistingFile);
  al->add_option("--manifest", al_manifest, "dataset manifest")->required();
  al->add_option("--reference", al_reference, "truth (synthetic aligned LR) | flow (OF-warped LR)")
      ->check(CLI::IsMember({"truth", "flow"}))
      ->capture_default_str();
  al->add_option("--heatmap-max", heatmap_max, "error mapped to the top of the heatmap colors")->capture_default_str();
  add_common(al, common);

  auto* pl = app.add_subcommand("plot", "SVG figures from a training log and metric CSVs");
  std::string pl_log;
  std::vector<std::string> pl_csvs;
  pl->add_option("--log", pl_log, "train_log.jsonl of a run");
  pl->add_option("--csv", pl_csvs, "metric CSV files to compare (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_common(pl, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      const Config cfg = resolve_config(common);
      const MisalignSpec spec = MisalignSpec::from_config(cfg);
      const Split split = parse_split(gen_split);
      if ((gen_count > 0) != (gen_crop > 0)) throw InvalidArgument("--count and --crop go together");
      const fs::path dir = make_run_dir(common, "gen-synth");
      snapshot(dir, "gen-synth", cfg, argc, argv);
      const DatasetManifest m = generate_synthetic(gen_src, dir, spec, cfg.get_int("data.scale"),
                                                   static_cast<std::uint64_t>(cfg.get_int("misalign.seed")), split,
                                                   {gen_count, gen_crop});
      out << "wrote " << m.entries.size() << " samples: " << (dir / "manifest.jsonl").string() << "\n";
      return kOk;
    }

    if (train->parsed()) {
      Config base;
      if (!resume.empty()) {
        if (!common.run_dir.empty()) throw InvalidArgument("--resume and --run-dir are exclusive");
        common.run_dir = resume;
        if (fs::exists(fs::path(resume) / "config.ini")) base.load_file(fs::path(resume) / "config.ini");
      }
      Config cfg = resolve_config(common, base);
      if (!train_manifest.empty()) cfg.set("data.train_manifest", train_manifest);
      if (!val_manifest.empty()) cfg.set("data.val_manifest", val_manifest);
      const TrainConfig tc = TrainConfig::from_config(cfg);
      if (cfg.get_string("data.train_manifest").empty()) throw InvalidArgument("no training manifest (--train)");
      auto train_set = load_dataset(cfg.get_string("data.train_manifest"), tc.scale);
      std::vector<PairedSample> val_set;
      if (!cfg.get_string("data.val_manifest").empty()) val_set = load_dataset(cfg.get_string("data.val_manifest"), tc.scale);

      Trainer trainer(cfg, std::move(train_set), std::move(val_set));
      const fs::path dir = make_run_dir(common, "train");
      snapshot(dir, "train", cfg, argc, argv);
      out << "run directory " << dir.string() << "\n";
      trainer.run(dir, [&](const StepReport& r) {
        if (progress > 0 && (r.iteration % progress == 0 || r.iteration == tc.iterations)) {
          out << "iter " << r.iteration << "/" << tc.iterations << "  loss " << fixed(r.loss.l_total, 5) << "  l_res "
              << fixed(r.loss.l_res, 5) << "  l_deg " << fixed(r.loss.l_deg, 5) << "  l_cd "
              << fixed(r.loss.l_cd, 5) << "  lr " << std::scientific << std::setprecision(3) << r.lr_sr
              << std::defaultfloat << "\n";
          out.flush();
        }
      });
      const auto last = latest_checkpoint(dir);
      if (!last) throw DataError("training finished without a checkpoint");
      export_sr(TensorArchive::load(*last)).save(dir / "model_sr.bin");
      out << "checkpoint " << last->string() << "\nexported " << (dir / "model_sr.bin").string() << "\n";
      return kOk;
    }

    if (inf->parsed()) {
      if (inf_input.empty() && inf_export.empty()) throw InvalidArgument("nothing to do: give --input and/or --export");
      const TensorArchive ckpt = TensorArchive::load(inf_ckpt);
      if (!inf_export.empty()) {
        export_sr(ckpt).save(inf_export);
        out << "exported " << inf_export << "\n";
      }
      if (inf_input.empty()) return kOk;
      const Config cfg = resolve_config(common, checkpoint_config(ckpt));
      const auto model = load_sr_model(ckpt);
      const auto files = list_pngs(inf_input);
      const fs::path dir = make_run_dir(common, "infer");
      snapshot(dir, "infer", cfg, argc, argv);
      fs::create_directories(dir / "sr");
      const int ctx = context >= 0 ? context : model->receptive_radius();
      for (const auto& f : files) {
        const Image lr = read_png(f);
        const Image sr = tile > 0 ? infer_tiled(*model, lr, tile, ctx) : infer(*model, lr);
        write_png(dir / "sr" / f.filename(), sr);
      }
      out << "wrote " << files.size() << " images to " << (dir / "sr").string() << "\n";
      return kOk;
    }

    if (ev->parsed()) {
      if (ev_manifest.empty() && ev_images.empty()) throw InvalidArgument("give --manifest or --images");
      const TensorArchive ckpt = TensorArchive::load(ev_ckpt);
      const Config cfg = resolve_config(common, checkpoint_config(ckpt));
      const auto model = load_sr_model(ckpt);
      std::optional<NiqeParams> niqe;
      if (!no_niqe) niqe = load_niqe_params(cfg);
      const auto nrqm = make_nrqm_scorer(cfg);
      MetricOptions opt;
      opt.border = cfg.get_int("metrics.border");
      opt.niqe = niqe ? &*niqe : nullptr;
      opt.nrqm = nrqm.get();
      EvalTable table;
      if (!ev_manifest.empty()) {
        const EvalInput input = ev_input == "lr" ? EvalInput::kLr : ev_input == "truth" ? EvalInput::kTruth : EvalInput::kAuto;
        table = eval_dataset(*model, load_dataset(ev_manifest, model->scale()), opt, input);
      } else {
        std::vector<std::pair<std::string, Image>> images;
        for (const auto& f : list_pngs(ev_images)) images.emplace_back(f.stem().string(), read_png(f));
        table = eval_images(*model, images, opt);
      }
      const fs::path dir = make_run_dir(common, "eval");
      snapshot(dir, "eval", cfg, argc, argv);
      table.write(dir / "metrics.csv", dir / "metrics.json");
      print_mean(out, table);
      out << "wrote " << (dir / "metrics.csv").string() << "\n";
      return kOk;
    }

    if (al->parsed()) {
      const TensorArchive ckpt = TensorArchive::load(al_ckpt);
      const Config cfg = resolve_config(common, checkpoint_config(ckpt));
      const MimickModule mimick = MimickModule::from_archive(ckpt);
      const auto flow = make_flow_backend(cfg);
      const DatasetManifest m = DatasetManifest::load(al_manifest);
      m.check_paths();
      const auto samples = load_samples(m);
      const fs::path dir = make_run_dir(common, "align-compare");
      snapshot(dir, "align-compare", cfg, argc, argv);
      AlignCompareOptions opt;
      opt.reference = al_reference == "flow" ? AlignReference::kFlow : AlignReference::kTruth;
      opt.epsilon = cfg.get_real("loss.epsilon");
      opt.out_dir = dir;
      opt.heatmap_max = heatmap_max;
      const AlignCompareResult r = align_compare(mimick, samples, *flow, opt);
      out << r.to_json().dump(2) << "\nwrote " << (dir / "align_compare.csv").string() << "\n";
      return kOk;
    }

    if (pl->parsed()) {
      if (pl_log.empty() && pl_csvs.empty()) throw InvalidArgument("give --log and/or --csv");
      Config cfg = resolve_config(common);
      std::optional<TrainConfig> schedule;
      if (!pl_log.empty()) {
        const fs::path snap = fs::path(pl_log).parent_path() / "config.ini";
        if (fs::exists(snap)) {
          Config run_cfg;
          run_cfg.load_file(snap);
          schedule = TrainConfig::from_config(run_cfg);
        }
      }
      // Parse everything before creating the run directory.
      if (!pl_log.empty()) TrainLog::load(pl_log);
      const fs::path dir = make_run_dir(common, "plot");
      std::vector<fs::path> written;
      try {
        if (!pl_log.empty()) written = plot_train_log(pl_log, dir, schedule ? &*schedule : nullptr);
        if (!pl_csvs.empty()) {
          const auto more = plot_metric_csvs({pl_csvs.begin(), pl_csvs.end()}, dir);
          written.insert(written.end(), more.begin(), more.end());
        }
      } catch (...) {
        for (const auto& f : written) fs::remove(f);
        if (common.run_dir.empty() && fs::is_empty(dir)) fs::remove(dir);
        throw;
      }
      snapshot(dir, "plot", cfg, argc, argv);
      for (const auto& f : written) out << "wrote " << f.string() << "\n";
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataFailure;
  }
  return kUsage;
}

}  // namespace mimicsr::cli
