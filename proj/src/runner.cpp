/* Copyright 2026 The DCL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dcl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "dcl/analysis.hpp"
#include "dcl/records.hpp"

namespace dcl {

namespace fs = std::filesystem;

namespace {

constexpr char kImageMagic[8] = {'D', 'C', 'L', 'I', 'M', 'G', '0', '1'};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated image file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

const char* kSplitNames[3] = {"train", "val", "test"};

// Runs tasks on up to `jobs` threads; results land at their own index.
template <typename Task>
void run_parallel(std::size_t n, int jobs, const Task& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string summary_text(const ExperimentConfig& cfg, const RunOutcome& r) {
  std::string s;
  s += "label = " + std::string(is_supervised_baseline(cfg) ? "supervised baseline" : "semi-supervised") + "\n";
  s += "fold = " + std::to_string(r.fold) + "\n";
  s += "seed = " + std::to_string(r.seed) + "\n";
  s += "test_mAP = " + num(100.0 * r.test.mAP) + "\n";
  s += "test_AP50 = " + num(100.0 * r.test.AP50) + "\n";
  s += "test_AP75 = " + num(100.0 * r.test.AP75) + "\n";
  s += "val_mAP = " + num(100.0 * r.artifacts.final_metrics.mAP) + "\n";
  s += "val_AP50 = " + num(100.0 * r.artifacts.final_metrics.AP50) + "\n";
  s += "regime = " + to_string(r.artifacts.regime) + "\n";
  return s;
}

std::string run_name(int fold, std::uint64_t seed) {
  return "fold" + std::to_string(fold) + "_seed" + std::to_string(seed);
}

// All (fold, seed) pairs of a config.
std::vector<std::pair<int, std::uint64_t>> run_grid(const ExperimentConfig& cfg) {
  std::vector<std::pair<int, std::uint64_t>> out;
  for (int f = 0; f < cfg.folds; ++f) {
    for (auto s : cfg.seeds) out.emplace_back(f, s);
  }
  return out;
}

}  // namespace

std::string dataset_hash(const DatasetConfig& cfg) {
  ExperimentConfig tmp;
  tmp.data = cfg;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& key : config_keys()) {
    if (key.rfind("data.", 0) != 0) continue;
    for (char ch : key + "=" + get_config_value(tmp, key) + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_images(const fs::path& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kImageMagic, sizeof kImageMagic);
  const Image empty;
  const Image& first = scenes.empty() ? empty : scenes.front().image;
  put_u32(out, static_cast<std::uint32_t>(scenes.size()));
  put_u32(out, static_cast<std::uint32_t>(first.height));
  put_u32(out, static_cast<std::uint32_t>(first.width));
  put_u32(out, static_cast<std::uint32_t>(first.channels));
  for (const auto& s : scenes) {
    if (s.image.height != first.height || s.image.width != first.width ||
        s.image.channels != first.channels) {
      throw IoError("write_images: scenes differ in image size");
    }
    for (float v : s.image.data) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      put_u32(out, bits);
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<Image> read_images(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kImageMagic, 8) != 0) {
    throw IoError("'" + path.string() + "' is not a dcl image file");
  }
  const std::uint32_t n = get_u32(in), h = get_u32(in), w = get_u32(in), c = get_u32(in);
  std::vector<Image> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (float& v : img.data) {
      const std::uint32_t bits = get_u32(in);
      std::memcpy(&v, &bits, sizeof v);
    }
    out.push_back(std::move(img));
  }
  return out;
}

void write_dataset(const fs::path& dir, const DatasetConfig& cfg, const Benchmark& b) {
  make_dirs(dir);
  const std::vector<Scene>* splits[3] = {&b.train, &b.val, &b.test};
  for (int k = 0; k < 3; ++k) {
    write_images(dir / (std::string(kSplitNames[k]) + "_images.bin"), *splits[k]);
    std::ostringstream labels;
    labels << "# scene_id class_id xmin ymin xmax ymax\n";
    for (const auto& s : *splits[k]) write_records(labels, to_records(s.id, s.labels));
    write_text(dir / (std::string(kSplitNames[k]) + "_labels.txt"), labels.str());
  }
  std::string manifest = "format = dcl-dataset 1\n";
  manifest += "hash = " + dataset_hash(cfg) + "\n";
  manifest += "seed = " + std::to_string(cfg.seed) + "\n";
  manifest += "train = " + std::to_string(b.train.size()) + "\n";
  manifest += "val = " + std::to_string(b.val.size()) + "\n";
  manifest += "test = " + std::to_string(b.test.size()) + "\n";
  write_text(dir / "manifest.txt", manifest);
}

Benchmark read_dataset(const fs::path& dir, const DatasetConfig& cfg) {
  if (!fs::exists(dir / "manifest.txt")) {
    throw IoError("no dataset at '" + dir.string() + "' (run 'dcl generate' first)");
  }
  std::istringstream manifest(read_text(dir / "manifest.txt"));
  std::map<std::string, std::string> kv;
  try {
    for (const auto& [k, v] : read_key_values(manifest)) kv[k] = v;
  } catch (const ConfigError& e) {
    throw IoError("corrupt manifest: " + std::string(e.what()));
  }
  if (kv["hash"] != dataset_hash(cfg)) {
    throw IoError("dataset at '" + dir.string() + "' was generated from a different data configuration");
  }
  Benchmark b;
  std::vector<Scene>* splits[3] = {&b.train, &b.val, &b.test};
  for (int k = 0; k < 3; ++k) {
    const auto images = read_images(dir / (std::string(kSplitNames[k]) + "_images.bin"));
    std::istringstream labels(read_text(dir / (std::string(kSplitNames[k]) + "_labels.txt")));
    std::map<int, LabelSet> grouped;
    try {
      grouped = group_labels(read_records(labels));
    } catch (const std::exception& e) {
      throw IoError(std::string(kSplitNames[k]) + "_labels.txt: " + e.what());
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      Scene s;
      s.id = static_cast<int>(i);
      s.image = images[i];
      if (auto it = grouped.find(s.id); it != grouped.end()) s.labels = it->second;
      splits[k]->push_back(std::move(s));
    }
  }
  return b;
}

std::uint64_t fold_seed(const DatasetConfig& cfg, int fold) {
  return splitmix64(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(fold));
}

SplitData make_split(const std::vector<Scene>& train, double ratio, std::uint64_t fseed) {
  SplitData d;
  d.split = split_pld(train, ratio, fseed);
  std::map<int, const Scene*> by_id;
  for (const auto& s : train) by_id[s.id] = &s;
  for (int id : d.split.labelled) d.labelled.push_back(*by_id.at(id));
  for (int id : d.split.unlabelled) {
    Scene s = *by_id.at(id);
    s.labels = LabelSet{};
    d.unlabelled.push_back(std::move(s));
  }
  return d;
}

bool is_supervised_baseline(const ExperimentConfig& cfg) {
  return cfg.engine.policy.pi.max_value() == 0.0;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const Benchmark& bench, int fold,
                          std::uint64_t seed) {
  cfg.validate();
  const SplitData sd = make_split(bench.train, cfg.split_ratio, fold_seed(cfg.data, fold));
  RunOutcome r;
  r.fold = fold;
  r.seed = seed;
  r.artifacts = run_training(cfg.engine, sd.labelled, sd.unlabelled, bench.val, seed);
  const ModelParams& model =
      cfg.engine.eval_model == EvalModel::kTeacher ? r.artifacts.state.teacher : r.artifacts.state.student;
  r.test = evaluate(model, bench.test);
  return r;
}

std::string history_csv(const std::vector<StepLog>& history) {
  std::string s =
      "epoch,L,L_unsup,L_all,alpha,sigma,pi,m,lr,n_labelled,n_unlabelled,n_pseudo,pseudo_conf90,"
      "pseudo_conf50,evaluated,val_AP50,val_mAP,val_conf90,val_conf50,covariance,teacher_checksum\n";
  for (const auto& h : history) {
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(h.teacher_checksum));
    s += std::to_string(h.epoch) + "," + num(h.sup_loss) + "," + num(h.unsup_loss) + "," + num(h.total_loss) +
         "," + num(h.alpha) + "," + num(h.sigma) + "," + num(h.pi) + "," + num(h.momentum) + "," + num(h.lr) +
         "," + std::to_string(h.labelled_seen) + "," + std::to_string(h.unlabelled_seen) + "," +
         std::to_string(h.pseudo_labels) + "," + num(h.pseudo_conf90) + "," + num(h.pseudo_conf50) + "," +
         (h.evaluated ? "1" : "0") + "," + (h.evaluated ? num(h.val_ap50) : "") + "," +
         (h.evaluated ? num(h.val_map) : "") + "," + (h.evaluated ? num(h.val_conf90) : "") + "," +
         (h.evaluated ? num(h.val_conf50) : "") + "," + (h.has_covariance ? num(h.covariance) : "") + "," +
         sum + "\n";
  }
  return s;
}

void write_run_dir(const fs::path& dir, const ExperimentConfig& cfg, const SplitData& split,
                   const RunOutcome& run) {
  make_dirs(dir / "checkpoints");
  write_text(dir / "config.txt", serialize_config(cfg));
  std::string sp = "fold_seed = " + std::to_string(split.split.fold_seed) + "\nlabelled =";
  for (int id : split.split.labelled) sp += " " + std::to_string(id);
  sp += "\nunlabelled =";
  for (int id : split.split.unlabelled) sp += " " + std::to_string(id);
  write_text(dir / "split.txt", sp + "\n");
  write_text(dir / "history.csv", history_csv(run.artifacts.state.history));
  for (const auto& ck : run.artifacts.checkpoints) {
    char name[64];
    std::snprintf(name, sizeof name, "teacher_e%05d.txt", ck.epoch);
    std::ostringstream os;
    save_params(os, ck.teacher);
    write_text(dir / "checkpoints" / name, os.str());
  }
  std::ostringstream fin;
  save_params(fin, run.artifacts.state.student);
  write_text(dir / "checkpoints" / "student_final.txt", fin.str());
  write_text(dir / "summary.txt", summary_text(cfg, run));
}

Aggregate aggregate(const std::vector<RunOutcome>& runs) {
  Aggregate a;
  a.runs = static_cast<int>(runs.size());
  if (runs.empty()) return a;
  auto stats = [&](auto get, double& mean, double& sd) {
    double s = 0.0;
    for (const auto& r : runs) s += 100.0 * get(r.test);
    mean = s / static_cast<double>(runs.size());
    double v = 0.0;
    for (const auto& r : runs) v += (100.0 * get(r.test) - mean) * (100.0 * get(r.test) - mean);
    sd = runs.size() > 1 ? std::sqrt(v / static_cast<double>(runs.size() - 1)) : 0.0;
  };
  stats([](const MetricsRecord& m) { return m.mAP; }, a.map_mean, a.map_std);
  stats([](const MetricsRecord& m) { return m.AP50; }, a.ap50_mean, a.ap50_std);
  stats([](const MetricsRecord& m) { return m.AP75; }, a.ap75_mean, a.ap75_std);
  return a;
}

fs::path cmd_generate(const ExperimentConfig& cfg, const fs::path& out) {
  try {
    cfg.data.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = out / "dataset";
  write_dataset(dir, cfg.data, generate_benchmark(cfg.data));
  return dir;
}

fs::path cmd_train(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  cfg.validate();
  const Benchmark bench = read_dataset(out / "dataset", cfg.data);
  const fs::path root = out / "train";
  make_dirs(root);
  const auto grid = run_grid(cfg);
  std::vector<RunOutcome> runs(grid.size());
  run_parallel(grid.size(), jobs, [&](std::size_t i) {
    const auto [fold, seed] = grid[i];
    runs[i] = run_experiment(cfg, bench, fold, seed);
    const SplitData sd = make_split(bench.train, cfg.split_ratio, fold_seed(cfg.data, fold));
    write_run_dir(root / run_name(fold, seed), cfg, sd, runs[i]);
  });
  const Aggregate a = aggregate(runs);
  const std::string label = is_supervised_baseline(cfg) ? "supervised baseline" : "semi-supervised";
  std::string csv = "run,label,fold,seed,mAP,AP50,AP75,regime\n";
  for (const auto& r : runs) {
    csv += run_name(r.fold, r.seed) + "," + label + "," + std::to_string(r.fold) + "," + std::to_string(r.seed) +
           "," + num(100.0 * r.test.mAP) + "," + num(100.0 * r.test.AP50) + "," + num(100.0 * r.test.AP75) +
           "," + to_string(r.artifacts.regime) + "\n";
  }
  write_text(root / "runs.csv", csv);
  std::string summary = "label,runs,mAP_mean,mAP_std,AP50_mean,AP50_std,AP75_mean,AP75_std\n";
  summary += label + "," + std::to_string(a.runs) + "," + num(a.map_mean) + "," + num(a.map_std) + "," +
             num(a.ap50_mean) + "," + num(a.ap50_std) + "," + num(a.ap75_mean) + "," + num(a.ap75_std) + "\n";
  write_text(root / "summary.csv", summary);
  return root;
}

fs::path cmd_analyze(const fs::path& run_dir, const fs::path& dataset_dir) {
  const ExperimentConfig cfg = load_config((run_dir / "config.txt").string());
  cfg.validate();
  const Benchmark bench = read_dataset(dataset_dir, cfg.data);

  std::vector<Checkpoint> ckpts;
  if (!fs::exists(run_dir / "checkpoints")) throw IoError("no checkpoints in '" + run_dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run_dir / "checkpoints")) {
    const std::string name = e.path().filename().string();
    if (name.rfind("teacher_e", 0) == 0) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no teacher checkpoints in '" + run_dir.string() + "'");
  for (const auto& f : files) {
    std::istringstream in(read_text(f));
    Checkpoint ck;
    ck.epoch = std::stoi(f.filename().string().substr(9, 5));
    try {
      ck.teacher = load_params(in);
    } catch (const std::exception& e) {
      throw IoError(f.string() + ": " + e.what());
    }
    ckpts.push_back(std::move(ck));
  }

  // The unlabelled pool, with its hidden labels, from split.txt.
  std::istringstream split(read_text(run_dir / "split.txt"));
  std::vector<Scene> pool;
  std::string line;
  while (std::getline(split, line)) {
    if (line.rfind("unlabelled =", 0) != 0) continue;
    std::istringstream ids(line.substr(12));
    int id = 0;
    while (ids >> id) {
      if (id < 0 || id >= static_cast<int>(bench.train.size())) throw IoError("split.txt: bad scene id");
      pool.push_back(bench.train[static_cast<std::size_t>(id)]);
    }
  }
  const AnalysisResult res = analyze_checkpoints(ckpts, cfg.engine.epochs, pool, cfg.engine);
  const fs::path out = run_dir / "analysis";
  make_dirs(out);
  write_text(out / "iou_vs_score.csv", res.scatter_csv);
  write_text(out / "precision_vs_epoch.csv", res.precision_csv);
  write_text(out / "quality_vs_threshold.csv", res.sweep_csv);
  write_text(out / "fbeta_heatmap.csv", res.heatmap_csv);
  write_text(out / "best_threshold.csv", res.best_csv);
  write_text(out / "arctan_fit.csv", res.fit_csv);
  return out;
}

fs::path cmd_ablate(const fs::path& grid_path, const fs::path& out, int jobs,
                    const std::vector<std::uint64_t>& seeds_override, int folds_override) {
  std::ifstream in(grid_path);
  if (!in) throw IoError("cannot open grid file '" + grid_path.string() + "'");
  ExperimentConfig base;
  std::string axis = "ablation";
  std::vector<std::string> cell_order;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> cells;
  for (const auto& [k, v] : read_key_values(in)) {
    if (k == "ablate.axis") {
      axis = v;
    } else if (k.rfind("cell.", 0) == 0) {
      const auto dot = k.find('.', 5);
      if (dot == std::string::npos || dot == 5) throw ConfigError(k + ": expected cell.<name>.<key>");
      const std::string name = k.substr(5, dot - 5);
      if (!cells.count(name)) cell_order.push_back(name);
      cells[name].emplace_back(k.substr(dot + 1), v);
    } else {
      set_config_value(base, k, v);
    }
  }
  if (cell_order.empty()) throw ConfigError("ablation grid has no cells");
  if (!seeds_override.empty()) base.seeds = seeds_override;
  if (folds_override > 0) base.folds = folds_override;

  const Benchmark bench = read_dataset(out / "dataset", base.data);
  const fs::path root = out / "ablate";
  make_dirs(root);
  std::string table = "axis,variant,status,runs,mAP_mean,mAP_std,AP50_mean,AP75_mean,virtuous,vicious\n";
  for (const auto& name : cell_order) {
    ExperimentConfig cfg = base;
    try {
      for (const auto& [k, v] : cells[name]) set_config_value(cfg, k, v);
      cfg.validate();
    } catch (const ConfigError& e) {
      std::cerr << "skipping cell '" << name << "': " << e.what() << "\n";
      table += axis + "," + name + ",invalid,0,,,,,,\n";
      continue;
    }
    const auto grid = run_grid(cfg);
    std::vector<RunOutcome> runs(grid.size());
    run_parallel(grid.size(), jobs, [&](std::size_t i) {
      runs[i] = run_experiment(cfg, bench, grid[i].first, grid[i].second);
    });
    int virtuous = 0, vicious = 0;
    for (const auto& r : runs) {
      virtuous += r.artifacts.regime == Regime::kVirtuous;
      vicious += r.artifacts.regime == Regime::kVicious;
    }
    const Aggregate a = aggregate(runs);
    table += axis + "," + name + ",ok," + std::to_string(a.runs) + "," + num(a.map_mean) + "," +
             num(a.map_std) + "," + num(a.ap50_mean) + "," + num(a.ap75_mean) + "," + std::to_string(virtuous) +
             "," + std::to_string(vicious) + "\n";
  }
  write_text(root / (axis + ".csv"), table);
  return root;
}

}  // namespace dcl
