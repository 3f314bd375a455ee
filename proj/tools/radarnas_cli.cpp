// Copyright 2026 The RadarNAS Authors.
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

// radarnas: simulate -> preprocess -> train / nas / eval / knn.
//
// Exit status: 0 success, 2 usage or configuration error, 1 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "radarnas/radarnas.hpp"

namespace radarnas::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string out = "radarnas_out";
  std::uint64_t seed = 1;
  int threads = 1;
};

// One command per output directory at a time.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".radarnas.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw Error("output directory " + dir.string() + " is in use (remove " + path_.string() + " if stale)");
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

std::string format_weights(const std::array<double, kNumClasses>& w) {
  std::string s;
  char buf[64];
  for (Category c : kAllCategories) {
    std::snprintf(buf, sizeof(buf), " %s=%.4f", std::string(category_name(c)).c_str(), w[label_of(c)]);
    s += buf;
  }
  return s;
}

json matrix_json(const eval::Matrix4& m) {
  json j = json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

json counts_json(const eval::ConfusionMatrix& cm) {
  json j = json::array();
  for (const auto& row : cm.counts) j.push_back(row);
  return j;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  int tracks = 60;
  std::vector<int> counts;  // overrides --tracks
  int frames = 12;
  int n_samples = 128;
  int n_chirps = 128;
  int n_antennas = 8;
  bool no_noise = false;
};

int cmd_simulate(const Common& common, const SimulateOptions& o) {
  sim::DatasetSpec spec = sim::default_dataset_spec(o.tracks);
  if (!o.counts.empty()) {
    if (o.counts.size() != kNumClasses) throw InvalidConfig("--counts takes one value per category (4)");
    std::copy(o.counts.begin(), o.counts.end(), spec.counts.begin());
  }
  spec.frames_per_track = o.frames;
  sim::RadarConfig cfg;
  cfg.n_samples = o.n_samples;
  cfg.n_chirps = o.n_chirps;
  cfg.n_antennas = o.n_antennas;
  cfg.noise_enabled = !o.no_noise;
  spec.validate();
  cfg.validate();

  OutputLock lock(common.out);
  for (int i = 0; i < spec.total_tracks(); ++i) {
    io::write_track(common.out, sim::generate_track(spec, cfg, common.seed, i), cfg);
  }
  io::write_json_file(fs::path(common.out) / "dataset.json",
                      {{"seed", common.seed},
                       {"counts", spec.counts},
                       {"frames_per_track", spec.frames_per_track},
                       {"radar_config", io::to_json(cfg)}});
  std::printf("wrote %d tracks (%d/%d/%d/%d) x %d frames to %s\n", spec.total_tracks(), spec.counts[0],
              spec.counts[1], spec.counts[2], spec.counts[3], spec.frames_per_track, common.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOptions {
  std::string in;
  dsp::CfarParams cfar;
  double gate = 2.5;
  int roi = 32;
  int rcs_len = 30;
};

int cmd_preprocess(const Common& common, const PreprocessOptions& o) {
  roi::PipelineParams params;
  params.cfar = o.cfar;
  params.gating.gate_radius_m = o.gate;
  params.roi.roi_size = o.roi;
  params.roi.rcs_length = o.rcs_len;
  params.cfar.validate();
  params.gating.validate();
  params.roi.validate();

  const auto dirs = io::list_track_dirs(o.in);
  if (dirs.empty()) throw FormatError(o.in + " holds no track directories");
  // Categories first, so splits can be drawn before any cube is loaded.
  std::vector<Category> cats;
  for (const auto& d : dirs) {
    try {
      cats.push_back(category_from_name(io::read_json_file(d / "meta.json").at("category").get<std::string>()));
    } catch (const std::exception& e) {
      throw FormatError(d.filename().string() + ": " + e.what());
    }
  }
  const auto splits = roi::assign_splits(cats, common.seed);

  OutputLock lock(common.out);
  std::vector<roi::RoiSample> samples;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    io::LoadedTrack t;
    try {
      t = io::read_track(dirs[i]);
    } catch (const std::exception& e) {
      throw FormatError(dirs[i].filename().string() + ": " + e.what());
    }
    for (auto& s : roi::process_track(t.track, t.config, params, splits[i])) samples.push_back(std::move(s));
  }
  const fs::path out = fs::path(common.out) / "dataset.roids";
  io::write_roi_dataset(out, samples, {{"seed", common.seed}, {"source", fs::path(o.in).filename().string()}},
                        o.roi, o.rcs_len);
  const json summary = io::split_summary(samples);
  json track_counts = json::object();
  for (roi::Split s : {roi::Split::kTrain, roi::Split::kValidation, roi::Split::kTest}) {
    track_counts[std::string(roi::split_name(s))] = std::count(splits.begin(), splits.end(), s);
  }
  io::write_json_file(fs::path(common.out) / "summary.json",
                      {{"samples", summary}, {"tracks", track_counts}, {"n_samples", samples.size()}});
  std::printf("%zu samples from %zu tracks -> %s\n", samples.size(), dirs.size(), out.c_str());
  for (const auto& [split, per] : summary.items()) {
    std::printf("  %-10s tracks %3d samples %5d\n", split.c_str(), track_counts[split].get<int>(),
                per["total"].get<int>());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string model = "hybrid";  // kind or kind:genome.json
  int runs = 10;
  int epochs = 60;
  double lr = 0.003;
  int batch = 128;
};

struct ModelChoice {
  zoo::ModelKind kind = zoo::ModelKind::kHybrid;
  nas::Genome genome;
};

ModelChoice parse_model(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  ModelChoice c;
  bool known = false;
  for (auto k : {zoo::ModelKind::kManual, zoo::ModelKind::kSpectrum, zoo::ModelKind::kHybrid,
                 zoo::ModelKind::kReflectionOnly}) {
    if (zoo::model_kind_name(k) == name) {
      c.kind = k;
      known = true;
    }
  }
  if (!known) throw InvalidConfig("unknown model '" + name + "' (manual, spectrum, hybrid, reflection-only)");
  c.genome = colon == std::string::npos ? zoo::build_seed()
                                        : nas::genome_from_json(io::read_json_file(spec.substr(colon + 1)));
  nas::validate_genome(c.genome);
  return c;
}

nn::TrainConfig train_config(const Common& common, int epochs, double lr, int batch,
                             std::span<const roi::RoiSample> samples) {
  nn::TrainConfig tc;
  tc.epochs = epochs;
  tc.learning_rate = lr;
  tc.batch_size = batch;
  tc.threads = common.threads;
  tc.class_weights = exp::training_class_weights(samples);
  tc.validate();
  return tc;
}

json aggregate_json(const std::vector<eval::ConfusionMatrix>& cms) {
  const auto agg = eval::aggregate_runs(cms);
  json sig = json::array();
  for (const auto& row : agg.significant) sig.push_back(row);
  return {{"mean", matrix_json(agg.mean)},
          {"variance", matrix_json(agg.variance)},
          {"significant", sig},
          {"any_significant", agg.any_significant},
          {"mean_accuracy", agg.mean_accuracy},
          {"accuracy_variance", agg.accuracy_variance}};
}

int cmd_train(const Common& common, const TrainOptions& o) {
  if (o.runs < 1) throw InvalidConfig("--runs must be >= 1");
  const ModelChoice choice = parse_model(o.model);
  const auto ds = io::read_roi_dataset(o.data);
  const auto tc = train_config(common, o.epochs, o.lr, o.batch, ds.samples);
  const auto arch = zoo::build_model(choice.kind, choice.genome);
  const auto data = exp::split_examples(ds.samples, choice.kind);
  if (data.train.empty()) throw InvalidConfig("dataset has no training samples");
  if (data.val.empty()) std::fprintf(stderr, "warning: empty validation split, best-epoch selection has no signal\n");
  const std::string name = zoo::model_kind_name(choice.kind);

  OutputLock lock(common.out);
  std::printf("model %s (%s): %lld parameters, %lld MACs\n", name.c_str(), nas::canonical(choice.genome).c_str(),
              static_cast<long long>(nn::count_params(arch)), static_cast<long long>(nn::count_macs(arch)));
  if (choice.kind == zoo::ModelKind::kHybrid) {
    std::printf("delta params vs spectrum model: %lld\n",
                static_cast<long long>(nn::count_params(arch) -
                                       nn::count_params(zoo::build_spectrum_model(choice.genome))));
  }
  std::printf("class weights (inverse frequency, train split):%s\n", format_weights(tc.class_weights).c_str());

  json runs = json::array();
  std::vector<eval::ConfusionMatrix> cms;
  for (int r = 0; r < o.runs; ++r) {
    const auto res = exp::run_once(arch, data, tc, common.seed, r);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "run_%02d", r);
    const fs::path ckpt = fs::path(common.out) / (std::string(stem) + ".json");
    nn::save_checkpoint(res.trained.model, ckpt,
                        {{"model", name}, {"genome", nas::genome_to_json(choice.genome)}, {"run", r}, {"seed", common.seed}});
    std::ofstream hist(fs::path(common.out) / (std::string(stem) + "_history.csv"));
    nn::write_history_csv(hist, res.trained.history);
    std::printf("run %d: best val %.4f at epoch %d, test mean accuracy %.4f\n", r, res.trained.best_val_acc,
                res.trained.best_epoch, res.test_mean_acc);
    cms.push_back(res.test_confusion);
    runs.push_back({{"run", r},
                    {"checkpoint", ckpt.filename().string()},
                    {"best_epoch", res.trained.best_epoch},
                    {"best_val_acc", res.trained.best_val_acc},
                    {"test_mean_acc", res.test_mean_acc},
                    {"test_counts", counts_json(res.test_confusion)},
                    {"test_normalized", matrix_json(res.test_confusion.normalized())}});
  }
  json report = {{"model", name},
                 {"genome", nas::genome_to_json(choice.genome)},
                 {"n_params", nn::count_params(arch)},
                 {"n_macs", nn::count_macs(arch)},
                 {"class_weights", tc.class_weights},
                 {"epochs", tc.epochs},
                 {"learning_rate", tc.learning_rate},
                 {"batch_size", tc.batch_size},
                 {"seed", common.seed},
                 {"runs", runs}};
  if (choice.kind == zoo::ModelKind::kHybrid) {
    report["delta_params_vs_spectrum"] =
        nn::count_params(arch) - nn::count_params(zoo::build_spectrum_model(choice.genome));
  }
  if (cms.size() >= 2) {
    report["aggregate"] = aggregate_json(cms);
    const auto agg = eval::aggregate_runs(cms);
    std::ofstream csv(fs::path(common.out) / "confusion_mean.csv");
    eval::write_matrix_csv(csv, agg.mean);
    std::printf("%s", eval::format_matrix_table(agg.mean, "mean normalised test confusion over " +
                                                              std::to_string(cms.size()) + " runs")
                          .c_str());
    std::printf("mean test accuracy %.4f (variance %.5f)%s\n", agg.mean_accuracy, agg.accuracy_variance,
                agg.any_significant ? ", some cells vary by more than 0.05" : "");
  }
  io::write_json_file(fs::path(common.out) / "report.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// nas

struct NasOptions {
  std::string data;
  nas::EvolveConfig evolve;
  int epochs = 15;
  double lr = 0.003;
  int batch = 128;
  double min_accuracy = -1;  // negative: best front accuracy minus 0.03
};

// Reloads a front CSV and checks that no row dominates another.
bool front_csv_nondominated(const fs::path& path) {
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  std::vector<nas::Objectives> rows;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string acc, params, macs;
    std::getline(ss, acc, ',');
    std::getline(ss, params, ',');
    std::getline(ss, macs, ',');
    rows.push_back({std::stod(acc), std::stoll(params), std::stoll(macs)});
  }
  for (const auto& a : rows) {
    for (const auto& b : rows) {
      if (nas::dominates(a, b)) return false;
    }
  }
  return true;
}

int cmd_nas(const Common& common, const NasOptions& o) {
  o.evolve.validate();
  const auto ds = io::read_roi_dataset(o.data);
  const auto data = exp::split_examples(ds.samples, zoo::ModelKind::kSpectrum);
  if (data.train.empty() || data.val.empty()) throw InvalidConfig("NAS needs training and validation samples");
  const auto tc = train_config(common, o.epochs, o.lr, o.batch, ds.samples);

  OutputLock lock(common.out);
  nas::Evaluator evaluator(exp::nas_accuracy_fn(data, tc, common.seed));
  Rng rng(derive_seed(common.seed, "nas"));
  const auto archive = nas::evolve(zoo::build_seed(), o.evolve, rng, evaluator,
                                   [](const nas::Individual& ind, std::size_t n) {
                                     std::printf("[%3zu] %-40s acc %.4f params %8lld macs %9lld%s\n", n,
                                                 nas::canonical(ind.genome).c_str(), ind.objectives.accuracy,
                                                 static_cast<long long>(ind.objectives.params),
                                                 static_cast<long long>(ind.objectives.macs),
                                                 ind.cached ? " (cached)" : "");
                                   });
  const fs::path out(common.out);
  {
    std::ofstream jl(out / "archive.jsonl");
    nas::write_archive_jsonl(jl, archive.all_evaluated);
    std::ofstream csv(out / "front.csv");
    nas::write_front_csv(csv, archive.front);
  }
  if (!front_csv_nondominated(out / "front.csv")) throw Error("front.csv contains a dominated row");

  double threshold = o.min_accuracy;
  if (threshold < 0) {
    double best = 0;
    for (const auto& f : archive.front) best = std::max(best, f.objectives.accuracy);
    threshold = best - 0.03;
  }
  const auto pick = nas::pick_candidate(archive.front, threshold);
  io::write_json_file(out / "candidate_genome.json", nas::genome_to_json(pick.genome));
  io::write_json_file(out / "nas_report.json",
                      {{"seed", common.seed},
                       {"budget", o.evolve.budget},
                       {"population_size", o.evolve.population_size},
                       {"sample_size", o.evolve.sample_size},
                       {"epochs_per_candidate", o.epochs},
                       {"trainings", evaluator.trainings()},
                       {"front_size", archive.front.size()},
                       {"threshold", threshold},
                       {"candidate", nas::individual_to_json(pick)}});
  std::printf("front: %zu members, %zu trainings for %zu evaluations\n", archive.front.size(),
              evaluator.trainings(), archive.all_evaluated.size());
  std::printf("candidate %s: accuracy %.4f, %lld parameters, %lld MACs (threshold %.4f)\n",
              nas::canonical(pick.genome).c_str(), pick.objectives.accuracy,
              static_cast<long long>(pick.objectives.params), static_cast<long long>(pick.objectives.macs), threshold);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string data;
  std::vector<std::string> checkpoints;
  std::vector<std::string> against;
};

// Inputs are matched to the checkpoint's declared input shapes.
std::vector<nn::Example<float>> test_examples(const nn::Architecture& arch, std::span<const roi::RoiSample> samples) {
  std::vector<nn::Example<float>> out;
  for (const auto& s : samples) {
    if (s.split != roi::Split::kTest) continue;
    nn::Example<float> ex;
    ex.label = label_of(s.category);
    for (const nn::Shape& in : arch.inputs) {
      if (in == zoo::kSpectrumInput && s.roi.size() == in.size()) {
        ex.inputs.push_back(s.roi);
      } else if (in == zoo::kRcsInput && s.rcs.size() == in.size()) {
        ex.inputs.push_back(s.rcs);
      } else {
        throw ShapeMismatch("checkpoint input does not match the dataset's ROI or RCS layout");
      }
    }
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw InvalidConfig("dataset has no test samples");
  return out;
}

struct GroupResult {
  json report;
  eval::Matrix4 matrix{};
  double accuracy = 0;
};

GroupResult evaluate_group(const std::vector<std::string>& paths, std::span<const roi::RoiSample> samples) {
  GroupResult g;
  json per = json::array();
  std::vector<eval::ConfusionMatrix> cms;
  for (const auto& p : paths) {
    const auto ck = nn::load_checkpoint(p);
    const auto ex = test_examples(ck.model.architecture(), samples);
    const auto cm = eval::confusion(nn::predict<float>(ck.model, ex), nn::labels_of<float>(ex));
    cms.push_back(cm);
    per.push_back({{"checkpoint", p},
                   {"model", ck.extra.value("model", std::string("?"))},
                   {"test_mean_acc", eval::mean_accuracy_present(cm)},
                   {"counts", counts_json(cm)},
                   {"normalized", matrix_json(cm.normalized())}});
  }
  g.report["runs"] = per;
  if (cms.size() >= 2) {
    g.report["aggregate"] = aggregate_json(cms);
    const auto agg = eval::aggregate_runs(cms);
    g.matrix = agg.mean;
    g.accuracy = agg.mean_accuracy;
  } else {
    g.matrix = cms[0].normalized();
    g.accuracy = eval::mean_accuracy_present(cms[0]);
  }
  return g;
}

std::string side_by_side(const std::string& a, const std::string& b) {
  std::istringstream sa(a), sb(b);
  std::string la, lb, out;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    if (!ga && !gb) break;
    if (!ga) la.clear();
    if (!gb) lb.clear();
    la.resize(std::max<std::size_t>(la.size(), 66), ' ');
    out += la + "   " + lb + "\n";
  }
  return out;
}

int cmd_eval(const Common& common, const EvalOptions& o) {
  const auto ds = io::read_roi_dataset(o.data);
  OutputLock lock(common.out);
  const auto a = evaluate_group(o.checkpoints, ds.samples);
  json report = {{"checkpoints", a.report}};
  char title[96];
  std::snprintf(title, sizeof(title), "checkpoints (mean accuracy %.4f)", a.accuracy);
  std::string table = eval::format_matrix_table(a.matrix, title);
  if (!o.against.empty()) {
    const auto b = evaluate_group(o.against, ds.samples);
    report["against"] = b.report;
    std::snprintf(title, sizeof(title), "against (mean accuracy %.4f)", b.accuracy);
    table = side_by_side(table, eval::format_matrix_table(b.matrix, title));
  }
  std::printf("%s", table.c_str());
  std::ofstream csv(fs::path(common.out) / "confusion.csv");
  eval::write_matrix_csv(csv, a.matrix);
  io::write_json_file(fs::path(common.out) / "eval_report.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// knn

struct KnnOptions {
  std::string data;
  std::vector<int> k_set{eval::kKnnCandidates.begin(), eval::kKnnCandidates.end()};
};

int cmd_knn(const Common& common, const KnnOptions& o) {
  const auto ds = io::read_roi_dataset(o.data);
  const auto train = exp::knn_points(ds.samples, roi::Split::kTrain);
  const auto val = exp::knn_points(ds.samples, roi::Split::kValidation);
  const auto test = exp::knn_points(ds.samples, roi::Split::kTest);
  if (test.empty()) throw InvalidConfig("dataset has no test samples");
  OutputLock lock(common.out);
  const auto sel = eval::knn_select_k(train, val, o.k_set);
  std::vector<int> preds;
  for (const auto& q : test) preds.push_back(eval::knn_classify(train, q.features, sel.best_k));
  const auto cm = eval::confusion(preds, eval::labels_of(test));
  const double acc = eval::mean_accuracy_present(cm);
  json val_acc = json::object();
  for (const auto& [k, a] : sel.validation_accuracy) {
    val_acc[std::to_string(k)] = a;
    std::printf("k=%-3d validation mean accuracy %.4f\n", k, a);
  }
  std::printf("selected k=%d, test mean accuracy %.4f\n", sel.best_k, acc);
  std::printf("%s", eval::format_matrix_table(cm.normalized(), "kNN test confusion").c_str());
  std::ofstream csv(fs::path(common.out) / "knn_confusion.csv");
  eval::write_matrix_csv(csv, cm.normalized());
  io::write_json_file(fs::path(common.out) / "knn_report.json",
                      {{"k_set", o.k_set},
                       {"validation_accuracy", val_acc},
                       {"best_k", sel.best_k},
                       {"test_mean_acc", acc},
                       {"test_counts", counts_json(cm)}});
  return 0;
}

}  // namespace
}  // namespace radarnas::cli

int main(int argc, char** argv) {
  using namespace radarnas;
  using namespace radarnas::cli;
  CLI::App app{"RadarNAS: radar object classification with spectra, reflections and architecture search"};
  app.set_config("--config", "", "TOML-style configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  Common common;
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--seed", common.seed, "Global seed")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads for training")->capture_default_str()->check(
      CLI::PositiveNumber);

  SimulateOptions sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic raw radar dataset");
  sim_cmd->add_option("--tracks", sim_o.tracks, "Total tracks, split over categories")->capture_default_str();
  sim_cmd->add_option("--counts", sim_o.counts, "Tracks per category: car pedestrian two_wheeler overridable")
      ->expected(4);
  sim_cmd->add_option("--frames", sim_o.frames, "Frames per track")->capture_default_str();
  sim_cmd->add_option("--n-samples", sim_o.n_samples, "Fast-time samples per chirp")->capture_default_str();
  sim_cmd->add_option("--n-chirps", sim_o.n_chirps, "Chirps per frame")->capture_default_str();
  sim_cmd->add_option("--n-antennas", sim_o.n_antennas, "Receive antennas")->capture_default_str();
  sim_cmd->add_flag("--no-noise", sim_o.no_noise, "Disable receiver noise");

  PreprocessOptions pre_o;
  auto* pre_cmd = app.add_subcommand("preprocess", "FFT, CFAR, angles, RCS, association and ROI cutting");
  pre_cmd->add_option("--in", pre_o.in, "Raw dataset directory")->required();
  pre_cmd->add_option("--cfar-window", pre_o.cfar.window_cells, "CFAR window (cells)")->capture_default_str();
  pre_cmd->add_option("--cfar-guard", pre_o.cfar.guard_cells, "CFAR guard cells")->capture_default_str();
  pre_cmd->add_option("--cfar-rank", pre_o.cfar.rank_fraction, "CFAR rank fraction")->capture_default_str();
  pre_cmd->add_option("--cfar-threshold", pre_o.cfar.threshold_scale_db, "CFAR threshold (dB)")->capture_default_str();
  pre_cmd->add_option("--gate", pre_o.gate, "Association gate radius (m)")->capture_default_str();
  pre_cmd->add_option("--roi", pre_o.roi, "ROI edge length (bins)")->capture_default_str();
  pre_cmd->add_option("--rcs_len,--rcs-len", pre_o.rcs_len, "RCS vector length")->capture_default_str();

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train a model repeatedly and report test confusion");
  train_cmd->add_option("--data", train_o.data, "ROIDS1 dataset")->required();
  train_cmd->add_option("--model", train_o.model, "manual | spectrum[:genome.json] | hybrid[:genome.json] | reflection-only")
      ->capture_default_str();
  train_cmd->add_option("--runs", train_o.runs, "Independent initialisations")->capture_default_str();
  train_cmd->add_option("--epochs", train_o.epochs, "Epochs per run")->capture_default_str();
  train_cmd->add_option("--lr", train_o.lr, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--batch", train_o.batch, "Batch size")->capture_default_str();

  NasOptions nas_o;
  auto* nas_cmd = app.add_subcommand("nas", "Three-objective architecture search for the spectrum branch");
  nas_cmd->add_option("--data", nas_o.data, "ROIDS1 dataset")->required();
  nas_cmd->add_option("--budget", nas_o.evolve.budget, "Evaluated architectures")->capture_default_str();
  nas_cmd->add_option("--population", nas_o.evolve.population_size, "Population size")->capture_default_str();
  nas_cmd->add_option("--sample", nas_o.evolve.sample_size, "Tournament sample size")->capture_default_str();
  nas_cmd->add_option("--epochs", nas_o.epochs, "Training epochs per candidate")->capture_default_str();
  nas_cmd->add_option("--lr", nas_o.lr, "Adam learning rate")->capture_default_str();
  nas_cmd->add_option("--batch", nas_o.batch, "Batch size")->capture_default_str();
  nas_cmd->add_option("--min-accuracy", nas_o.min_accuracy,
                      "Candidate accuracy threshold (default: best front accuracy minus 0.03)");

  EvalOptions eval_o;
  auto* eval_cmd = app.add_subcommand("eval", "Confusion matrices of saved checkpoints on the test split");
  eval_cmd->add_option("--data", eval_o.data, "ROIDS1 dataset")->required();
  eval_cmd->add_option("--checkpoint", eval_o.checkpoints, "Checkpoint JSON (repeat to aggregate runs)")->required();
  eval_cmd->add_option("--against", eval_o.against, "Second group of checkpoints shown side by side");

  KnnOptions knn_o;
  auto* knn_cmd = app.add_subcommand("knn", "Distance-weighted kNN baseline on ROI and RCS features");
  knn_cmd->add_option("--data", knn_o.data, "ROIDS1 dataset")->required();
  knn_cmd->add_option("--knn_k_set,--k-set", knn_o.k_set, "Candidate k values")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(common, sim_o);
    if (pre_cmd->parsed()) return cmd_preprocess(common, pre_o);
    if (train_cmd->parsed()) return cmd_train(common, train_o);
    if (nas_cmd->parsed()) return cmd_nas(common, nas_o);
    if (eval_cmd->parsed()) return cmd_eval(common, eval_o);
    if (knn_cmd->parsed()) return cmd_knn(common, knn_o);
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const InvalidGenome& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
