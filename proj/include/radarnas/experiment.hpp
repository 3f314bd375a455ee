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

// Glue between ROI datasets and models: example conversion, repeated training
// runs with confusion-matrix evaluation, NAS candidate scoring and kNN
// features.

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "radarnas/association_roi.hpp"
#include "radarnas/common.hpp"
#include "radarnas/eval_metrics.hpp"
#include "radarnas/genome.hpp"
#include "radarnas/model_zoo.hpp"
#include "radarnas/nas_engine.hpp"
#include "radarnas/nn_train.hpp"
#include "radarnas/tensor_nn.hpp"

namespace radarnas::exp {

using Examples = std::vector<nn::Example<float>>;

inline nn::Example<float> to_example(const roi::RoiSample& s, zoo::ModelKind kind) {
  nn::Example<float> ex;
  ex.label = label_of(s.category);
  if (zoo::uses_roi(kind)) ex.inputs.push_back(s.roi);
  if (zoo::uses_rcs(kind)) ex.inputs.push_back(s.rcs);
  return ex;
}

inline Examples examples_for(std::span<const roi::RoiSample> samples, zoo::ModelKind kind, roi::Split split) {
  Examples out;
  for (const auto& s : samples) {
    if (s.split == split) out.push_back(to_example(s, kind));
  }
  return out;
}

struct SplitExamples {
  Examples train, val, test;
};

inline SplitExamples split_examples(std::span<const roi::RoiSample> samples, zoo::ModelKind kind) {
  return {examples_for(samples, kind, roi::Split::kTrain), examples_for(samples, kind, roi::Split::kValidation),
          examples_for(samples, kind, roi::Split::kTest)};
}

struct RunResult {
  nn::TrainResult<float> trained;
  eval::ConfusionMatrix test_confusion;
  double test_mean_acc = 0;  // over classes present in the test split
};

// Trains `arch` once with initialisation seed derive_seed(seed, "init", run)
// and batch-order seed derive_seed(seed, "batches", run).
inline RunResult run_once(const nn::Architecture& arch, const SplitExamples& data, nn::TrainConfig cfg,
                          std::uint64_t seed, int run, std::ostream* log = nullptr) {
  nn::Model<float> model(arch);
  model.init_he_uniform(derive_seed(seed, "init", static_cast<std::uint64_t>(run)));
  cfg.rng_seed = derive_seed(seed, "batches", static_cast<std::uint64_t>(run));
  RunResult r{nn::train<float>(std::move(model), data.train, data.val, cfg, log), {}, 0};
  if (!data.test.empty()) {
    r.test_confusion = eval::confusion(nn::predict<float>(r.trained.model, data.test), nn::labels_of<float>(data.test));
    r.test_mean_acc = eval::mean_accuracy_present(r.test_confusion);
  }
  return r;
}

// Class weights from the training split, as used for every model.
inline std::array<double, kNumClasses> training_class_weights(std::span<const roi::RoiSample> samples) {
  std::vector<int> labels;
  for (const auto& s : samples) {
    if (s.split == roi::Split::kTrain) labels.push_back(label_of(s.category));
  }
  return nn::inverse_frequency_weights(labels);
}

// Scores NAS candidates: spectrum model built from the genome, trained with
// the reduced budget, seeded from (seed, genome id).
inline nas::AccuracyFn nas_accuracy_fn(const SplitExamples& spectrum_data, nn::TrainConfig cfg, std::uint64_t seed) {
  return [&spectrum_data, cfg, seed](const nas::Genome& g) {
    nn::Model<float> model(zoo::build_spectrum_model(g));
    model.init_he_uniform(derive_seed(seed, "nas_init", static_cast<std::uint64_t>(g.id)));
    nn::TrainConfig c = cfg;
    c.rng_seed = derive_seed(seed, "nas_batches", static_cast<std::uint64_t>(g.id));
    return nn::train<float>(std::move(model), spectrum_data.train, spectrum_data.val, c).best_val_acc;
  };
}

// kNN feature: flattened ROI followed by the RCS vector.
inline std::vector<eval::LabeledPoint> knn_points(std::span<const roi::RoiSample> samples, roi::Split split) {
  std::vector<eval::LabeledPoint> out;
  for (const auto& s : samples) {
    if (s.split != split) continue;
    eval::LabeledPoint p;
    p.features = s.roi;
    p.features.insert(p.features.end(), s.rcs.begin(), s.rcs.end());
    p.label = label_of(s.category);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace radarnas::exp
