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

// Mini-batch training with Adam and best-validation snapshotting.
//
// Each batch is cut into fixed chunks of kChunkSize samples whose gradients are
// computed independently and summed in chunk order, so results do not depend
// on the number of worker threads.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "radarnas/common.hpp"
#include "radarnas/eval_metrics.hpp"
#include "radarnas/tensor_nn.hpp"

namespace radarnas::nn {

template <typename T>
struct Example {
  std::vector<std::vector<T>> inputs;
  int label = 0;
};

struct TrainConfig {
  int epochs = 60;
  double learning_rate = 0.003;
  int batch_size = 128;
  std::array<double, kNumClasses> class_weights{1.0, 1.0, 1.0, 1.0};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t rng_seed = 0;
  int threads = 1;

  void validate() const {
    if (epochs < 0) throw InvalidConfig("epochs must be >= 0");
    if (!(learning_rate >= 0)) throw InvalidConfig("learning_rate must be >= 0");
    if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
    for (double w : class_weights) {
      if (!(w > 0)) throw InvalidConfig("class weights must be > 0");
    }
    if (threads < 1) throw InvalidConfig("threads must be >= 1");
  }

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_mean_acc = 0;
  double val_loss = 0;  // unweighted cross-entropy, tie-breaker for snapshots
};

template <typename T>
struct TrainResult {
  Model<T> model;  // best-validation snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_acc = 0;
};

inline constexpr std::size_t kChunkSize = 16;

template <typename T>
std::vector<std::span<const T>> input_spans(const Example<T>& ex) {
  std::vector<std::span<const T>> out;
  out.reserve(ex.inputs.size());
  for (const auto& v : ex.inputs) out.emplace_back(v);
  return out;
}

template <typename T>
int argmax(std::span<const T> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

template <typename T>
std::vector<int> predict(const Model<T>& model, std::span<const Example<T>> data) {
  std::vector<int> out;
  out.reserve(data.size());
  Cache<T> cache;
  for (const auto& ex : data) {
    const auto spans = input_spans(ex);
    out.push_back(argmax(forward(model, std::span<const std::span<const T>>(spans), cache)));
  }
  return out;
}

template <typename T>
std::vector<int> labels_of(std::span<const Example<T>> data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(ex.label);
  return out;
}

struct Evaluation {
  double mean_acc = 0;  // over the classes present in the data
  double loss = 0;      // mean unweighted cross-entropy
};

template <typename T>
Evaluation evaluate(const Model<T>& model, std::span<const Example<T>> data) {
  Evaluation e;
  if (data.empty()) return e;
  std::vector<int> preds;
  preds.reserve(data.size());
  Cache<T> cache;
  for (const auto& ex : data) {
    const auto spans = input_spans(ex);
    const auto probs = forward(model, std::span<const std::span<const T>>(spans), cache);
    preds.push_back(argmax(probs));
    e.loss += static_cast<double>(loss_weighted_ce<T>(probs, ex.label, T(1)));
  }
  e.loss /= static_cast<double>(data.size());
  e.mean_acc = eval::mean_accuracy_present(eval::confusion(preds, labels_of(data)));
  return e;
}

template <typename T>
double evaluate_mean_accuracy(const Model<T>& model, std::span<const Example<T>> data) {
  return evaluate(model, data).mean_acc;
}

// Mean weighted cross-entropy of one batch; accumulates d(loss)/d(params)
// into `grads`.
template <typename T>
double batch_loss_and_grad(const Model<T>& model, std::span<const Example<T>* const> batch,
                           const std::array<double, kNumClasses>& weights, Gradients<T>& grads,
                           int threads) {
  const std::size_t n = batch.size();
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Gradients<T>> chunk_grads(n_chunks, Gradients<T>(model));
  std::vector<double> chunk_loss(n_chunks, 0.0);
  const T scale = static_cast<T>(1.0 / static_cast<double>(n));

  auto run_chunk = [&](std::size_t c) {
    Cache<T> cache;
    for (std::size_t i = c * kChunkSize; i < std::min(n, (c + 1) * kChunkSize); ++i) {
      const Example<T>& ex = *batch[i];
      const auto spans = input_spans(ex);
      const auto probs = forward(model, std::span<const std::span<const T>>(spans), cache);
      const T w = static_cast<T>(weights[static_cast<std::size_t>(ex.label)]);
      chunk_loss[c] += static_cast<double>(loss_weighted_ce<T>(probs, ex.label, w));
      std::vector<T> g = loss_weighted_ce_grad<T>(probs, ex.label, w);
      for (auto& v : g) v *= scale;
      backward(model, cache, std::span<const T>(g), chunk_grads[c]);
    }
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  if (n_workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = static_cast<std::size_t>(t); c < n_chunks; c += static_cast<std::size_t>(n_workers)) {
          run_chunk(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double loss = 0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    grads.add(chunk_grads[c]);
    loss += chunk_loss[c];
  }
  return loss / static_cast<double>(n);
}

// Trains `model` over shuffled batches. The returned result holds the snapshot
// with the best validation mean accuracy; ties go to the lower validation loss,
// then the earlier epoch. Without validation data the final parameters are
// returned.
template <typename T>
TrainResult<T> train(Model<T> model, std::span<const Example<T>> train_set,
                     std::span<const Example<T>> val_set, const TrainConfig& cfg,
                     std::ostream* log = nullptr) {
  cfg.validate();
  if (train_set.empty()) throw InvalidConfig("train: empty training split");
  Rng rng(derive_seed(cfg.rng_seed, "shuffle", 0));
  AdamState<T> adam;
  const AdamConfig adam_cfg = cfg.adam();

  TrainResult<T> result;
  result.model = model;
  result.best_val_acc = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const Example<T>*> batch;
  Gradients<T> grads(model);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);
      grads.zero();
      const double loss = batch_loss_and_grad<T>(model, batch, cfg.class_weights, grads, cfg.threads);
      loss_sum += loss * static_cast<double>(end - start);
      adam_step<T>(model.parameters(), grads.tensors(), adam, adam_cfg);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    const Evaluation ev = evaluate<T>(model, val_set);
    rec.val_mean_acc = ev.mean_acc;
    rec.val_loss = ev.loss;
    result.history.push_back(rec);
    const bool better = rec.val_mean_acc > result.best_val_acc ||
                        (rec.val_mean_acc == result.best_val_acc && rec.val_loss < best_val_loss);
    if (val_set.empty() || better) {
      result.best_val_acc = rec.val_mean_acc;
      best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
    if (log) {
      *log << "epoch " << epoch << " loss " << rec.train_loss << " val_mean_acc " << rec.val_mean_acc << '\n';
    }
  }
  if (cfg.epochs == 0) result.best_val_acc = evaluate_mean_accuracy<T>(model, val_set);
  return result;
}

// Inverse-frequency class weights from the labels of a training split.
template <typename T>
std::array<double, kNumClasses> class_weights_for(std::span<const Example<T>> data) {
  const std::vector<int> labels = labels_of(data);
  return inverse_frequency_weights(labels);
}

}  // namespace radarnas::nn
