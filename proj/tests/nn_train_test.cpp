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

#include "radarnas/nn_train.hpp"

#include <gtest/gtest.h>

#include <random>

namespace radarnas {
namespace {

using nn::Example;

nn::Architecture toy_arch() {
  nn::Architecture a;
  a.inputs = {{1, 1, 2}};
  a.branches = {{nn::FullyConnected{8}, nn::ReLU{}}};
  a.head = {nn::FullyConnected{4}, nn::Softmax{}};
  return a;
}

// Two Gaussian blobs with a margin; labels 0 and 1.
template <typename T>
std::vector<Example<T>> blobs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0, 0.3);
  std::vector<Example<T>> out;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double cx = label ? 1.5 : -1.5;
    out.push_back({{{static_cast<T>(cx + d(rng)), static_cast<T>(d(rng) - cx / 3)}}, label});
  }
  return out;
}

template <typename T>
std::vector<std::vector<T>> params_of(const nn::Model<T>& m) {
  std::vector<std::vector<T>> out;
  for (auto p : m.parameters()) out.emplace_back(p.begin(), p.end());
  return out;
}

template <typename T>
double accuracy(const nn::Model<T>& m, const std::vector<Example<T>>& data) {
  const auto preds = nn::predict<T>(m, data);
  int ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) ok += preds[i] == data[i].label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  nn::Model<float> m(toy_arch());
  m.init_he_uniform(1);
  const auto data = blobs<float>(64, 2);
  nn::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0;
  cfg.batch_size = 16;
  const auto r = nn::train<float>(m, data, data, cfg);
  EXPECT_EQ(params_of(r.model), params_of(m));
}

TEST(Train, SeparableToySetReachesFullAccuracy) {
  nn::Model<float> m(toy_arch());
  m.init_he_uniform(3);
  const auto train = blobs<float>(200, 4);
  const auto val = blobs<float>(60, 5);
  nn::TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.01;
  const auto r = nn::train<float>(m, train, val, cfg);
  EXPECT_GE(accuracy(r.model, train), 0.99);
  ASSERT_EQ(r.history.size(), 50u);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(Train, ReturnsBestValidationSnapshot) {
  nn::Model<float> m(toy_arch());
  m.init_he_uniform(6);
  const auto train = blobs<float>(64, 7);
  const auto val = blobs<float>(32, 8);
  nn::TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 16;
  const auto r = nn::train<float>(m, train, val, cfg);
  double best = -1;
  for (const auto& h : r.history) best = std::max(best, h.val_mean_acc);
  EXPECT_EQ(r.best_val_acc, best);
  EXPECT_EQ(r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_mean_acc, best);
  EXPECT_EQ(nn::evaluate_mean_accuracy<float>(r.model, val), best);
  for (const auto& h : r.history) {
    if (h.val_mean_acc == best) {
      EXPECT_GE(h.val_loss, r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_loss);
    }
  }
}

TEST(Train, FixedSeedReproducesHistory) {
  const auto train = blobs<float>(96, 9);
  const auto val = blobs<float>(20, 10);
  nn::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 20;
  cfg.rng_seed = 77;
  auto run = [&](int threads) {
    nn::Model<float> m(toy_arch());
    m.init_he_uniform(11);
    auto c = cfg;
    c.threads = threads;
    return nn::train<float>(m, train, val, c);
  };
  const auto a = run(1), b = run(1), c = run(3);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].train_loss, c.history[i].train_loss);
  }
  EXPECT_EQ(params_of(a.model), params_of(b.model));
  EXPECT_EQ(params_of(a.model), params_of(c.model));
}

TEST(Train, LossScalesWithClassWeights) {
  nn::Model<double> m(toy_arch());
  m.init_he_uniform(12);
  const auto data = blobs<double>(40, 13);
  std::vector<const Example<double>*> batch;
  for (const auto& e : data) batch.push_back(&e);
  const std::array<double, kNumClasses> w = {1.0, 3.0, 1.0, 1.0};
  for (double c : {0.5, 2.0, 7.25}) {
    std::array<double, kNumClasses> wc{};
    for (int i = 0; i < kNumClasses; ++i) wc[i] = c * w[i];
    nn::Gradients<double> g1(m), g2(m);
    const double l1 = nn::batch_loss_and_grad<double>(m, batch, w, g1, 1);
    const double l2 = nn::batch_loss_and_grad<double>(m, batch, wc, g2, 1);
    EXPECT_NEAR(l2, c * l1, 1e-12 * c * l1);
  }
}

TEST(Train, RejectsBadConfig) {
  nn::Model<float> m(toy_arch());
  const auto data = blobs<float>(4, 1);
  nn::TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(nn::train<float>(m, data, data, cfg), InvalidConfig);
  cfg = {};
  cfg.class_weights[2] = 0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  EXPECT_THROW(nn::train<float>(m, {}, data, nn::TrainConfig{}), InvalidConfig);
}

TEST(Train, ClassWeightsFromTrainingLabels) {
  std::vector<Example<float>> data;
  for (int i = 0; i < 8; ++i) data.push_back({{{0, 0}}, i < 5 ? 0 : (i < 7 ? 1 : 3)});
  const auto w = nn::class_weights_for<float>(data);
  EXPECT_DOUBLE_EQ(w[0], 8.0 / 20);
  EXPECT_DOUBLE_EQ(w[1], 8.0 / 8);
  EXPECT_DOUBLE_EQ(w[2], 1.0);  // absent class
  EXPECT_DOUBLE_EQ(w[3], 8.0 / 4);
}

}  // namespace
}  // namespace radarnas
