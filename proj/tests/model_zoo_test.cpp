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

#include "radarnas/model_zoo.hpp"
#include "radarnas/nn_train.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace radarnas {
namespace {

using nn::Architecture;

std::vector<float> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<float> run(const nn::Model<float>& m, const std::vector<std::vector<float>>& in) {
  const std::vector<std::span<const float>> s(in.begin(), in.end());
  return nn::predict_proba(m, std::span<const std::span<const float>>(s));
}

// Genomes along a random mutation chain starting at the seed.
std::vector<nas::Genome> random_genomes(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<nas::Genome> out;
  nas::Genome g = zoo::build_seed();
  while (static_cast<int>(out.size()) < n) {
    g = nas::mutate(g, rng);
    out.push_back(g);
  }
  return out;
}

TEST(ManualCnn, ParameterBudget) {
  const auto a = zoo::build_manual_cnn();
  const auto n = nn::count_params(a);
  EXPECT_GE(n, 95000);
  EXPECT_LE(n, 105000);
  // conv 160 + conv 5800 + fc 1440*64+64 + fc 260
  EXPECT_EQ(n, 160 + 5800 + 92224 + 260);
  EXPECT_EQ(a.inputs.front().h, 32);
  EXPECT_EQ(a.inputs.front().w, 32);
  EXPECT_EQ(a.inputs.front().c, 1);
  EXPECT_EQ(nn::output_shape(a).size(), 4u);
  EXPECT_NO_THROW(nn::validate_classifier(a));
}

TEST(Seed, SmallerThanManualAndInSearchSpace) {
  const auto seed = zoo::build_seed();
  EXPECT_TRUE(nas::is_valid(seed));
  ASSERT_EQ(seed.layers.size(), 1u);
  EXPECT_TRUE(seed.layers[0].is_conv());
  EXPECT_EQ(seed.layers[0].kernel, 3);
  EXPECT_EQ(seed.layers[0].filters, 8);
  const auto n = nn::count_params(zoo::build_spectrum_model(seed));
  EXPECT_EQ(n, 80 + 800 * 64 + 64 + 260);
  EXPECT_LT(n, nn::count_params(zoo::build_manual_cnn()));
}

TEST(Seed, TrainsWithoutShapeErrors) {
  nn::Model<float> m(zoo::build_spectrum_model(zoo::build_seed()));
  m.init_he_uniform(1);
  std::mt19937_64 rng(2);
  std::vector<nn::Example<float>> data;
  for (int i = 0; i < 8; ++i) data.push_back({{random_vector(1024, rng)}, i % 4});
  nn::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  EXPECT_NO_THROW(nn::train<float>(m, data, data, cfg));
}

TEST(SpectrumModel, CollapsingGenomeIsRejected) {
  nas::Genome g;
  g.layers = {nas::Gene::conv(7, 3, 8), nas::Gene::conv(7, 3, 8), nas::Gene::conv(3, 1, 8)};
  EXPECT_THROW(zoo::build_spectrum_model(g), InvalidGenome);
  EXPECT_THROW(zoo::build_deephybrid(g), InvalidGenome);
}

TEST(SpectrumModel, SingleTrailingSoftmax) {
  for (const auto& g : random_genomes(40, 3)) {
    const auto a = zoo::build_spectrum_model(g);
    int softmaxes = 0;
    nn::walk_architecture(a, [&](const nn::LayerSpec& l, const nn::Shape&, const nn::Shape&) {
      softmaxes += std::holds_alternative<nn::Softmax>(l);
    });
    EXPECT_EQ(softmaxes, 1);
    EXPECT_TRUE(std::holds_alternative<nn::Softmax>(a.head.back()));
    EXPECT_NO_THROW(nn::validate_classifier(a));
  }
}

TEST(DeepHybrid, AddsExactly560Parameters) {
  EXPECT_EQ(nn::count_params(zoo::build_deephybrid(zoo::build_seed())) -
                nn::count_params(zoo::build_spectrum_model(zoo::build_seed())),
            560);
  for (const auto& g : random_genomes(60, 4)) {
    EXPECT_EQ(nn::count_params(zoo::build_deephybrid(g)) - nn::count_params(zoo::build_spectrum_model(g)), 560)
        << nas::canonical(g);
  }
}

TEST(DeepHybrid, ReflectionOrderDoesNotMatter) {
  nn::Model<float> m(zoo::build_deephybrid(zoo::build_seed()));
  m.init_he_uniform(5);
  std::mt19937_64 rng(6);
  const auto roi = random_vector(1024, rng);
  auto rcs = random_vector(30, rng);
  std::fill(rcs.begin() + 12, rcs.end(), 0.0f);
  const auto base = run(m, {roi, rcs});
  EXPECT_NEAR(std::accumulate(base.begin(), base.end(), 0.0f), 1.0f, 1e-6f);
  for (int trial = 0; trial < 10; ++trial) {
    auto perm = rcs;
    std::shuffle(perm.begin(), perm.begin() + 12, rng);
    const auto out = run(m, {roi, perm});
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(out[c], base[c], 1e-6f);
  }
}

TEST(DeepHybrid, ZeroRcsStillPredicts) {
  nn::Model<float> m(zoo::build_deephybrid(zoo::build_seed()));
  m.init_he_uniform(7);
  std::mt19937_64 rng(8);
  const auto out = run(m, {random_vector(1024, rng), std::vector<float>(30, 0.0f)});
  ASSERT_EQ(out.size(), 4u);
  for (float p : out) EXPECT_TRUE(std::isfinite(p));
  EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0f), 1.0f, 1e-6f);
}

TEST(ReflectionOnly, CountAndShape) {
  const auto a = zoo::build_reflection_only();
  EXPECT_EQ(nn::count_params(a), 884);
  EXPECT_EQ(nn::count_params(a), 48 + 576 + 260);
  ASSERT_EQ(a.inputs.size(), 1u);
  EXPECT_EQ(a.inputs[0].size(), 30u);
  EXPECT_EQ(nn::output_shape(a).size(), 4u);
}

TEST(ReflectionOnly, PermutationInvariantOverAllRows) {
  nn::Model<float> m(zoo::build_reflection_only());
  m.init_he_uniform(9);
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rcs = random_vector(30, rng);
    auto perm = rcs;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = run(m, {rcs});
    const auto b = run(m, {perm});
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(a[c], b[c], 1e-6f);
  }
}

TEST(ReflectionOnly, PointwiseRowsAreIndependent) {
  nn::Model<float> m(zoo::build_reflection_only());
  m.init_he_uniform(11);
  // output of the ReLU after the second pointwise conv, before pooling
  const auto& pre_pool = m.nodes()[3];
  ASSERT_TRUE(std::holds_alternative<nn::ReLU>(pre_pool.spec));
  ASSERT_EQ(pre_pool.out.h, 30);
  ASSERT_EQ(pre_pool.out.c, 8);
  std::mt19937_64 rng(12);
  const auto rcs = random_vector(30, rng);
  nn::Cache<float> c1, c2;
  std::vector<std::span<const float>> s1 = {rcs};
  nn::forward(m, std::span<const std::span<const float>>(s1), c1);
  for (int row : {0, 13, 29}) {
    auto changed = rcs;
    changed[row] += 0.7f;
    std::vector<std::span<const float>> s2 = {changed};
    nn::forward(m, std::span<const std::span<const float>>(s2), c2);
    const auto& a = c1.slots[static_cast<std::size_t>(pre_pool.output)];
    const auto& b = c2.slots[static_cast<std::size_t>(pre_pool.output)];
    for (int r = 0; r < 30; ++r) {
      if (r == row) continue;
      for (int ch = 0; ch < 8; ++ch) EXPECT_EQ(a[r * 8 + ch], b[r * 8 + ch]);
    }
  }
}

TEST(Builders, ProbabilitiesForEveryKind) {
  std::mt19937_64 rng(13);
  const auto genomes = random_genomes(5, 14);
  for (auto kind : {zoo::ModelKind::kManual, zoo::ModelKind::kSpectrum, zoo::ModelKind::kHybrid,
                    zoo::ModelKind::kReflectionOnly}) {
    for (const auto& g : genomes) {
      nn::Model<float> m(zoo::build_model(kind, g));
      m.init_he_uniform(15);
      std::vector<std::vector<float>> in;
      if (zoo::uses_roi(kind)) in.push_back(random_vector(1024, rng));
      if (zoo::uses_rcs(kind)) in.push_back(random_vector(30, rng));
      const auto p = run(m, in);
      EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6) << zoo::model_kind_name(kind);
    }
  }
}

}  // namespace
}  // namespace radarnas
