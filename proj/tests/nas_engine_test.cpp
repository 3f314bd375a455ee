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

#include "radarnas/nas_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "radarnas/model_zoo.hpp"

namespace radarnas {
namespace {

using nas::Gene;
using nas::Genome;
using nas::Individual;
using nas::Objectives;

Individual make(std::int64_t id, double acc, std::int64_t params, std::int64_t macs) {
  Individual ind;
  ind.genome = zoo::build_seed();
  ind.genome.id = id;
  ind.objectives = {acc, params, macs};
  return ind;
}

std::vector<Individual> random_population(std::size_t n, std::mt19937_64& rng) {
  // Coarse grids so ties and duplicates show up.
  std::uniform_int_distribution<int> a(0, 9), p(1, 8), m(1, 8);
  std::vector<Individual> pop;
  for (std::size_t i = 0; i < n; ++i) pop.push_back(make(static_cast<std::int64_t>(i), a(rng) / 10.0, p(rng) * 1000, m(rng) * 1000));
  return pop;
}

// Fake trainer: accuracy is a fixed function of the architecture.
double fake_accuracy(const Genome& g) {
  return static_cast<double>(nas::genome_hash(g) % 1000) / 1000.0;
}

TEST(Dominates, Examples) {
  EXPECT_TRUE(nas::dominates({0.9, 10000, 1000000}, {0.8, 20000, 2000000}));
  EXPECT_FALSE(nas::dominates({0.9, 10000, 1000000}, {0.9, 10000, 1000000}));
  EXPECT_FALSE(nas::dominates({0.9, 30000, 1000000}, {0.8, 20000, 2000000}));
  EXPECT_TRUE(nas::dominates({0.9, 10000, 1000}, {0.9, 10000, 1001}));
}

TEST(Dominates, StrictPartialOrder) {
  std::mt19937_64 rng(1);
  const auto pop = random_population(60, rng);
  for (const auto& a : pop) {
    EXPECT_FALSE(nas::dominates(a.objectives, a.objectives));
    for (const auto& b : pop) {
      if (nas::dominates(a.objectives, b.objectives)) {
        EXPECT_FALSE(nas::dominates(b.objectives, a.objectives));
      }
      for (const auto& c : pop) {
        if (nas::dominates(a.objectives, b.objectives) && nas::dominates(b.objectives, c.objectives)) {
          EXPECT_TRUE(nas::dominates(a.objectives, c.objectives));
        }
      }
    }
  }
}

TEST(NondominatedSort, MutuallyNondominatedFormOneFront) {
  const std::vector<Individual> pop = {make(0, 0.9, 30000, 3000), make(1, 0.8, 20000, 2000), make(2, 0.7, 10000, 1000)};
  const auto fronts = nas::nondominated_sort(pop);
  ASSERT_EQ(fronts.size(), 1u);
  EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1, 2}));
}

TEST(NondominatedSort, ChainGivesSingletons) {
  const std::vector<Individual> pop = {make(0, 0.7, 30000, 3000), make(1, 0.9, 10000, 1000), make(2, 0.8, 20000, 2000)};
  const auto fronts = nas::nondominated_sort(pop);
  ASSERT_EQ(fronts.size(), 3u);
  EXPECT_EQ(fronts[0], std::vector<std::size_t>{1});
  EXPECT_EQ(fronts[1], std::vector<std::size_t>{2});
  EXPECT_EQ(fronts[2], std::vector<std::size_t>{0});
}

// Peeling oracle: repeatedly remove the set nobody remaining dominates.
std::vector<int> brute_force_ranks(const std::vector<Individual>& pop) {
  std::vector<int> rank(pop.size(), -1);
  int r = 0;
  for (std::size_t assigned = 0; assigned < pop.size(); ++r) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pop.size() && !dominated; ++j) {
        dominated = rank[j] < 0 && nas::dominates(pop[j].objectives, pop[i].objectives);
      }
      if (!dominated) layer.push_back(i);
    }
    for (std::size_t i : layer) rank[i] = r;
    assigned += layer.size();
  }
  return rank;
}

TEST(NondominatedSort, MatchesPeelingOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = random_population(1 + rng() % 100, rng);
    const auto expect = brute_force_ranks(pop);
    const auto fronts = nas::nondominated_sort(pop);
    std::size_t covered = 0;
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      covered += fronts[f].size();
      for (std::size_t i : fronts[f]) EXPECT_EQ(expect[i], static_cast<int>(f));
      for (std::size_t k = 1; k < fronts[f].size(); ++k) EXPECT_LT(pop[fronts[f][k - 1]].id(), pop[fronts[f][k]].id());
    }
    EXPECT_EQ(covered, pop.size());
  }
}

TEST(Crowding, BoundaryAndInterior) {
  const std::vector<Objectives> two = {{0.9, 1, 1}, {0.8, 2, 2}};
  for (double d : nas::crowding_distance(two)) EXPECT_TRUE(std::isinf(d));
  // Collinear: the middle point's neighbours span each axis's full range,
  // contributing 1 per axis.
  const std::vector<Objectives> three = {{0.9, 30, 30}, {0.8, 20, 20}, {0.7, 10, 10}};
  const auto d = nas::crowding_distance(three);
  EXPECT_TRUE(std::isinf(d[0]));
  EXPECT_TRUE(std::isinf(d[2]));
  EXPECT_DOUBLE_EQ(d[1], 3.0);
  EXPECT_THROW(nas::crowding_distance({}), InvalidConfig);
}

TEST(Crowding, IdenticalObjectivesStayFinite) {
  const std::vector<Objectives> same(5, Objectives{0.5, 100, 100});
  const auto d = nas::crowding_distance(same);
  int inf = 0;
  for (double v : d) {
    if (std::isinf(v)) {
      ++inf;
    } else {
      EXPECT_EQ(v, 0.0);
    }
  }
  EXPECT_EQ(inf, 2);
}

TEST(Ranking, InvariantToObjectiveScaling) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto pop = random_population(40, rng);
    const auto base = nas::rank_population(pop);
    for (auto& ind : pop) {
      ind.objectives.params *= 7;
      ind.objectives.macs *= 3;
    }
    const auto scaled = nas::rank_population(pop);
    EXPECT_EQ(base.rank, scaled.rank);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (std::isinf(base.crowding[i])) {
        EXPECT_TRUE(std::isinf(scaled.crowding[i]));
      } else {
        EXPECT_NEAR(base.crowding[i], scaled.crowding[i], 1e-12);
      }
    }
  }
}

TEST(Evaluator, MemoisesByArchitecture) {
  int calls = 0;
  nas::Evaluator ev([&](const Genome& g) {
    ++calls;
    return fake_accuracy(g);
  });
  Genome g = zoo::build_seed();
  bool cached = true;
  const auto a = ev.evaluate(g, &cached);
  EXPECT_FALSE(cached);
  g.id = 99;
  const auto b = ev.evaluate(g, &cached);
  EXPECT_TRUE(cached);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ev.trainings(), 1u);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(a.params, nn::count_params(zoo::build_spectrum_model(g)));
  EXPECT_EQ(a.macs, nn::count_macs(zoo::build_spectrum_model(g)));
}

TEST(Mutation, Preconditions) {
  Genome full;
  for (std::size_t i = 0; i < nas::kMaxGenomeLength; ++i) full.layers.push_back(Gene::conv(1, 1, 8));
  const auto m = nas::applicable_mutations(full);
  EXPECT_EQ(std::count(m.begin(), m.end(), nas::Mutation::kInsertConv), 0);
  EXPECT_EQ(std::count(m.begin(), m.end(), nas::Mutation::kInsertPool), 0);
  const auto s = nas::applicable_mutations(zoo::build_seed());
  EXPECT_EQ(std::count(s.begin(), s.end(), nas::Mutation::kRemoveConv), 0);
  EXPECT_EQ(std::count(s.begin(), s.end(), nas::Mutation::kRemovePool), 0);
}

TEST(Mutation, ChildrenStayValid) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Genome g = zoo::build_seed();
    for (int step = 0; step < 30; ++step) {
      g = nas::mutate(g, rng);
      ASSERT_TRUE(nas::is_valid(g)) << nas::canonical(g);
      ASSERT_LE(g.layers.size(), nas::kMaxGenomeLength);
    }
  }
}

// At most five mutation types are ever applicable, so each step inserts a conv
// with probability >= 1/5 and 10 steps succeed with probability
// >= 1 - 0.8^10 ~= 0.893. The observed rate is about 0.92.
TEST(Mutation, SeedGrowsASecondConvQuickly) {
  int reached = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    Genome g = zoo::build_seed();
    for (int step = 0; step < 10 && g.count_conv() < 2; ++step) g = nas::mutate(g, rng);
    reached += g.count_conv() >= 2;
  }
  EXPECT_GE(reached, 870);  // bound minus 2.3 sigma of sampling noise
}

TEST(Evolve, BudgetEqualToPopulationKeepsInitialMembers) {
  nas::Evaluator ev(fake_accuracy);
  Rng rng(4);
  const auto archive = nas::evolve(zoo::build_seed(), {8, 8, 2}, rng, ev);
  ASSERT_EQ(archive.all_evaluated.size(), 8u);
  EXPECT_EQ(nas::canonical(archive.all_evaluated[0].genome), nas::canonical(zoo::build_seed()));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(archive.all_evaluated[i].age, 0);
    EXPECT_EQ(archive.all_evaluated[i].id(), static_cast<std::int64_t>(i));
    if (i) {
      EXPECT_EQ(archive.all_evaluated[i].genome.parent_id, std::optional<std::int64_t>(0));
    }
  }
}

TEST(Evolve, FrontIsNondominatedAndReproducible) {
  auto run = [](std::uint64_t seed) {
    nas::Evaluator ev(fake_accuracy);
    Rng rng(seed);
    return nas::evolve(zoo::build_seed(), {60, 20, 5}, rng, ev);
  };
  const auto a = run(5), b = run(5);
  ASSERT_EQ(a.all_evaluated.size(), 60u);
  EXPECT_TRUE(nas::front_is_nondominated(a));
  ASSERT_EQ(a.all_evaluated.size(), b.all_evaluated.size());
  for (std::size_t i = 0; i < a.all_evaluated.size(); ++i) {
    EXPECT_EQ(nas::canonical(a.all_evaluated[i].genome), nas::canonical(b.all_evaluated[i].genome));
    EXPECT_EQ(a.all_evaluated[i].objectives, b.all_evaluated[i].objectives);
  }
  std::set<std::int64_t> params;
  std::set<std::string> names;
  for (const auto& f : a.front) {
    params.insert(f.objectives.params);
    EXPECT_TRUE(names.insert(nas::canonical(f.genome)).second);
  }
  EXPECT_GE(params.size(), 2u);
  for (const auto& ind : a.all_evaluated) {
    bool dominated = false;
    for (const auto& f : a.front) dominated = dominated || nas::dominates(f.objectives, ind.objectives);
    const bool on_front = names.count(nas::canonical(ind.genome)) > 0;
    EXPECT_TRUE(dominated || on_front) << nas::canonical(ind.genome);
  }
}

TEST(Evolve, RejectsBadConfig) {
  nas::Evaluator ev(fake_accuracy);
  Rng rng(6);
  EXPECT_THROW(nas::evolve(zoo::build_seed(), {10, 20, 5}, rng, ev), InvalidConfig);
  EXPECT_THROW(nas::evolve(zoo::build_seed(), {60, 4, 5}, rng, ev), InvalidConfig);
  EXPECT_THROW(nas::evolve(zoo::build_seed(), {60, 20, 1}, rng, ev), InvalidConfig);
}

TEST(PickCandidate, SmallestModelAboveThreshold) {
  const std::vector<Individual> front = {make(0, 0.95, 90000, 9000), make(1, 0.85, 30000, 3000),
                                         make(2, 0.60, 5000, 500)};
  EXPECT_EQ(nas::pick_candidate(front, 0.0).id(), 2);
  EXPECT_EQ(nas::pick_candidate(front, 0.8).id(), 1);
  EXPECT_EQ(nas::pick_candidate(front, 0.95).id(), 0);
  EXPECT_THROW(nas::pick_candidate(front, 0.99), NoCandidateMeetsThreshold);
  const std::vector<Individual> tie = {make(3, 0.85, 100000, 10), make(4, 0.85, 14000, 10)};
  EXPECT_EQ(nas::pick_candidate(tie, 0.84).objectives.params, 14000);
}

TEST(Persistence, JsonRoundTripAndCsv) {
  nas::Evaluator ev(fake_accuracy);
  Rng rng(7);
  const auto archive = nas::evolve(zoo::build_seed(), {25, 10, 3}, rng, ev);
  std::stringstream ss;
  nas::write_archive_jsonl(ss, archive.all_evaluated);
  std::string line;
  std::size_t i = 0;
  while (std::getline(ss, line)) {
    const auto ind = nas::individual_from_json(nlohmann::json::parse(line));
    const auto& ref = archive.all_evaluated[i++];
    EXPECT_EQ(nas::canonical(ind.genome), nas::canonical(ref.genome));
    EXPECT_EQ(ind.id(), ref.id());
    EXPECT_EQ(ind.genome.parent_id, ref.genome.parent_id);
    EXPECT_EQ(ind.objectives, ref.objectives);
    EXPECT_EQ(ind.age, ref.age);
  }
  EXPECT_EQ(i, archive.all_evaluated.size());
  std::stringstream csv;
  nas::write_front_csv(csv, archive.front);
  std::getline(csv, line);
  EXPECT_EQ(line, "accuracy,params,macs,genome_id,genome");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, archive.front.size());
}

}  // namespace
}  // namespace radarnas
