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

// Three-objective architecture search: NSGA-II ranking and crowding inside a
// regularized-evolution loop (tournament sampling plus aging).
//
// Objectives are (mean validation accuracy: maximise, parameters: minimise,
// MACs: minimise).

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <set>
#include <string>
#include <unordered_map>
#include <tuple>
#include <vector>

#include "nlohmann/json.hpp"
#include "radarnas/common.hpp"
#include "radarnas/genome.hpp"
#include "radarnas/model_zoo.hpp"
#include "radarnas/tensor_nn.hpp"

namespace radarnas::nas {

struct Objectives {
  double accuracy = 0;
  std::int64_t params = 0;
  std::int64_t macs = 0;

  friend bool operator==(const Objectives&, const Objectives&) = default;
};

inline bool dominates(const Objectives& a, const Objectives& b) {
  const bool no_worse = a.accuracy >= b.accuracy && a.params <= b.params && a.macs <= b.macs;
  const bool better = a.accuracy > b.accuracy || a.params < b.params || a.macs < b.macs;
  return no_worse && better;
}

struct Individual {
  Genome genome;
  Objectives objectives;
  std::int64_t age = 0;  // cycle in which the individual was born
  bool cached = false;   // objectives came from the memo
  double wall_time_s = 0;

  std::int64_t id() const { return genome.id; }
};

// Fronts as index lists into `pop`; indices within a front are ordered by
// genome id.
inline std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Individual> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(pop[i].objectives, pop[j].objectives)) {
        dominated_by_me[i].push_back(j);
      } else if (dominates(pop[j].objectives, pop[i].objectives)) {
        ++domination_count[i];
      }
    }
    if (domination_count[i] == 0) current.push_back(i);
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return pop[a].id() < pop[b].id() || (pop[a].id() == pop[b].id() && a < b); };
  while (!current.empty()) {
    std::sort(current.begin(), current.end(), by_id);
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated_by_me[i]) {
        if (--domination_count[j] == 0) next.push_back(j);
      }
    }
    current = std::move(next);
  }
  return fronts;
}

// Crowding distance per member of `front`, in the same order. Boundary
// members along any objective get +inf; objectives are normalised by the
// front's range and a zero-range objective contributes 0.
inline std::vector<double> crowding_distance(std::span<const Objectives> front) {
  const std::size_t n = front.size();
  if (n == 0) throw InvalidConfig("crowding_distance: empty front");
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  const std::array<std::function<double(const Objectives&)>, 3> get = {
      [](const Objectives& o) { return o.accuracy; },
      [](const Objectives& o) { return static_cast<double>(o.params); },
      [](const Objectives& o) { return static_cast<double>(o.macs); },
  };
  std::vector<std::size_t> idx(n);
  for (const auto& f : get) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f(front[a]) < f(front[b]); });
    dist[idx.front()] = std::numeric_limits<double>::infinity();
    dist[idx.back()] = std::numeric_limits<double>::infinity();
    const double range = f(front[idx.back()]) - f(front[idx.front()]);
    if (range <= 0) continue;
    for (std::size_t r = 1; r + 1 < n; ++r) {
      dist[idx[r]] += (f(front[idx[r + 1]]) - f(front[idx[r - 1]])) / range;
    }
  }
  return dist;
}

// Front rank (0 = non-dominated) and crowding distance for each member.
struct Ranking {
  std::vector<int> rank;
  std::vector<double> crowding;
};

inline Ranking rank_population(std::span<const Individual> pop) {
  Ranking r{std::vector<int>(pop.size()), std::vector<double>(pop.size())};
  const auto fronts = nondominated_sort(pop);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<Objectives> objs;
    for (std::size_t i : fronts[f]) objs.push_back(pop[i].objectives);
    const auto cd = crowding_distance(objs);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      r.rank[fronts[f][k]] = static_cast<int>(f);
      r.crowding[fronts[f][k]] = cd[k];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation

// Trains a candidate and returns its validation mean accuracy.
using AccuracyFn = std::function<double(const Genome&)>;

class Evaluator {
 public:
  explicit Evaluator(AccuracyFn fn) : fn_(std::move(fn)) {}

  // Objectives of `g`, memoised by canonical genome. Parameter and MAC counts
  // come from the architecture alone.
  Objectives evaluate(const Genome& g, bool* was_cached = nullptr) {
    validate_genome(g);
    const std::string key = canonical(g);
    if (auto it = memo_.find(key); it != memo_.end()) {
      if (was_cached) *was_cached = true;
      return it->second;
    }
    const nn::Architecture arch = zoo::build_spectrum_model(g);
    Objectives o;
    o.params = nn::count_params(arch);
    o.macs = nn::count_macs(arch);
    o.accuracy = fn_(g);
    ++trainings_;
    memo_.emplace(key, o);
    if (was_cached) *was_cached = false;
    return o;
  }

  std::size_t trainings() const { return trainings_; }

 private:
  AccuracyFn fn_;
  std::unordered_map<std::string, Objectives> memo_;
  std::size_t trainings_ = 0;
};

struct EvolveConfig {
  int budget = 60;
  int population_size = 20;
  int sample_size = 5;

  void validate() const {
    if (sample_size < 2) throw InvalidConfig("sample_size must be >= 2");
    if (population_size < sample_size) throw InvalidConfig("population_size must be >= sample_size");
    if (budget < population_size) throw InvalidConfig("budget must be >= population_size");
  }
};

struct ParetoArchive {
  std::vector<Individual> all_evaluated;
  std::vector<Individual> front;
};

inline std::vector<Individual> pareto_front(std::span<const Individual> all) {
  std::vector<Individual> out;
  if (all.empty()) return out;
  // Repeated genomes share objectives; keep the earliest evaluation only.
  std::set<std::string> seen;
  const auto fronts = nondominated_sort(all);
  for (std::size_t i : fronts.front()) {
    if (seen.insert(canonical(all[i].genome)).second) out.push_back(all[i]);
  }
  return out;
}

// True if no member of `front` is dominated by any evaluated individual.
inline bool front_is_nondominated(const ParetoArchive& a) {
  for (const auto& f : a.front) {
    for (const auto& e : a.all_evaluated) {
      if (dominates(e.objectives, f.objectives)) return false;
    }
  }
  return true;
}

using ProgressFn = std::function<void(const Individual&, std::size_t evaluated)>;

// Regularized evolution with NSGA-II parent choice: each cycle samples
// `sample_size` members of the population uniformly, picks the best by
// (front rank, crowding distance, id) computed over the whole population,
// mutates it and retires the oldest member.
inline ParetoArchive evolve(const Genome& seed, const EvolveConfig& cfg, Rng& rng, Evaluator& evaluator,
                            const ProgressFn& progress = {}) {
  cfg.validate();
  validate_genome(seed);
  ParetoArchive archive;
  std::deque<Individual> population;
  std::int64_t next_id = 0;

  auto add = [&](Genome g, std::int64_t age) {
    g.id = next_id++;
    Individual ind;
    const auto t0 = std::chrono::steady_clock::now();
    ind.objectives = evaluator.evaluate(g, &ind.cached);
    ind.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ind.genome = std::move(g);
    ind.age = age;
    archive.all_evaluated.push_back(ind);
    population.push_back(ind);
    if (progress) progress(ind, archive.all_evaluated.size());
  };

  Genome root = seed;
  root.parent_id.reset();
  add(root, 0);
  const Genome seed_with_id = archive.all_evaluated.front().genome;
  for (int i = 1; i < cfg.population_size; ++i) add(mutate(seed_with_id, rng), 0);

  std::int64_t cycle = 0;
  while (static_cast<int>(archive.all_evaluated.size()) < cfg.budget) {
    ++cycle;
    const std::vector<Individual> pop(population.begin(), population.end());
    const Ranking ranking = rank_population(pop);
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::size_t> sample;
    std::sample(idx.begin(), idx.end(), std::back_inserter(sample), cfg.sample_size, rng);
    const std::size_t parent = *std::min_element(sample.begin(), sample.end(), [&](std::size_t a, std::size_t b) {
      if (ranking.rank[a] != ranking.rank[b]) return ranking.rank[a] < ranking.rank[b];
      if (ranking.crowding[a] != ranking.crowding[b]) return ranking.crowding[a] > ranking.crowding[b];
      return pop[a].id() < pop[b].id();
    });
    add(mutate(pop[parent].genome, rng), cycle);
    population.pop_front();
  }
  archive.front = pareto_front(archive.all_evaluated);
  return archive;
}

// Front member with accuracy >= min_accuracy and the fewest parameters; ties
// by fewer MACs, then lower id.
inline Individual pick_candidate(std::span<const Individual> front, double min_accuracy) {
  if (front.empty()) throw InvalidConfig("pick_candidate: empty front");
  const Individual* best = nullptr;
  for (const auto& ind : front) {
    if (ind.objectives.accuracy < min_accuracy) continue;
    if (!best) {
      best = &ind;
      continue;
    }
    const auto key = [](const Individual& i) { return std::tuple(i.objectives.params, i.objectives.macs, i.id()); };
    if (key(ind) < key(*best)) best = &ind;
  }
  if (!best) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", min_accuracy);
    throw NoCandidateMeetsThreshold(std::string("no front member reaches accuracy ") + buf);
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json individual_to_json(const Individual& ind) {
  nlohmann::json j;
  j["id"] = ind.id();
  j["parent_id"] = ind.genome.parent_id ? nlohmann::json(*ind.genome.parent_id) : nlohmann::json(nullptr);
  j["genome"] = genome_to_json(ind.genome);
  j["accuracy"] = ind.objectives.accuracy;
  j["n_params"] = ind.objectives.params;
  j["n_macs"] = ind.objectives.macs;
  j["age"] = ind.age;
  j["cached"] = ind.cached;
  j["wall_time_s"] = ind.wall_time_s;
  return j;
}

inline Individual individual_from_json(const nlohmann::json& j) {
  Individual ind;
  ind.genome = genome_from_json(j.at("genome"));
  ind.genome.id = j.at("id").get<std::int64_t>();
  ind.objectives.accuracy = j.at("accuracy").get<double>();
  ind.objectives.params = j.at("n_params").get<std::int64_t>();
  ind.objectives.macs = j.at("n_macs").get<std::int64_t>();
  ind.age = j.value("age", std::int64_t{0});
  ind.cached = j.value("cached", false);
  ind.wall_time_s = j.value("wall_time_s", 0.0);
  return ind;
}

inline void write_archive_jsonl(std::ostream& os, std::span<const Individual> all) {
  for (const auto& ind : all) os << individual_to_json(ind).dump() << '\n';
}

inline void write_front_csv(std::ostream& os, std::span<const Individual> front) {
  os << "accuracy,params,macs,genome_id,genome\n";
  char buf[128];
  for (const auto& ind : front) {
    std::snprintf(buf, sizeof(buf), "%.6f,%lld,%lld,%lld,", ind.objectives.accuracy,
                  static_cast<long long>(ind.objectives.params), static_cast<long long>(ind.objectives.macs),
                  static_cast<long long>(ind.id()));
    os << buf << canonical(ind.genome) << '\n';
  }
}

}  // namespace radarnas::nas
