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

// Spectrum-branch genomes: an ordered list of Conv and MaxPool genes over a
// fixed (32, 32, 1) input, plus the mutation operator of the search.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "radarnas/common.hpp"

namespace radarnas::nas {

inline constexpr std::array<int, 3> kConvKernels = {3, 5, 7};
inline constexpr std::array<int, 3> kConvStrides = {1, 2, 3};
inline constexpr std::array<int, 5> kConvFilters = {4, 8, 16, 32, 64};
inline constexpr std::array<int, 2> kPoolKernels = {2, 3};
inline constexpr std::size_t kMaxGenomeLength = 12;
inline constexpr int kGenomeInputSize = 32;

struct Gene {
  enum class Kind : std::uint8_t { kConv, kPool };
  Kind kind = Kind::kConv;
  int kernel = 3;
  int stride = 1;   // conv only
  int filters = 8;  // conv only

  static Gene conv(int kernel, int stride, int filters) { return {Kind::kConv, kernel, stride, filters}; }
  static Gene pool(int kernel) { return {Kind::kPool, kernel, 1, 0}; }
  bool is_conv() const { return kind == Kind::kConv; }

  friend bool operator==(const Gene& a, const Gene& b) {
    if (a.kind != b.kind || a.kernel != b.kernel) return false;
    return a.kind == Kind::kPool || (a.stride == b.stride && a.filters == b.filters);
  }
};

struct Genome {
  std::vector<Gene> layers;
  std::int64_t id = 0;
  std::optional<std::int64_t> parent_id;

  std::size_t count_conv() const {
    return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [](const Gene& g) { return g.is_conv(); }));
  }
  std::size_t count_pool() const { return layers.size() - count_conv(); }
};

// "C3s1f8-P2-C5s2f16"
inline std::string canonical(const Genome& g) {
  std::string s;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const Gene& l = g.layers[i];
    if (i) s += '-';
    if (l.is_conv()) {
      s += "C" + std::to_string(l.kernel) + "s" + std::to_string(l.stride) + "f" + std::to_string(l.filters);
    } else {
      s += "P" + std::to_string(l.kernel);
    }
  }
  return s;
}

inline std::uint64_t genome_hash(const Genome& g) { return fnv1a(canonical(g)); }

template <std::size_t N>
bool in_grid(const std::array<int, N>& grid, int v) {
  return std::find(grid.begin(), grid.end(), v) != grid.end();
}

// Spatial size after the genome, or nullopt if it collapses below 1 or a
// kernel exceeds its input.
inline std::optional<int> spatial_output(const std::vector<Gene>& layers, int input = kGenomeInputSize) {
  int s = input;
  for (const Gene& l : layers) {
    if (l.kernel > s) return std::nullopt;
    s = l.is_conv() ? (s - l.kernel) / l.stride + 1 : s / l.kernel;
    if (s < 1) return std::nullopt;
  }
  return s;
}

// Empty string when valid, otherwise the reason.
inline std::string genome_problem(const Genome& g) {
  if (g.layers.empty()) return "genome has no layers";
  if (g.layers.size() > kMaxGenomeLength) return "genome longer than " + std::to_string(kMaxGenomeLength);
  if (g.count_conv() == 0) return "genome has no conv layer";
  for (const Gene& l : g.layers) {
    if (l.is_conv()) {
      if (!in_grid(kConvKernels, l.kernel) || !in_grid(kConvStrides, l.stride) || !in_grid(kConvFilters, l.filters)) {
        return "conv gene outside the search grid";
      }
    } else if (!in_grid(kPoolKernels, l.kernel)) {
      return "pool gene outside the search grid";
    }
  }
  if (!spatial_output(g.layers)) return "spatial size collapses for " + canonical(g);
  return {};
}

inline bool is_valid(const Genome& g) { return genome_problem(g).empty(); }

inline void validate_genome(const Genome& g) {
  const std::string p = genome_problem(g);
  if (!p.empty()) throw InvalidGenome(p);
}

enum class Mutation : std::uint8_t { kInsertConv, kRemoveConv, kInsertPool, kRemovePool, kChangeConv };

// Mutation types whose preconditions hold for `g`.
inline std::vector<Mutation> applicable_mutations(const Genome& g) {
  std::vector<Mutation> out;
  const bool room = g.layers.size() < kMaxGenomeLength;
  if (room) out.push_back(Mutation::kInsertConv);
  if (g.count_conv() >= 2) out.push_back(Mutation::kRemoveConv);
  if (room) out.push_back(Mutation::kInsertPool);
  if (g.count_pool() >= 1) out.push_back(Mutation::kRemovePool);
  if (g.count_conv() >= 1) out.push_back(Mutation::kChangeConv);
  return out;
}

namespace detail {

template <typename Container>
auto pick(const Container& c, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, c.size() - 1);
  return c[d(rng)];
}

template <std::size_t N>
int pick_other(const std::array<int, N>& grid, int current, Rng& rng) {
  std::vector<int> options;
  for (int v : grid) {
    if (v != current) options.push_back(v);
  }
  return pick(options, rng);
}

inline std::vector<std::size_t> positions_of(const Genome& g, Gene::Kind kind) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    if (g.layers[i].kind == kind) out.push_back(i);
  }
  return out;
}

inline Genome apply_mutation(const Genome& g, Mutation m, Rng& rng) {
  Genome out = g;
  std::uniform_int_distribution<std::size_t> insert_pos(0, g.layers.size());
  switch (m) {
    case Mutation::kInsertConv: {
      const Gene gene = Gene::conv(pick(kConvKernels, rng), pick(kConvStrides, rng), pick(kConvFilters, rng));
      out.layers.insert(out.layers.begin() + static_cast<std::ptrdiff_t>(insert_pos(rng)), gene);
      break;
    }
    case Mutation::kInsertPool: {
      const Gene gene = Gene::pool(pick(kPoolKernels, rng));
      out.layers.insert(out.layers.begin() + static_cast<std::ptrdiff_t>(insert_pos(rng)), gene);
      break;
    }
    case Mutation::kRemoveConv:
      out.layers.erase(out.layers.begin() + static_cast<std::ptrdiff_t>(pick(positions_of(g, Gene::Kind::kConv), rng)));
      break;
    case Mutation::kRemovePool:
      out.layers.erase(out.layers.begin() + static_cast<std::ptrdiff_t>(pick(positions_of(g, Gene::Kind::kPool), rng)));
      break;
    case Mutation::kChangeConv: {
      Gene& gene = out.layers[pick(positions_of(g, Gene::Kind::kConv), rng)];
      std::uniform_int_distribution<int> attr(0, 2);
      switch (attr(rng)) {
        case 0: gene.kernel = pick_other(kConvKernels, gene.kernel, rng); break;
        case 1: gene.stride = pick_other(kConvStrides, gene.stride, rng); break;
        default: gene.filters = pick_other(kConvFilters, gene.filters, rng); break;
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

inline constexpr int kMutationAttempts = 20;

// One mutation drawn uniformly from the applicable types. Invalid results are
// redrawn up to kMutationAttempts times; after that `g` comes back unchanged.
// The returned genome keeps g.id; callers assign ids. parent_id is set to g.id.
inline Genome mutate(const Genome& g, Rng& rng) {
  validate_genome(g);
  const std::vector<Mutation> kinds = applicable_mutations(g);
  for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
    Genome child = detail::apply_mutation(g, detail::pick(kinds, rng), rng);
    if (is_valid(child)) {
      child.parent_id = g.id;
      return child;
    }
  }
  Genome same = g;
  same.parent_id = g.id;
  return same;
}

inline nlohmann::json genome_to_json(const Genome& g) {
  nlohmann::json j;
  j["id"] = g.id;
  j["parent_id"] = g.parent_id ? nlohmann::json(*g.parent_id) : nlohmann::json(nullptr);
  j["canonical"] = canonical(g);
  j["layers"] = nlohmann::json::array();
  for (const Gene& l : g.layers) {
    if (l.is_conv()) {
      j["layers"].push_back({{"type", "conv2d"}, {"kernel", l.kernel}, {"stride", l.stride}, {"filters", l.filters}});
    } else {
      j["layers"].push_back({{"type", "maxpool2d"}, {"kernel", l.kernel}});
    }
  }
  return j;
}

inline Genome genome_from_json(const nlohmann::json& j) {
  Genome g;
  try {
    g.id = j.value("id", std::int64_t{0});
    if (j.contains("parent_id") && !j["parent_id"].is_null()) g.parent_id = j["parent_id"].get<std::int64_t>();
    for (const auto& l : j.at("layers")) {
      const std::string type = l.at("type").get<std::string>();
      if (type == "conv2d") {
        g.layers.push_back(Gene::conv(l.at("kernel").get<int>(), l.at("stride").get<int>(), l.at("filters").get<int>()));
      } else if (type == "maxpool2d") {
        g.layers.push_back(Gene::pool(l.at("kernel").get<int>()));
      } else {
        throw InvalidGenome("unknown gene type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidGenome(std::string("malformed genome: ") + e.what());
  }
  validate_genome(g);
  return g;
}

}  // namespace radarnas::nas
