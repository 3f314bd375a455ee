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

// Concrete architectures: the hand-designed CNN, the search seed, genome-built
// spectrum models, DeepHybrid and the reflection-only ablation.

#pragma once

#include <string>
#include <vector>

#include "radarnas/common.hpp"
#include "radarnas/genome.hpp"
#include "radarnas/tensor_nn.hpp"

namespace radarnas::zoo {

using nn::Architecture;
using nn::LayerSpec;

inline constexpr int kRoiSize = 32;
inline constexpr int kRcsLength = 30;
inline constexpr int kHeadWidth = 64;

inline const nn::Shape kSpectrumInput{kRoiSize, kRoiSize, 1};
inline const nn::Shape kRcsInput{kRcsLength, 1, 1};

inline std::vector<LayerSpec> classifier_head() {
  return {nn::FullyConnected{kHeadWidth}, nn::ReLU{}, nn::FullyConnected{kNumClasses}, nn::Softmax{}};
}

inline std::vector<LayerSpec> reflection_branch() {
  return {nn::Conv1DPointwise{4}, nn::ReLU{}, nn::Conv1DPointwise{8}, nn::ReLU{}, nn::GlobalMaxPool1D{}};
}

// Genome layers with a ReLU after each conv, then Flatten.
inline std::vector<LayerSpec> spectrum_branch(const nas::Genome& g) {
  nas::validate_genome(g);
  std::vector<LayerSpec> out;
  for (const nas::Gene& gene : g.layers) {
    if (gene.is_conv()) {
      out.push_back(nn::Conv2D{gene.kernel, gene.stride, gene.filters, nn::Padding::kValid});
      out.push_back(nn::ReLU{});
    } else {
      out.push_back(nn::MaxPool2D{gene.kernel});
    }
  }
  out.push_back(nn::Flatten{});
  return out;
}

// Stand-in for the hand-designed network: 98,444 parameters.
inline Architecture build_manual_cnn() {
  Architecture a;
  a.inputs = {kSpectrumInput};
  a.branches = {{nn::Conv2D{3, 1, 16}, nn::ReLU{}, nn::MaxPool2D{2}, nn::Conv2D{3, 1, 40}, nn::ReLU{},
                 nn::MaxPool2D{2}, nn::Flatten{}}};
  a.head = classifier_head();
  return a;
}

// A single 3x3 conv with 8 filters. Stride 3 keeps the flattened features
// (10x10x8) small enough that the seed stays below the manual network's
// parameter budget once the FC-64 head is attached.
inline nas::Genome build_seed() {
  nas::Genome g;
  g.layers = {nas::Gene::conv(3, 3, 8)};
  return g;
}

inline Architecture build_spectrum_model(const nas::Genome& g) {
  Architecture a;
  a.inputs = {kSpectrumInput};
  a.branches = {spectrum_branch(g)};
  a.head = classifier_head();
  return a;
}

inline Architecture build_deephybrid(const nas::Genome& g) {
  Architecture a;
  a.inputs = {kSpectrumInput, kRcsInput};
  a.branches = {spectrum_branch(g), reflection_branch()};
  a.head = classifier_head();
  a.head.insert(a.head.begin(), nn::Concat{});
  return a;
}

inline Architecture build_reflection_only() {
  Architecture a;
  a.inputs = {kRcsInput};
  a.branches = {reflection_branch()};
  a.head = classifier_head();
  return a;
}

// Model kinds selectable from the command line.
enum class ModelKind { kManual, kSpectrum, kHybrid, kReflectionOnly };

inline std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kManual: return "manual";
    case ModelKind::kSpectrum: return "spectrum";
    case ModelKind::kHybrid: return "hybrid";
    case ModelKind::kReflectionOnly: return "reflection-only";
  }
  return "?";
}

inline bool uses_roi(ModelKind k) { return k != ModelKind::kReflectionOnly; }
inline bool uses_rcs(ModelKind k) { return k == ModelKind::kHybrid || k == ModelKind::kReflectionOnly; }

inline Architecture build_model(ModelKind kind, const nas::Genome& g) {
  switch (kind) {
    case ModelKind::kManual: return build_manual_cnn();
    case ModelKind::kSpectrum: return build_spectrum_model(g);
    case ModelKind::kHybrid: return build_deephybrid(g);
    case ModelKind::kReflectionOnly: return build_reflection_only();
  }
  throw InvalidConfig("unknown model kind");
}

}  // namespace radarnas::zoo
