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

// Checkpoints: a JSON architecture description next to a raw little-endian
// f32 parameter blob. The JSON lists every tensor with its byte offset.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "radarnas/common.hpp"
#include "radarnas/nn_train.hpp"
#include "radarnas/tensor_nn.hpp"

namespace radarnas::nn {

using nlohmann::json;

inline json layer_to_json(const LayerSpec& spec) {
  json j;
  j["type"] = layer_name(spec);
  std::visit(Overloaded{
                 [&](const Conv2D& l) {
                   j["kernel"] = l.kernel;
                   j["stride"] = l.stride;
                   j["filters"] = l.filters;
                   j["padding"] = l.padding == Padding::kValid ? "valid" : "same";
                 },
                 [&](const MaxPool2D& l) { j["kernel"] = l.kernel; },
                 [&](const FullyConnected& l) { j["neurons"] = l.neurons; },
                 [&](const Conv1DPointwise& l) { j["filters"] = l.filters; },
                 [](const auto&) {},
             },
             spec);
  return j;
}

inline LayerSpec layer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv2d") {
    Conv2D l;
    l.kernel = j.at("kernel").get<int>();
    l.stride = j.at("stride").get<int>();
    l.filters = j.at("filters").get<int>();
    const std::string pad = j.value("padding", std::string("valid"));
    if (pad != "valid" && pad != "same") throw FormatError("unknown padding '" + pad + "'");
    l.padding = pad == "same" ? Padding::kSame : Padding::kValid;
    return l;
  }
  if (type == "maxpool2d") return MaxPool2D{j.at("kernel").get<int>()};
  if (type == "fc") return FullyConnected{j.at("neurons").get<int>()};
  if (type == "relu") return ReLU{};
  if (type == "softmax") return Softmax{};
  if (type == "flatten") return Flatten{};
  if (type == "conv1d_pointwise") return Conv1DPointwise{j.at("filters").get<int>()};
  if (type == "global_maxpool1d") return GlobalMaxPool1D{};
  if (type == "concat") return Concat{};
  throw FormatError("unknown layer type '" + type + "'");
}

inline json architecture_to_json(const Architecture& arch) {
  json j;
  j["inputs"] = json::array();
  for (const Shape& s : arch.inputs) j["inputs"].push_back({s.h, s.w, s.c});
  j["branches"] = json::array();
  for (const auto& b : arch.branches) {
    json layers = json::array();
    for (const auto& l : b) layers.push_back(layer_to_json(l));
    j["branches"].push_back(layers);
  }
  j["head"] = json::array();
  for (const auto& l : arch.head) j["head"].push_back(layer_to_json(l));
  return j;
}

inline Architecture architecture_from_json(const json& j) {
  Architecture arch;
  try {
    for (const auto& s : j.at("inputs")) {
      arch.inputs.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()});
    }
    for (const auto& b : j.at("branches")) {
      std::vector<LayerSpec> layers;
      for (const auto& l : b) layers.push_back(layer_from_json(l));
      arch.branches.push_back(std::move(layers));
    }
    for (const auto& l : j.at("head")) arch.head.push_back(layer_from_json(l));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed architecture: ") + e.what());
  }
  (void)count_params(arch);  // shape check
  return arch;
}

inline std::filesystem::path blob_path_for(const std::filesystem::path& json_path) {
  std::filesystem::path p = json_path;
  p.replace_extension(".bin");
  return p;
}

// Writes <path> (JSON) and <path without extension>.bin.
inline void save_checkpoint(const Model<float>& model, const std::filesystem::path& path,
                            const json& extra = json::object()) {
  const std::filesystem::path blob = blob_path_for(path);
  json j;
  j["format"] = "radarnas-checkpoint";
  j["version"] = 1;
  j["architecture"] = architecture_to_json(model.architecture());
  j["n_params"] = count_params(model.architecture());
  j["n_macs"] = count_macs(model.architecture());
  j["blob"] = blob.filename().string();
  j["dtype"] = "f32le";
  j["tensors"] = json::array();
  std::ofstream bin(blob, std::ios::binary);
  if (!bin) throw Error("cannot write " + blob.string());
  std::uint64_t offset = 0;
  const auto& nodes = model.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].weight.empty()) continue;
    for (const auto* vec : {&nodes[i].weight, &nodes[i].bias}) {
      const bool is_weight = vec == &nodes[i].weight;
      j["tensors"].push_back({{"node", i},
                              {"layer", layer_name(nodes[i].spec)},
                              {"name", is_weight ? "weight" : "bias"},
                              {"offset", offset},
                              {"count", vec->size()}});
      bin.write(reinterpret_cast<const char*>(vec->data()),
                static_cast<std::streamsize>(vec->size() * sizeof(float)));
      offset += vec->size() * sizeof(float);
    }
  }
  if (!bin) throw Error("write failed for " + blob.string());
  j["extra"] = extra;
  std::ofstream js(path);
  if (!js) throw Error("cannot write " + path.string());
  js << j.dump(2) << '\n';
}

struct LoadedCheckpoint {
  Model<float> model;
  json extra;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream js(path);
  if (!js) throw FormatError("cannot open checkpoint " + path.string());
  json j;
  try {
    js >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != "radarnas-checkpoint") {
    throw FormatError(path.string() + ": not a checkpoint");
  }
  LoadedCheckpoint out{Model<float>(architecture_from_json(j.at("architecture"))), j.value("extra", json::object())};
  const std::filesystem::path blob = path.parent_path() / j.at("blob").get<std::string>();
  std::ifstream bin(blob, std::ios::binary);
  if (!bin) throw FormatError("cannot open parameter blob " + blob.string());
  auto& nodes = out.model.nodes();
  std::size_t expected = 0;
  for (const auto& t : j.at("tensors")) {
    const auto node = t.at("node").get<std::size_t>();
    if (node >= nodes.size()) throw FormatError(path.string() + ": tensor for unknown node");
    auto& vec = t.at("name").get<std::string>() == "weight" ? nodes[node].weight : nodes[node].bias;
    if (t.at("count").get<std::size_t>() != vec.size()) {
      throw FormatError(path.string() + ": tensor size does not match architecture");
    }
    bin.seekg(static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>()));
    bin.read(reinterpret_cast<char*>(vec.data()), static_cast<std::streamsize>(vec.size() * sizeof(float)));
    if (!bin) throw FormatError("truncated parameter blob " + blob.string());
    ++expected;
  }
  std::size_t weighted = 0;
  for (const auto& n : nodes) weighted += n.weight.empty() ? 0 : 2;
  if (expected != weighted) throw FormatError(path.string() + ": missing tensors");
  return out;
}

inline void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,train_loss,val_mean_acc\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.8f,%.8f\n", r.epoch, r.train_loss, r.val_mean_acc);
    os << buf;
  }
}

}  // namespace radarnas::nn
