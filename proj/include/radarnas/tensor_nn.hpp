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

// A small dense neural-network engine: layer vocabulary, shape inference,
// parameter/MAC accounting, forward and backward passes, weighted
// cross-entropy and Adam. Templated on the scalar type so training runs in
// float and gradient checks in double.
//
// Tensors are stored row-major as [height][width][channels]. Sequence inputs
// such as the RCS vector use height = length, width = 1.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "radarnas/common.hpp"

namespace radarnas::nn {

enum class Padding { kValid, kSame };

struct Conv2D {
  int kernel = 3;
  int stride = 1;
  int filters = 8;
  Padding padding = Padding::kValid;
};
struct MaxPool2D {
  int kernel = 2;
};
struct FullyConnected {
  int neurons = 64;
};
struct ReLU {};
struct Softmax {};
struct Flatten {};
// 1x1 convolution over a [length, 1, channels] sequence; weights shared
// across positions.
struct Conv1DPointwise {
  int filters = 4;
};
struct GlobalMaxPool1D {};
struct Concat {};

using LayerSpec = std::variant<Conv2D, MaxPool2D, FullyConnected, ReLU, Softmax, Flatten,
                               Conv1DPointwise, GlobalMaxPool1D, Concat>;

struct Shape {
  int h = 1;
  int w = 1;
  int c = 1;

  std::size_t size() const { return static_cast<std::size_t>(h) * w * c; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.h) + "," + std::to_string(s.w) + "," + std::to_string(s.c) + ")";
}

// Inputs feed one branch each. With several branches the head must start with
// Concat, which joins the flattened branch outputs in order. With a single
// branch the head simply continues it.
struct Architecture {
  std::vector<Shape> inputs;
  std::vector<std::vector<LayerSpec>> branches;
  std::vector<LayerSpec> head;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::string layer_name(const LayerSpec& spec) {
  return std::visit(Overloaded{
                        [](const Conv2D&) { return std::string("conv2d"); },
                        [](const MaxPool2D&) { return std::string("maxpool2d"); },
                        [](const FullyConnected&) { return std::string("fc"); },
                        [](const ReLU&) { return std::string("relu"); },
                        [](const Softmax&) { return std::string("softmax"); },
                        [](const Flatten&) { return std::string("flatten"); },
                        [](const Conv1DPointwise&) { return std::string("conv1d_pointwise"); },
                        [](const GlobalMaxPool1D&) { return std::string("global_maxpool1d"); },
                        [](const Concat&) { return std::string("concat"); },
                    },
                    spec);
}

// ---------------------------------------------------------------------------
// Shape inference and accounting

struct ConvGeometry {
  int out_h = 0, out_w = 0, pad_top = 0, pad_left = 0;
};

inline ConvGeometry conv_geometry(int in_h, int in_w, int kernel, int stride, Padding padding) {
  ConvGeometry g;
  if (padding == Padding::kValid) {
    if (in_h < kernel || in_w < kernel) {
      throw ShapeMismatch("conv kernel " + std::to_string(kernel) + " larger than input " +
                          std::to_string(in_h) + "x" + std::to_string(in_w));
    }
    g.out_h = (in_h - kernel) / stride + 1;
    g.out_w = (in_w - kernel) / stride + 1;
  } else {
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    g.pad_top = std::max((g.out_h - 1) * stride + kernel - in_h, 0) / 2;
    g.pad_left = std::max((g.out_w - 1) * stride + kernel - in_w, 0) / 2;
  }
  return g;
}

inline Shape output_shape(const LayerSpec& spec, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const Conv2D& l) {
            if (l.kernel < 1 || l.stride < 1 || l.filters < 1) throw ShapeMismatch("bad conv2d parameters");
            const ConvGeometry g = conv_geometry(in.h, in.w, l.kernel, l.stride, l.padding);
            return Shape{g.out_h, g.out_w, l.filters};
          },
          [&](const MaxPool2D& l) {
            if (l.kernel < 1) throw ShapeMismatch("bad maxpool kernel");
            if (in.h < l.kernel || in.w < l.kernel) {
              throw ShapeMismatch("maxpool kernel larger than input " + to_string(in));
            }
            return Shape{in.h / l.kernel, in.w / l.kernel, in.c};
          },
          [&](const FullyConnected& l) {
            if (l.neurons < 1) throw ShapeMismatch("bad fc width");
            return Shape{1, 1, l.neurons};
          },
          [&](const ReLU&) { return in; },
          [&](const Softmax&) { return in; },
          [&](const Flatten&) { return Shape{1, 1, static_cast<int>(in.size())}; },
          [&](const Conv1DPointwise& l) {
            if (l.filters < 1) throw ShapeMismatch("bad pointwise filters");
            return Shape{in.h, in.w, l.filters};
          },
          [&](const GlobalMaxPool1D&) { return Shape{1, 1, in.c}; },
          [&](const Concat&) -> Shape { throw ShapeMismatch("concat needs multiple inputs"); },
      },
      spec);
}

inline std::int64_t layer_params(const LayerSpec& spec, const Shape& in) {
  return std::visit(Overloaded{
                        [&](const Conv2D& l) {
                          return static_cast<std::int64_t>(l.kernel) * l.kernel * in.c * l.filters + l.filters;
                        },
                        [&](const FullyConnected& l) {
                          return static_cast<std::int64_t>(in.size()) * l.neurons + l.neurons;
                        },
                        [&](const Conv1DPointwise& l) {
                          return static_cast<std::int64_t>(in.c) * l.filters + l.filters;
                        },
                        [](const auto&) { return std::int64_t{0}; },
                    },
                    spec);
}

// Multiply-accumulates excluding biases, activations and pooling.
inline std::int64_t layer_macs(const LayerSpec& spec, const Shape& in, const Shape& out) {
  return std::visit(Overloaded{
                        [&](const Conv2D& l) {
                          return static_cast<std::int64_t>(out.h) * out.w * l.filters * l.kernel * l.kernel * in.c;
                        },
                        [&](const FullyConnected& l) {
                          return static_cast<std::int64_t>(in.size()) * l.neurons;
                        },
                        [&](const Conv1DPointwise& l) {
                          return static_cast<std::int64_t>(in.h) * in.w * l.filters * in.c;
                        },
                        [](const auto&) { return std::int64_t{0}; },
                    },
                    spec);
}

// Visits every layer with its input and output shapes, in execution order.
template <typename Fn>
void walk_architecture(const Architecture& arch, Fn&& fn) {
  if (arch.inputs.size() != arch.branches.size()) {
    throw ShapeMismatch("architecture needs exactly one branch per input");
  }
  if (arch.inputs.empty()) throw ShapeMismatch("architecture has no inputs");
  std::vector<Shape> ends;
  for (std::size_t b = 0; b < arch.branches.size(); ++b) {
    Shape s = arch.inputs[b];
    for (const LayerSpec& l : arch.branches[b]) {
      if (std::holds_alternative<Concat>(l)) throw ShapeMismatch("concat inside a branch");
      const Shape out = output_shape(l, s);
      fn(l, s, out);
      s = out;
    }
    ends.push_back(s);
  }
  Shape s = ends.front();
  std::size_t start = 0;
  if (ends.size() > 1) {
    if (arch.head.empty() || !std::holds_alternative<Concat>(arch.head.front())) {
      throw ShapeMismatch("multi-input architecture must begin its head with concat");
    }
    int total = 0;
    for (const Shape& e : ends) total += static_cast<int>(e.size());
    s = Shape{1, 1, total};
    fn(arch.head.front(), Shape{1, 1, total}, s);
    start = 1;
  }
  for (std::size_t i = start; i < arch.head.size(); ++i) {
    if (std::holds_alternative<Concat>(arch.head[i])) throw ShapeMismatch("unexpected concat");
    const Shape out = output_shape(arch.head[i], s);
    fn(arch.head[i], s, out);
    s = out;
  }
}

inline std::int64_t count_params(const Architecture& arch) {
  std::int64_t n = 0;
  walk_architecture(arch, [&](const LayerSpec& l, const Shape& in, const Shape&) { n += layer_params(l, in); });
  return n;
}

inline std::int64_t count_macs(const Architecture& arch) {
  std::int64_t n = 0;
  walk_architecture(arch, [&](const LayerSpec& l, const Shape& in, const Shape& out) {
    n += layer_macs(l, in, out);
  });
  return n;
}

inline Shape output_shape(const Architecture& arch) {
  Shape last;
  walk_architecture(arch, [&](const LayerSpec&, const Shape&, const Shape& out) { last = out; });
  return last;
}

// Structural rules for classifier graphs: the last layer is Softmax directly
// after a FullyConnected, and every other Conv/FC is followed by ReLU.
inline void validate_classifier(const Architecture& arch, int n_classes = kNumClasses) {
  const Shape out = output_shape(arch);
  if (out.size() != static_cast<std::size_t>(n_classes)) {
    throw ShapeMismatch("classifier output has " + std::to_string(out.size()) + " entries");
  }
  auto check_seq = [](const std::vector<LayerSpec>& seq, bool is_head) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const bool weighted = std::holds_alternative<Conv2D>(seq[i]) ||
                            std::holds_alternative<FullyConnected>(seq[i]) ||
                            std::holds_alternative<Conv1DPointwise>(seq[i]);
      if (!weighted) continue;
      const bool last_fc = is_head && i + 2 == seq.size();
      if (last_fc) continue;
      if (i + 1 >= seq.size() || !std::holds_alternative<ReLU>(seq[i + 1])) {
        throw ShapeMismatch(layer_name(seq[i]) + " must be followed by relu");
      }
    }
  };
  if (arch.head.size() < 2 || !std::holds_alternative<Softmax>(arch.head.back()) ||
      !std::holds_alternative<FullyConnected>(arch.head[arch.head.size() - 2])) {
    throw ShapeMismatch("classifier must end with fc followed by softmax");
  }
  for (const auto& b : arch.branches) check_seq(b, false);
  check_seq(arch.head, true);
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
struct Node {
  LayerSpec spec;
  Shape in;   // for Concat: (1,1,total)
  Shape out;
  std::vector<int> inputs;  // slot indices
  int output = 0;           // slot index
  std::vector<T> weight;
  std::vector<T> bias;
};

template <typename T>
class Model {
 public:
  Model() = default;

  explicit Model(Architecture arch) : arch_(std::move(arch)) {
    const int n_in = static_cast<int>(arch_.inputs.size());
    int next_slot = n_in;
    std::vector<int> ends;
    std::size_t node_count = 0;
    walk_architecture(arch_, [&](const LayerSpec&, const Shape&, const Shape&) { ++node_count; });
    nodes_.reserve(node_count);

    for (int b = 0; b < n_in; ++b) {
      int slot = b;
      Shape s = arch_.inputs[static_cast<std::size_t>(b)];
      for (const LayerSpec& l : arch_.branches[static_cast<std::size_t>(b)]) {
        slot = add_node(l, s, {slot}, next_slot++);
        s = nodes_.back().out;
      }
      ends.push_back(slot);
    }
    int slot = ends.front();
    Shape s = slot_shape(slot);
    std::size_t start = 0;
    if (n_in > 1) {
      int total = 0;
      for (int e : ends) total += static_cast<int>(slot_shape(e).size());
      Node<T> node;
      node.spec = arch_.head.front();
      node.in = Shape{1, 1, total};
      node.out = node.in;
      node.inputs = ends;
      node.output = next_slot++;
      nodes_.push_back(std::move(node));
      slot = nodes_.back().output;
      s = nodes_.back().out;
      start = 1;
    }
    for (std::size_t i = start; i < arch_.head.size(); ++i) {
      slot = add_node(arch_.head[i], s, {slot}, next_slot++);
      s = nodes_.back().out;
    }
    n_slots_ = next_slot;
    output_slot_ = slot;
  }

  const Architecture& architecture() const { return arch_; }
  std::vector<Node<T>>& nodes() { return nodes_; }
  const std::vector<Node<T>>& nodes() const { return nodes_; }
  int num_slots() const { return n_slots_; }
  int output_slot() const { return output_slot_; }
  std::size_t num_inputs() const { return arch_.inputs.size(); }

  std::int64_t num_params() const {
    std::int64_t n = 0;
    for (const auto& node : nodes_) n += static_cast<std::int64_t>(node.weight.size() + node.bias.size());
    return n;
  }

  // He-uniform weights (fan-in), zero biases.
  void init_he_uniform(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& node : nodes_) {
      if (node.weight.empty()) continue;
      const double fan_in = static_cast<double>(fan_in_of(node));
      const double limit = std::sqrt(6.0 / fan_in);
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (auto& w : node.weight) w = static_cast<T>(dist(rng));
      std::fill(node.bias.begin(), node.bias.end(), T(0));
    }
  }

  // Parameter tensors in a fixed order: per node, weight then bias.
  std::vector<std::span<T>> parameters() {
    std::vector<std::span<T>> out;
    for (auto& node : nodes_) {
      if (node.weight.empty()) continue;
      out.emplace_back(node.weight);
      out.emplace_back(node.bias);
    }
    return out;
  }
  std::vector<std::span<const T>> parameters() const {
    std::vector<std::span<const T>> out;
    for (const auto& node : nodes_) {
      if (node.weight.empty()) continue;
      out.emplace_back(node.weight);
      out.emplace_back(node.bias);
    }
    return out;
  }

  Shape slot_shape(int slot) const {
    if (slot < static_cast<int>(arch_.inputs.size())) return arch_.inputs[static_cast<std::size_t>(slot)];
    for (const auto& node : nodes_) {
      if (node.output == slot) return node.out;
    }
    throw ShapeMismatch("unknown slot");
  }

  template <typename U>
  Model<U> cast() const {
    Model<U> m(arch_);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      std::transform(nodes_[i].weight.begin(), nodes_[i].weight.end(), m.nodes()[i].weight.begin(),
                     [](T v) { return static_cast<U>(v); });
      std::transform(nodes_[i].bias.begin(), nodes_[i].bias.end(), m.nodes()[i].bias.begin(),
                     [](T v) { return static_cast<U>(v); });
    }
    return m;
  }

 private:
  int add_node(const LayerSpec& spec, const Shape& in, std::vector<int> inputs, int output) {
    Node<T> node;
    node.spec = spec;
    node.in = in;
    node.out = output_shape(spec, in);
    node.inputs = std::move(inputs);
    node.output = output;
    std::visit(Overloaded{
                   [&](const Conv2D& l) {
                     node.weight.assign(static_cast<std::size_t>(l.kernel) * l.kernel * in.c * l.filters, T(0));
                     node.bias.assign(static_cast<std::size_t>(l.filters), T(0));
                   },
                   [&](const FullyConnected& l) {
                     node.weight.assign(in.size() * static_cast<std::size_t>(l.neurons), T(0));
                     node.bias.assign(static_cast<std::size_t>(l.neurons), T(0));
                   },
                   [&](const Conv1DPointwise& l) {
                     node.weight.assign(static_cast<std::size_t>(in.c) * l.filters, T(0));
                     node.bias.assign(static_cast<std::size_t>(l.filters), T(0));
                   },
                   [](const auto&) {},
               },
               spec);
    nodes_.push_back(std::move(node));
    return output;
  }

  static std::size_t fan_in_of(const Node<T>& node) {
    return std::visit(Overloaded{
                          [&](const Conv2D& l) { return static_cast<std::size_t>(l.kernel) * l.kernel * node.in.c; },
                          [&](const FullyConnected&) { return node.in.size(); },
                          [&](const Conv1DPointwise&) { return static_cast<std::size_t>(node.in.c); },
                          [](const auto&) { return std::size_t{1}; },
                      },
                      node.spec);
  }

  Architecture arch_;
  std::vector<Node<T>> nodes_;
  int n_slots_ = 0;
  int output_slot_ = 0;
};

template <typename T>
std::int64_t count_params(const Model<T>& m) {
  return count_params(m.architecture());
}
template <typename T>
std::int64_t count_macs(const Model<T>& m) {
  return count_macs(m.architecture());
}

// ---------------------------------------------------------------------------
// Layer kernels

namespace kernels {

template <typename T>
void conv2d_forward(const Conv2D& l, const Shape& in, const Shape& out, const T* x, const T* w,
                    const T* b, T* y) {
  const ConvGeometry g = conv_geometry(in.h, in.w, l.kernel, l.stride, l.padding);
  const int f_count = l.filters, c_count = in.c, k = l.kernel;
  for (int oy = 0; oy < out.h; ++oy) {
    for (int ox = 0; ox < out.w; ++ox) {
      T* yo = y + (static_cast<std::size_t>(oy) * out.w + ox) * f_count;
      for (int f = 0; f < f_count; ++f) yo[f] = b[f];
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * l.stride + ky - g.pad_top;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * l.stride + kx - g.pad_left;
          if (ix < 0 || ix >= in.w) continue;
          const T* xi = x + (static_cast<std::size_t>(iy) * in.w + ix) * c_count;
          const T* wk = w + (static_cast<std::size_t>(ky) * k + kx) * c_count * f_count;
          for (int c = 0; c < c_count; ++c) {
            const T v = xi[c];
            if (v == T(0)) continue;
            const T* wr = wk + static_cast<std::size_t>(c) * f_count;
            for (int f = 0; f < f_count; ++f) yo[f] += v * wr[f];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const Conv2D& l, const Shape& in, const Shape& out, const T* x, const T* w,
                     const T* gy, T* gx, T* gw, T* gb) {
  const ConvGeometry g = conv_geometry(in.h, in.w, l.kernel, l.stride, l.padding);
  const int f_count = l.filters, c_count = in.c, k = l.kernel;
  for (int oy = 0; oy < out.h; ++oy) {
    for (int ox = 0; ox < out.w; ++ox) {
      const T* go = gy + (static_cast<std::size_t>(oy) * out.w + ox) * f_count;
      bool any = false;
      for (int f = 0; f < f_count; ++f) {
        gb[f] += go[f];
        any = any || go[f] != T(0);
      }
      if (!any) continue;
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * l.stride + ky - g.pad_top;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * l.stride + kx - g.pad_left;
          if (ix < 0 || ix >= in.w) continue;
          const std::size_t xoff = (static_cast<std::size_t>(iy) * in.w + ix) * c_count;
          const std::size_t woff = (static_cast<std::size_t>(ky) * k + kx) * c_count * f_count;
          for (int c = 0; c < c_count; ++c) {
            const T v = x[xoff + c];
            const T* wr = w + woff + static_cast<std::size_t>(c) * f_count;
            T* gwr = gw + woff + static_cast<std::size_t>(c) * f_count;
            T acc = 0;
            for (int f = 0; f < f_count; ++f) {
              gwr[f] += v * go[f];
              acc += wr[f] * go[f];
            }
            if (gx) gx[xoff + c] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const MaxPool2D& l, const Shape& in, const Shape& out, const T* x, T* y) {
  for (int oy = 0; oy < out.h; ++oy) {
    for (int ox = 0; ox < out.w; ++ox) {
      for (int c = 0; c < in.c; ++c) {
        T best = -std::numeric_limits<T>::infinity();
        for (int ky = 0; ky < l.kernel; ++ky) {
          for (int kx = 0; kx < l.kernel; ++kx) {
            const int iy = oy * l.kernel + ky, ix = ox * l.kernel + kx;
            best = std::max(best, x[(static_cast<std::size_t>(iy) * in.w + ix) * in.c + c]);
          }
        }
        y[(static_cast<std::size_t>(oy) * out.w + ox) * in.c + c] = best;
      }
    }
  }
}

// Gradient goes to the first maximal element of each window (row-major).
template <typename T>
void maxpool_backward(const MaxPool2D& l, const Shape& in, const Shape& out, const T* x,
                      const T* gy, T* gx) {
  for (int oy = 0; oy < out.h; ++oy) {
    for (int ox = 0; ox < out.w; ++ox) {
      for (int c = 0; c < in.c; ++c) {
        std::size_t arg = 0;
        T best = -std::numeric_limits<T>::infinity();
        for (int ky = 0; ky < l.kernel; ++ky) {
          for (int kx = 0; kx < l.kernel; ++kx) {
            const int iy = oy * l.kernel + ky, ix = ox * l.kernel + kx;
            const std::size_t idx = (static_cast<std::size_t>(iy) * in.w + ix) * in.c + c;
            if (x[idx] > best) {
              best = x[idx];
              arg = idx;
            }
          }
        }
        gx[arg] += gy[(static_cast<std::size_t>(oy) * out.w + ox) * in.c + c];
      }
    }
  }
}

// y[o] = b[o] + sum_i x[i] w[i][o] over `positions` independent rows of x.
template <typename T>
void dense_forward(std::size_t positions, std::size_t n_in, std::size_t n_out, const T* x,
                   const T* w, const T* b, T* y) {
  for (std::size_t p = 0; p < positions; ++p) {
    T* yo = y + p * n_out;
    const T* xi = x + p * n_in;
    for (std::size_t o = 0; o < n_out; ++o) yo[o] = b[o];
    for (std::size_t i = 0; i < n_in; ++i) {
      const T v = xi[i];
      if (v == T(0)) continue;
      const T* wr = w + i * n_out;
      for (std::size_t o = 0; o < n_out; ++o) yo[o] += v * wr[o];
    }
  }
}

template <typename T>
void dense_backward(std::size_t positions, std::size_t n_in, std::size_t n_out, const T* x,
                    const T* w, const T* gy, T* gx, T* gw, T* gb) {
  for (std::size_t p = 0; p < positions; ++p) {
    const T* go = gy + p * n_out;
    const T* xi = x + p * n_in;
    for (std::size_t o = 0; o < n_out; ++o) gb[o] += go[o];
    for (std::size_t i = 0; i < n_in; ++i) {
      const T v = xi[i];
      const T* wr = w + i * n_out;
      T* gwr = gw + i * n_out;
      T acc = 0;
      for (std::size_t o = 0; o < n_out; ++o) {
        gwr[o] += v * go[o];
        acc += wr[o] * go[o];
      }
      if (gx) gx[p * n_in + i] += acc;
    }
  }
}

template <typename T>
void softmax_forward(std::size_t n, const T* x, T* y) {
  T mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= sum;
}

}  // namespace kernels

// ---------------------------------------------------------------------------
// Forward / backward

template <typename T>
struct Cache {
  std::vector<std::vector<T>> slots;
  std::vector<std::vector<T>> grads;  // same layout, used by backward
};

template <typename T>
struct Gradients {
  std::vector<std::vector<T>> weight;
  std::vector<std::vector<T>> bias;

  explicit Gradients(const Model<T>& m) {
    for (const auto& node : m.nodes()) {
      weight.emplace_back(node.weight.size(), T(0));
      bias.emplace_back(node.bias.size(), T(0));
    }
  }
  Gradients() = default;

  void zero() {
    for (auto& v : weight) std::fill(v.begin(), v.end(), T(0));
    for (auto& v : bias) std::fill(v.begin(), v.end(), T(0));
  }

  void add(const Gradients& other) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
      for (std::size_t j = 0; j < weight[i].size(); ++j) weight[i][j] += other.weight[i][j];
      for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += other.bias[i][j];
    }
  }

  // Same ordering as Model::parameters().
  std::vector<std::span<T>> tensors() {
    std::vector<std::span<T>> out;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      if (weight[i].empty()) continue;
      out.emplace_back(weight[i]);
      out.emplace_back(bias[i]);
    }
    return out;
  }
};

// Runs the model; returns the output (class probabilities for classifiers).
// `inputs` must hold one tensor per model input, matching its shape.
template <typename T>
std::span<const T> forward(const Model<T>& model, std::span<const std::span<const T>> inputs,
                           Cache<T>& cache) {
  if (inputs.size() != model.num_inputs()) {
    throw ShapeMismatch("model expects " + std::to_string(model.num_inputs()) + " inputs, got " +
                        std::to_string(inputs.size()));
  }
  cache.slots.resize(static_cast<std::size_t>(model.num_slots()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Shape s = model.architecture().inputs[i];
    if (inputs[i].size() != s.size()) {
      throw ShapeMismatch("input " + std::to_string(i) + " has " + std::to_string(inputs[i].size()) +
                          " values, expected " + std::to_string(s.size()) + " for shape " + to_string(s));
    }
    cache.slots[i].assign(inputs[i].begin(), inputs[i].end());
  }
  for (const Node<T>& node : model.nodes()) {
    std::vector<T>& y = cache.slots[static_cast<std::size_t>(node.output)];
    y.resize(node.out.size());
    const std::vector<T>& x = cache.slots[static_cast<std::size_t>(node.inputs.front())];
    std::visit(Overloaded{
                   [&](const Conv2D& l) {
                     kernels::conv2d_forward(l, node.in, node.out, x.data(), node.weight.data(),
                                             node.bias.data(), y.data());
                   },
                   [&](const MaxPool2D& l) { kernels::maxpool_forward(l, node.in, node.out, x.data(), y.data()); },
                   [&](const FullyConnected& l) {
                     kernels::dense_forward<T>(1, node.in.size(), static_cast<std::size_t>(l.neurons), x.data(),
                                               node.weight.data(), node.bias.data(), y.data());
                   },
                   [&](const ReLU&) {
                     for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
                   },
                   [&](const Softmax&) { kernels::softmax_forward(y.size(), x.data(), y.data()); },
                   [&](const Flatten&) { std::copy(x.begin(), x.end(), y.begin()); },
                   [&](const Conv1DPointwise& l) {
                     kernels::dense_forward<T>(static_cast<std::size_t>(node.in.h) * node.in.w,
                                               static_cast<std::size_t>(node.in.c),
                                               static_cast<std::size_t>(l.filters), x.data(),
                                               node.weight.data(), node.bias.data(), y.data());
                   },
                   [&](const GlobalMaxPool1D&) {
                     const std::size_t positions = static_cast<std::size_t>(node.in.h) * node.in.w;
                     const std::size_t c = static_cast<std::size_t>(node.in.c);
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       T best = x[ch];
                       for (std::size_t p = 1; p < positions; ++p) best = std::max(best, x[p * c + ch]);
                       y[ch] = best;
                     }
                   },
                   [&](const Concat&) {
                     std::size_t off = 0;
                     for (int s : node.inputs) {
                       const auto& part = cache.slots[static_cast<std::size_t>(s)];
                       std::copy(part.begin(), part.end(), y.begin() + static_cast<std::ptrdiff_t>(off));
                       off += part.size();
                     }
                   },
               },
               node.spec);
  }
  return cache.slots[static_cast<std::size_t>(model.output_slot())];
}

template <typename T>
std::vector<T> predict_proba(const Model<T>& model, std::span<const std::span<const T>> inputs) {
  Cache<T> cache;
  const auto out = forward(model, inputs, cache);
  return {out.begin(), out.end()};
}

// Back-propagates `grad_output` (dL/d output) through the cached forward pass,
// accumulating parameter gradients into `grads`. With keep_input_grads the
// gradients w.r.t. the model inputs are left in cache.grads[0 .. num_inputs).
template <typename T>
void backward(const Model<T>& model, Cache<T>& cache, std::span<const T> grad_output,
              Gradients<T>& grads, bool keep_input_grads = false) {
  const auto n_slots = static_cast<std::size_t>(model.num_slots());
  cache.grads.resize(n_slots);
  for (std::size_t s = 0; s < n_slots; ++s) {
    cache.grads[s].assign(cache.slots[s].size(), T(0));
  }
  auto& gout = cache.grads[static_cast<std::size_t>(model.output_slot())];
  if (grad_output.size() != gout.size()) throw ShapeMismatch("output gradient size mismatch");
  std::copy(grad_output.begin(), grad_output.end(), gout.begin());

  const auto& nodes = model.nodes();
  for (std::size_t ni = nodes.size(); ni-- > 0;) {
    const Node<T>& node = nodes[ni];
    const std::vector<T>& y = cache.slots[static_cast<std::size_t>(node.output)];
    const std::vector<T>& gy = cache.grads[static_cast<std::size_t>(node.output)];
    const auto in_slot = static_cast<std::size_t>(node.inputs.front());
    const std::vector<T>& x = cache.slots[in_slot];
    std::vector<T>& gx = cache.grads[in_slot];
    // Input gradients of the model inputs are only needed by tests.
    T* gx_weighted = (in_slot < model.num_inputs() && !keep_input_grads) ? nullptr : gx.data();
    std::visit(Overloaded{
                   [&](const Conv2D& l) {
                     kernels::conv2d_backward(l, node.in, node.out, x.data(), node.weight.data(), gy.data(),
                                              gx_weighted, grads.weight[ni].data(), grads.bias[ni].data());
                   },
                   [&](const MaxPool2D& l) {
                     kernels::maxpool_backward(l, node.in, node.out, x.data(), gy.data(), gx.data());
                   },
                   [&](const FullyConnected& l) {
                     kernels::dense_backward<T>(1, node.in.size(), static_cast<std::size_t>(l.neurons), x.data(),
                                                node.weight.data(), gy.data(), gx_weighted, grads.weight[ni].data(),
                                                grads.bias[ni].data());
                   },
                   [&](const ReLU&) {
                     for (std::size_t i = 0; i < gx.size(); ++i) {
                       if (x[i] > T(0)) gx[i] += gy[i];
                     }
                   },
                   [&](const Softmax&) {
                     T dot = 0;
                     for (std::size_t i = 0; i < y.size(); ++i) dot += gy[i] * y[i];
                     for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (gy[i] - dot);
                   },
                   [&](const Flatten&) {
                     for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
                   },
                   [&](const Conv1DPointwise& l) {
                     kernels::dense_backward<T>(static_cast<std::size_t>(node.in.h) * node.in.w,
                                                static_cast<std::size_t>(node.in.c),
                                                static_cast<std::size_t>(l.filters), x.data(), node.weight.data(),
                                                gy.data(), gx_weighted, grads.weight[ni].data(),
                                                grads.bias[ni].data());
                   },
                   [&](const GlobalMaxPool1D&) {
                     const std::size_t positions = static_cast<std::size_t>(node.in.h) * node.in.w;
                     const std::size_t c = static_cast<std::size_t>(node.in.c);
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       std::size_t arg = ch;
                       for (std::size_t p = 1; p < positions; ++p) {
                         if (x[p * c + ch] > x[arg]) arg = p * c + ch;
                       }
                       gx[arg] += gy[ch];
                     }
                   },
                   [&](const Concat&) {
                     std::size_t off = 0;
                     for (int s : node.inputs) {
                       auto& part = cache.grads[static_cast<std::size_t>(s)];
                       for (std::size_t i = 0; i < part.size(); ++i) part[i] += gy[off + i];
                       off += part.size();
                     }
                   },
               },
               node.spec);
  }
}

// ---------------------------------------------------------------------------
// Loss

inline constexpr double kLogEpsilon = 1e-12;

template <typename T>
T loss_weighted_ce(std::span<const T> probs, int label, T class_weight) {
  return -class_weight * std::log(probs[static_cast<std::size_t>(label)] + static_cast<T>(kLogEpsilon));
}

// dL/dprobs of the weighted cross-entropy.
template <typename T>
std::vector<T> loss_weighted_ce_grad(std::span<const T> probs, int label, T class_weight) {
  std::vector<T> g(probs.size(), T(0));
  g[static_cast<std::size_t>(label)] =
      -class_weight / (probs[static_cast<std::size_t>(label)] + static_cast<T>(kLogEpsilon));
  return g;
}

// N_total / (C * N_c) over the labels; absent classes get weight 1.
inline std::array<double, kNumClasses> inverse_frequency_weights(std::span<const int> labels) {
  std::array<double, kNumClasses> counts{};
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1;
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c) {
    w[c] = counts[c] > 0 ? static_cast<double>(labels.size()) / (kNumClasses * counts[c]) : 1.0;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t step = 0;
};

template <typename T>
void adam_step(std::vector<std::span<T>> params, std::vector<std::span<T>> grads, AdamState<T>& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeMismatch("adam: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), T(0));
      state.v.emplace_back(p.size(), T(0));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.learning_rate), eps = static_cast<T>(cfg.epsilon);
  const T inv_bc1 = static_cast<T>(1.0 / bc1), inv_bc2 = static_cast<T>(1.0 / bc2);
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size()) throw ShapeMismatch("adam: tensor shape mismatch");
    T* p = params[t].data();
    const T* g = grads[t].data();
    T* m = state.m[t].data();
    T* v = state.v[t].data();
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const T mhat = m[i] * inv_bc1;
      const T vhat = v[i] * inv_bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace radarnas::nn
