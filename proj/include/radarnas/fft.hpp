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

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "radarnas/common.hpp"

namespace radarnas::fft {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Radix-2 plan with a precomputed twiddle table. Forward transform is
// X[k] = sum_n x[n] exp(-j 2 pi k n / N); N must be a power of two.
class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n), twiddles_(n / 2) {
    if (!is_power_of_two(n)) throw InvalidConfig("FFT length must be a power of two");
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle =
          -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw ShapeMismatch("FFT input length does not match plan");
    const std::size_t n = n_;
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const std::complex<double> u = data[start + k];
          const std::complex<double> v = data[start + k + half] * twiddles_[k * step];
          data[start + k] = u + v;
          data[start + k + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddles_;
};

inline void forward(std::span<std::complex<double>> data) { Plan(data.size()).forward(data); }

// Periodic Hann window, coherent gain exactly 1/2.
inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n)));
  }
  return w;
}

}  // namespace radarnas::fft
