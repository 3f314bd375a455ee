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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace radarnas {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian");

inline constexpr int kNumClasses = 4;

// Object categories. The numeric value is the class label used everywhere.
enum class Category : std::uint8_t {
  kCar = 0,
  kPedestrian = 1,
  kTwoWheeler = 2,
  kOverridable = 3,
};

inline constexpr std::array<Category, kNumClasses> kAllCategories = {
    Category::kCar, Category::kPedestrian, Category::kTwoWheeler,
    Category::kOverridable};

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::kCar: return "car";
    case Category::kPedestrian: return "pedestrian";
    case Category::kTwoWheeler: return "two_wheeler";
    case Category::kOverridable: return "overridable";
  }
  return "unknown";
}

inline int label_of(Category c) { return static_cast<int>(c); }

// ---------------------------------------------------------------------------
// Errors. Every failure the library reports derives from radarnas::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RADARNAS_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

RADARNAS_DEFINE_ERROR(InvalidConfig);
RADARNAS_DEFINE_ERROR(ScattererOutOfUnambiguousRange);
RADARNAS_DEFINE_ERROR(NonPositiveRange);
RADARNAS_DEFINE_ERROR(EmptyAssociation);
RADARNAS_DEFINE_ERROR(ShapeMismatch);
RADARNAS_DEFINE_ERROR(InvalidGenome);
RADARNAS_DEFINE_ERROR(LengthMismatch);
RADARNAS_DEFINE_ERROR(EmptyClass);
RADARNAS_DEFINE_ERROR(NoCandidateMeetsThreshold);
RADARNAS_DEFINE_ERROR(FormatError);

#undef RADARNAS_DEFINE_ERROR

inline Category category_from_name(std::string_view name) {
  for (Category c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  throw FormatError("unknown category '" + std::string(name) + "'");
}

inline Category category_from_label(int label) {
  if (label < 0 || label >= kNumClasses) {
    throw FormatError("label out of range: " + std::to_string(label));
  }
  return static_cast<Category>(label);
}

// ---------------------------------------------------------------------------
// Seeding. All randomness flows from std::mt19937_64 engines whose seeds are
// derived from a global seed plus a stage label, so stages can be rerun alone.

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a(label)) + index);
}

// ---------------------------------------------------------------------------
// Little-endian binary helpers.

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw FormatError("unexpected end of binary stream");
  return value;
}

}  // namespace radarnas
