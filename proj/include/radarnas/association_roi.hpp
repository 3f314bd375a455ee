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

// Gating association of reflections to objects, sparse spectral ROI cutting,
// RCS vectors and the track-level train/validation/test split.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "radarnas/common.hpp"
#include "radarnas/signal_sim.hpp"
#include "radarnas/spectra_dsp.hpp"

namespace radarnas::roi {

using dsp::Reflection;

struct GatingParams {
  double gate_radius_m = 2.5;
  int min_reflections = 1;

  void validate() const {
    if (!(gate_radius_m > 0)) throw InvalidConfig("gate_radius_m must be positive");
    if (min_reflections < 1) throw InvalidConfig("min_reflections must be >= 1");
  }
};

struct RoiParams {
  int patch_size = 7;
  int roi_size = 32;
  int rcs_length = 30;
  double rcs_min_dbsm = -40.0;
  double rcs_max_dbsm = 30.0;

  void validate() const {
    if (patch_size < 1 || patch_size % 2 == 0) throw InvalidConfig("patch_size must be odd");
    if (roi_size < 1) throw InvalidConfig("roi_size must be positive");
    if (rcs_length < 1) throw InvalidConfig("rcs_length must be positive");
    if (!(rcs_max_dbsm > rcs_min_dbsm)) throw InvalidConfig("empty RCS scaling interval");
  }
};

enum class Split : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

struct RoiSample {
  std::vector<float> roi;  // roi_size * roi_size, row = k, column = l
  std::vector<float> rcs;  // rcs_length
  int n_reflections = 0;
  Category category = Category::kCar;
  std::uint32_t track_id = 0;
  std::uint32_t frame_index = 0;
  Split split = Split::kTrain;
};

// Assigns each reflection to the nearest anchor if it lies within the gate.
// Equidistant anchors resolve to the lower index.
inline std::vector<std::vector<Reflection>> associate(
    std::span<const Reflection> reflections, std::span<const std::array<double, 2>> anchors,
    const GatingParams& params) {
  params.validate();
  std::vector<std::vector<Reflection>> out(anchors.size());
  for (const Reflection& r : reflections) {
    std::size_t best = anchors.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const double d = std::hypot(r.x_m - anchors[i][0], r.y_m - anchors[i][1]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best < anchors.size() && best_d <= params.gate_radius_m) out[best].push_back(r);
  }
  return out;
}

// Strongest-first ordering: descending SNR, then ascending (k, l). Independent
// of input order.
inline bool stronger(const Reflection& a, const Reflection& b) {
  if (a.snr_db != b.snr_db) return a.snr_db > b.snr_db;
  if (a.k_bin != b.k_bin) return a.k_bin < b.k_bin;
  return a.l_bin < b.l_bin;
}

inline std::vector<Reflection> sorted_by_strength(std::span<const Reflection> assoc) {
  std::vector<Reflection> v(assoc.begin(), assoc.end());
  std::sort(v.begin(), v.end(), stronger);
  return v;
}

// Cuts the object's ROI: the union of patch_size^2 patches around every
// associated reflection, restricted to a roi_size^2 window centred on the
// strongest reflection (shifted inward at the spectrum border), converted to
// [0, 1] over the sensor dynamic range below that reflection's magnitude.
inline std::vector<float> extract_roi(const dsp::Spectrum& spec,
                                      std::span<const Reflection> assoc,
                                      double dynamic_range_db, const RoiParams& params = {}) {
  params.validate();
  if (assoc.empty()) throw EmptyAssociation("ROI extraction needs at least one reflection");
  const int size = params.roi_size;
  if (spec.n_k < size || spec.n_l < size) throw ShapeMismatch("spectrum smaller than ROI");

  const Reflection* ref = &assoc[0];
  for (const Reflection& r : assoc) {
    if (stronger(r, *ref)) ref = &r;
  }
  const double peak_db = spec.db(ref->k_bin, ref->l_bin);
  const int k_start = std::clamp(ref->k_bin - size / 2, 0, spec.n_k - size);
  const int l_start = std::clamp(ref->l_bin - size / 2, 0, spec.n_l - size);

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(size) * size, 0);
  const int half_patch = params.patch_size / 2;
  for (const Reflection& r : assoc) {
    for (int dk = -half_patch; dk <= half_patch; ++dk) {
      for (int dl = -half_patch; dl <= half_patch; ++dl) {
        const int i = r.k_bin + dk - k_start;
        const int j = r.l_bin + dl - l_start;
        if (i < 0 || i >= size || j < 0 || j >= size) continue;
        mask[static_cast<std::size_t>(i) * size + j] = 1;
      }
    }
  }

  std::vector<float> out(mask.size(), 0.0f);
  const double low = peak_db - dynamic_range_db;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const std::size_t o = static_cast<std::size_t>(i) * size + j;
      if (!mask[o]) continue;
      const double scaled = (spec.db(k_start + i, l_start + j) - low) / dynamic_range_db;
      out[o] = static_cast<float>(std::clamp(scaled, 0.0, 1.0));
    }
  }
  return out;
}

// RCS values of the strongest rcs_length reflections, affinely mapped from
// [rcs_min_dbsm, rcs_max_dbsm] to [0, 1], zero-padded.
inline std::vector<float> rcs_vector(std::span<const Reflection> assoc,
                                     const RoiParams& params = {}) {
  params.validate();
  const std::vector<Reflection> sorted = sorted_by_strength(assoc);
  std::vector<float> out(static_cast<std::size_t>(params.rcs_length), 0.0f);
  const std::size_t n = std::min(sorted.size(), out.size());
  const double span = params.rcs_max_dbsm - params.rcs_min_dbsm;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = (sorted[i].rcs_dbsm - params.rcs_min_dbsm) / span;
    out[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitCounts {
  int train = 0;
  int validation = 0;
  int test = 0;
};

// 70/10/20 with round-half-away-from-zero on the validation and test shares;
// training takes the rest.
inline SplitCounts split_counts(int n_tracks) {
  SplitCounts c;
  c.test = static_cast<int>(std::lround(0.2 * n_tracks));
  c.validation = static_cast<int>(std::lround(0.1 * n_tracks));
  if (c.test + c.validation > n_tracks) c.validation = n_tracks - c.test;
  c.train = n_tracks - c.test - c.validation;
  return c;
}

// Track-level split, stratified per category. Returns one Split per entry of
// `categories` (indexed like the track list).
inline std::vector<Split> assign_splits(std::span<const Category> categories,
                                        std::uint64_t seed) {
  std::vector<Split> out(categories.size(), Split::kTrain);
  for (Category c : kAllCategories) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < categories.size(); ++i) {
      if (categories[i] == c) members.push_back(i);
    }
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(label_of(c))));
    std::shuffle(members.begin(), members.end(), rng);
    const SplitCounts counts = split_counts(static_cast<int>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) {
      const int jj = static_cast<int>(j);
      out[members[j]] = jj < counts.test                     ? Split::kTest
                        : jj < counts.test + counts.validation ? Split::kValidation
                                                               : Split::kTrain;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-frame pipeline and dataset building

struct PipelineParams {
  dsp::CfarParams cfar;
  GatingParams gating;
  RoiParams roi;
};

// Runs FFT, CFAR, angle and RCS estimation, gating and ROI cutting on one
// frame. Produces at most one sample per ground-truth object.
inline std::vector<RoiSample> process_frame(const sim::RawFrame& frame,
                                            const sim::RadarConfig& cfg,
                                            const PipelineParams& params, std::uint32_t track_id,
                                            std::uint32_t frame_index) {
  const dsp::Spectrum spec = dsp::range_doppler_fft(frame);
  const std::vector<Reflection> reflections = dsp::extract_reflections(spec, cfg, params.cfar);
  std::vector<std::array<double, 2>> anchors;
  for (const sim::SceneObject& obj : frame.truth) anchors.push_back(obj.centroid_xy_m);
  const auto groups = associate(reflections, anchors, params.gating);

  std::vector<RoiSample> samples;
  for (std::size_t o = 0; o < groups.size(); ++o) {
    const auto& assoc = groups[o];
    if (static_cast<int>(assoc.size()) < params.gating.min_reflections) continue;
    RoiSample s;
    s.roi = extract_roi(spec, assoc, cfg.dynamic_range_db, params.roi);
    s.rcs = rcs_vector(assoc, params.roi);
    s.n_reflections = std::min<int>(static_cast<int>(assoc.size()), params.roi.rcs_length);
    s.category = frame.truth[o].category;
    s.track_id = track_id;
    s.frame_index = frame_index;
    samples.push_back(std::move(s));
  }
  return samples;
}

inline std::vector<RoiSample> process_track(const sim::TrackRecording& track,
                                            const sim::RadarConfig& cfg,
                                            const PipelineParams& params, Split split) {
  std::vector<RoiSample> out;
  for (std::size_t f = 0; f < track.frames.size(); ++f) {
    for (RoiSample& s : process_frame(track.frames[f], cfg, params,
                                      static_cast<std::uint32_t>(track.track_id),
                                      static_cast<std::uint32_t>(f))) {
      s.split = split;
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::vector<RoiSample> build_dataset(std::span<const sim::TrackRecording> tracks,
                                            const sim::RadarConfig& cfg,
                                            const PipelineParams& params, std::uint64_t seed) {
  if (tracks.empty()) throw InvalidConfig("build_dataset needs at least one track");
  std::vector<Category> cats;
  for (const auto& t : tracks) cats.push_back(t.category);
  const std::vector<Split> splits = assign_splits(cats, seed);
  std::vector<RoiSample> out;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (RoiSample& s : process_track(tracks[i], cfg, params, splits[i])) out.push_back(std::move(s));
  }
  return out;
}

// Simulates and processes tracks one at a time so raw cubes never accumulate
// in memory. Same result as generate_dataset followed by build_dataset.
inline std::vector<RoiSample> simulate_and_build(const sim::DatasetSpec& spec,
                                                 const sim::RadarConfig& cfg,
                                                 const PipelineParams& params,
                                                 std::uint64_t sim_seed,
                                                 std::uint64_t split_seed) {
  spec.validate();
  cfg.validate();
  std::vector<Category> cats;
  for (int i = 0; i < spec.total_tracks(); ++i) cats.push_back(sim::track_category(spec, i));
  const std::vector<Split> splits = assign_splits(cats, split_seed);
  std::vector<RoiSample> out;
  for (int i = 0; i < spec.total_tracks(); ++i) {
    const sim::TrackRecording track = sim::generate_track(spec, cfg, sim_seed, i);
    for (RoiSample& s : process_track(track, cfg, params, splits[static_cast<std::size_t>(i)])) {
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace radarnas::roi
