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

// Synthetic chirp-sequence FMCW recordings of point-scatterer objects.
//
// A frame is one coherent processing interval: n_samples fast-time samples per
// chirp, n_chirps chirps, n_antennas receive channels of a uniform linear
// array. Each scatterer contributes a separable complex exponential whose
// fast-time frequency encodes range, slow-time frequency encodes radial
// velocity (plus optional sinusoidal micro-Doppler), and antenna phase ramp
// encodes azimuth.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "radarnas/common.hpp"

namespace radarnas::sim {

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadarConfig {
  double carrier_freq_hz = 76.5e9;
  double bandwidth_hz = 850e6;
  double cpi_duration_s = 16e-3;
  int n_samples = 128;
  int n_chirps = 128;
  int n_antennas = 8;
  double antenna_spacing_wavelengths = 0.5;
  // Complex white noise power per IQ sample, dB relative to a 0 dBsm
  // boresight scatterer at 1 m.
  double noise_floor_db = -40.0;
  double dynamic_range_db = 60.0;
  std::uint64_t rng_seed = 0;
  bool noise_enabled = true;

  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  double chirp_duration_s() const { return cpi_duration_s / n_chirps; }
  double range_resolution_m() const { return kSpeedOfLight / (2.0 * bandwidth_hz); }
  // Largest range whose beat frequency stays below the last fast-time bin.
  double max_range_m() const { return (n_samples - 1) * range_resolution_m(); }
  double velocity_resolution_mps() const {
    return wavelength_m() / (2.0 * cpi_duration_s);
  }
  // Velocities in [-max, max) are unambiguous.
  double max_velocity_mps() const { return 0.5 * n_chirps * velocity_resolution_mps(); }

  std::size_t cube_size() const {
    return static_cast<std::size_t>(n_samples) * n_chirps * n_antennas;
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InvalidConfig(std::string("radar config: ") + what);
    };
    require(carrier_freq_hz > 0, "carrier_freq_hz must be positive");
    require(bandwidth_hz > 0, "bandwidth_hz must be positive");
    require(cpi_duration_s > 0, "cpi_duration_s must be positive");
    require(n_samples > 0 && (n_samples & (n_samples - 1)) == 0,
            "n_samples must be a positive power of two");
    require(n_chirps > 0 && (n_chirps & (n_chirps - 1)) == 0,
            "n_chirps must be a positive power of two");
    require(n_antennas >= 2, "n_antennas must be at least 2");
    require(antenna_spacing_wavelengths > 0, "antenna spacing must be positive");
    require(dynamic_range_db > 0, "dynamic_range_db must be positive");
    require(std::isfinite(noise_floor_db), "noise_floor_db must be finite");
  }
};

struct Scatterer {
  double range_m = 0;
  double radial_velocity_mps = 0;
  double azimuth_rad = 0;
  double rcs_dbsm = 0;
  double micro_doppler_amplitude_mps = 0;
  double micro_doppler_freq_hz = 0;
  double micro_doppler_phase_rad = 0;
};

struct SceneObject {
  Category category = Category::kCar;
  std::vector<Scatterer> scatterers;
  std::array<double, 2> centroid_xy_m{0, 0};
  double lateral_velocity_mps = 0;
  // Rigid layout relative to the centroid and the ego speed; used to move the
  // object between frames.
  std::vector<std::array<double, 2>> offsets_m;
  double ego_speed_mps = 0;
};

struct RawFrame {
  int n_samples = 0;
  int n_chirps = 0;
  int n_antennas = 0;
  // Row-major [sample][chirp][antenna].
  std::vector<std::complex<float>> iq;
  std::vector<SceneObject> truth;

  std::size_t index(int sample, int chirp, int antenna) const {
    return (static_cast<std::size_t>(sample) * n_chirps + chirp) * n_antennas + antenna;
  }
};

struct TrackRecording {
  int track_id = 0;
  Category category = Category::kCar;
  std::vector<RawFrame> frames;
  std::string scenario_tag;
};

// Maximum distance of any scatterer from the object centroid.
inline double max_extent_radius_m(Category c) {
  switch (c) {
    case Category::kCar: return 2.5;
    case Category::kPedestrian: return 0.5;
    case Category::kTwoWheeler: return 1.0;
    case Category::kOverridable: return 0.5;
  }
  return 0;
}

// Recomputes every scatterer's range, azimuth and radial velocity after
// moving the centroid. Relative velocity is (-ego_speed, lateral_velocity).
inline void place_object(SceneObject& obj, std::array<double, 2> centroid) {
  obj.centroid_xy_m = centroid;
  const double vx = -obj.ego_speed_mps;
  const double vy = obj.lateral_velocity_mps;
  for (std::size_t i = 0; i < obj.scatterers.size(); ++i) {
    const double x = centroid[0] + obj.offsets_m[i][0];
    const double y = centroid[1] + obj.offsets_m[i][1];
    const double r = std::hypot(x, y);
    Scatterer& s = obj.scatterers[i];
    s.range_m = r;
    s.azimuth_rad = std::atan2(y, x);
    s.radial_velocity_mps = r > 0 ? (x * vx + y * vy) / r : 0.0;
  }
}

namespace detail {

struct CategoryModel {
  int min_scatterers;
  int max_scatterers;
  double rcs_mean_dbsm;
  double rcs_sigma_db;
  double extent_x_m;  // half-extent of the layout box
  double extent_y_m;
  double md_amp_lo, md_amp_hi;
  double md_freq_lo, md_freq_hi;
  double lateral_lo, lateral_hi;
};

inline CategoryModel category_model(Category c) {
  switch (c) {
    case Category::kCar:
      return {7, 15, 12.0, 4.0, 2.2, 1.0, 0, 0, 0, 0, 0, 0};
    case Category::kPedestrian:
      return {2, 5, -13.0, 1.5, 0.25, 0.3, 0.8, 1.5, 25, 45, 0.8, 1.8};
    case Category::kTwoWheeler:
      return {3, 5, 7.0, 1.5, 0.25, 0.3, 0.8, 1.5, 25, 45, 0.8, 1.8};
    case Category::kOverridable:
      return {1, 3, -16.0, 3.0, 0.35, 0.35, 0, 0, 0, 0, 0, 0};
  }
  return {};
}

}  // namespace detail

// Draws a random object of the given category at a random position ahead of
// the sensor.
inline SceneObject synth_scene(Category category, Rng& rng) {
  const detail::CategoryModel m = detail::category_model(category);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> gauss(0.0, 1.0);

  SceneObject obj;
  obj.category = category;
  const int n = std::uniform_int_distribution<int>(m.min_scatterers, m.max_scatterers)(rng);
  obj.ego_speed_mps = uniform(2.0, 4.5);

  if (m.lateral_hi > 0) {
    const double speed = uniform(m.lateral_lo, m.lateral_hi);
    obj.lateral_velocity_mps = unit(rng) < 0.5 ? -speed : speed;
  }
  const double start_y =
      -obj.lateral_velocity_mps * 0.75 + uniform(-1.0, 1.0);
  const std::array<double, 2> centroid{uniform(11.0, 17.0), start_y};

  const double limit = max_extent_radius_m(category);
  const double md_freq = m.md_freq_hi > 0 ? uniform(m.md_freq_lo, m.md_freq_hi) : 0.0;
  for (int i = 0; i < n; ++i) {
    std::array<double, 2> off{uniform(-m.extent_x_m, m.extent_x_m),
                              uniform(-m.extent_y_m, m.extent_y_m)};
    const double radius = std::hypot(off[0], off[1]);
    if (radius > limit) {
      off[0] *= limit / radius;
      off[1] *= limit / radius;
    }
    obj.offsets_m.push_back(off);

    Scatterer s;
    s.rcs_dbsm = m.rcs_mean_dbsm + m.rcs_sigma_db * gauss(rng);
    if (m.md_amp_hi > 0) {
      s.micro_doppler_amplitude_mps = uniform(m.md_amp_lo, m.md_amp_hi);
      s.micro_doppler_freq_hz = md_freq * uniform(0.9, 1.1);
      s.micro_doppler_phase_rad = uniform(0.0, 2.0 * std::numbers::pi);
    }
    obj.scatterers.push_back(s);
  }
  place_object(obj, centroid);
  return obj;
}

// Amplitude of a scatterer at the receiver: r^-2 spreading, cosine two-way
// antenna gain. Reference is a 0 dBsm scatterer at 1 m on boresight.
inline double scatterer_amplitude(const Scatterer& s) {
  return std::pow(10.0, s.rcs_dbsm / 20.0) / (s.range_m * s.range_m) *
         std::cos(s.azimuth_rad);
}

inline void check_unambiguous(const Scatterer& s, const RadarConfig& cfg) {
  const double vmax = cfg.max_velocity_mps();
  const double vpeak = std::abs(s.radial_velocity_mps) + std::abs(s.micro_doppler_amplitude_mps);
  if (!(s.range_m > 0 && s.range_m <= cfg.max_range_m())) {
    throw ScattererOutOfUnambiguousRange("scatterer range " + std::to_string(s.range_m) +
                                         " m outside (0, " + std::to_string(cfg.max_range_m()) +
                                         "]");
  }
  if (!(vpeak < vmax)) {
    throw ScattererOutOfUnambiguousRange("scatterer velocity " + std::to_string(vpeak) +
                                         " m/s exceeds unambiguous " + std::to_string(vmax));
  }
  if (!(std::abs(s.azimuth_rad) < std::numbers::pi / 2)) {
    throw ScattererOutOfUnambiguousRange("scatterer azimuth outside (-pi/2, pi/2)");
  }
}

// Renders one coherent processing interval of the scene. The random engine
// supplies per-scatterer carrier phases and receiver noise.
inline RawFrame render_frame(const SceneObject& scene, const RadarConfig& cfg, Rng& rng) {
  cfg.validate();
  for (const Scatterer& s : scene.scatterers) check_unambiguous(s, cfg);

  const int ns = cfg.n_samples, nc = cfg.n_chirps, na = cfg.n_antennas;
  std::vector<std::complex<double>> cube(cfg.cube_size());
  std::vector<std::complex<double>> fast(ns), slow(nc), ant(na);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  const double two_pi = 2.0 * std::numbers::pi;
  const double lambda = cfg.wavelength_m();
  const double tc = cfg.chirp_duration_s();

  for (const Scatterer& s : scene.scatterers) {
    const double amp = scatterer_amplitude(s);
    const std::complex<double> carrier = std::polar(amp, phase_dist(rng));
    const double range_bin = s.range_m / cfg.range_resolution_m();
    for (int n = 0; n < ns; ++n) fast[n] = std::polar(1.0, two_pi * range_bin * n / ns);
    for (int m = 0; m < nc; ++m) {
      const double t = m * tc;
      double displacement = s.radial_velocity_mps * t;
      if (s.micro_doppler_amplitude_mps != 0.0 && s.micro_doppler_freq_hz > 0.0) {
        const double w = two_pi * s.micro_doppler_freq_hz;
        displacement += s.micro_doppler_amplitude_mps / w *
                        (std::cos(s.micro_doppler_phase_rad) -
                         std::cos(w * t + s.micro_doppler_phase_rad));
      }
      slow[m] = std::polar(1.0, 2.0 * two_pi * displacement / lambda);
    }
    const double spatial = cfg.antenna_spacing_wavelengths * std::sin(s.azimuth_rad);
    for (int a = 0; a < na; ++a) ant[a] = std::polar(1.0, two_pi * spatial * a);

    std::size_t idx = 0;
    for (int n = 0; n < ns; ++n) {
      const std::complex<double> fn = carrier * fast[n];
      for (int m = 0; m < nc; ++m) {
        const std::complex<double> fm = fn * slow[m];
        for (int a = 0; a < na; ++a) cube[idx++] += fm * ant[a];
      }
    }
  }

  if (cfg.noise_enabled) {
    const double sigma = std::sqrt(std::pow(10.0, cfg.noise_floor_db / 10.0) / 2.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& v : cube) {
      const double re = noise(rng);
      const double im = noise(rng);
      v += std::complex<double>(re, im);
    }
  }

  RawFrame frame;
  frame.n_samples = ns;
  frame.n_chirps = nc;
  frame.n_antennas = na;
  frame.iq.resize(cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) {
    frame.iq[i] = std::complex<float>(static_cast<float>(cube[i].real()),
                                      static_cast<float>(cube[i].imag()));
  }
  frame.truth.push_back(scene);
  return frame;
}

// ---------------------------------------------------------------------------
// Datasets

// Track counts of the measurement campaign, in Category order
// (car, pedestrian, two-wheeler, overridable).
inline constexpr std::array<int, kNumClasses> kReferenceTrackCounts = {573, 223, 178, 689};

struct DatasetSpec {
  std::array<int, kNumClasses> counts{21, 8, 6, 25};
  int frames_per_track = 12;
  double frame_interval_s = 0.1;
  // Per-frame Gaussian jitter of every scatterer's RCS (aspect changes).
  double rcs_fluctuation_db = 1.5;

  int total_tracks() const {
    int t = 0;
    for (int c : counts) t += c;
    return t;
  }

  void validate() const {
    for (int c : counts) {
      if (c < 1) throw InvalidConfig("every category needs at least one track");
    }
    if (frames_per_track < 1) throw InvalidConfig("frames_per_track must be >= 1");
    if (!(frame_interval_s > 0)) throw InvalidConfig("frame_interval_s must be positive");
    if (!(rcs_fluctuation_db >= 0)) throw InvalidConfig("rcs_fluctuation_db must be >= 0");
  }
};

// Splits `total` tracks across categories in the reference proportions using
// the largest-remainder rule, then tops every category up to `min_per_class`
// by taking tracks from the largest one.
inline std::array<int, kNumClasses> proportional_track_counts(int total, int min_per_class = 1) {
  if (min_per_class < 1) throw InvalidConfig("min_per_class must be >= 1");
  if (total < kNumClasses * min_per_class) {
    throw InvalidConfig("need at least " + std::to_string(kNumClasses * min_per_class) + " tracks");
  }
  int ref_total = 0;
  for (int c : kReferenceTrackCounts) ref_total += c;
  std::array<int, kNumClasses> counts{};
  std::array<double, kNumClasses> remainder{};
  int assigned = 0;
  for (int i = 0; i < kNumClasses; ++i) {
    const double exact = static_cast<double>(total) * kReferenceTrackCounts[i] / ref_total;
    counts[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned < total) {
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < kNumClasses; ++i) {
    while (counts[i] < min_per_class) {
      int donor = 0;
      for (int j = 1; j < kNumClasses; ++j) {
        if (counts[j] > counts[donor]) donor = j;
      }
      --counts[donor];
      ++counts[i];
    }
  }
  return counts;
}

// Every class gets at least 10 tracks so that the 10 % validation and 20 %
// test splits hold one and two tracks of it respectively.
inline DatasetSpec default_dataset_spec(int total_tracks = 60) {
  DatasetSpec spec;
  spec.counts = proportional_track_counts(total_tracks, std::min(10, total_tracks / kNumClasses));
  return spec;
}

// Category of the i-th track in generation order (categories in enum order).
inline Category track_category(const DatasetSpec& spec, int track_index) {
  int acc = 0;
  for (int i = 0; i < kNumClasses; ++i) {
    acc += spec.counts[i];
    if (track_index < acc) return kAllCategories[i];
  }
  throw InvalidConfig("track index beyond dataset spec");
}

inline std::string scenario_tag_for(const SceneObject& obj) {
  if (obj.lateral_velocity_mps > 0) return "crossing_left";
  if (obj.lateral_velocity_mps < 0) return "crossing_right";
  return "static_approach";
}

// Generates one track: the ego vehicle approaches the object at constant
// speed, so range decreases from frame to frame. Deterministic in
// (spec, cfg, seed, track_index).
inline TrackRecording generate_track(const DatasetSpec& spec, const RadarConfig& cfg,
                                     std::uint64_t seed, int track_index) {
  Rng rng(derive_seed(seed, "track", static_cast<std::uint64_t>(track_index)));
  TrackRecording track;
  track.track_id = track_index;
  track.category = track_category(spec, track_index);
  SceneObject scene = synth_scene(track.category, rng);
  track.scenario_tag = scenario_tag_for(scene);
  const std::array<double, 2> start = scene.centroid_xy_m;
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (int f = 0; f < spec.frames_per_track; ++f) {
    const double t = f * spec.frame_interval_s;
    place_object(scene, {start[0] - scene.ego_speed_mps * t,
                         start[1] + scene.lateral_velocity_mps * t});
    SceneObject snapshot = scene;
    for (Scatterer& s : snapshot.scatterers) s.rcs_dbsm += spec.rcs_fluctuation_db * jitter(rng);
    track.frames.push_back(render_frame(snapshot, cfg, rng));
  }
  return track;
}

inline std::vector<TrackRecording> generate_dataset(const DatasetSpec& spec,
                                                    const RadarConfig& cfg,
                                                    std::uint64_t seed) {
  spec.validate();
  cfg.validate();
  std::vector<TrackRecording> tracks;
  tracks.reserve(static_cast<std::size_t>(spec.total_tracks()));
  for (int i = 0; i < spec.total_tracks(); ++i) tracks.push_back(generate_track(spec, cfg, seed, i));
  return tracks;
}

}  // namespace radarnas::sim
