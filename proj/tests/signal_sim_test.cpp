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

#include "radarnas/signal_sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "test_support.hpp"

namespace radarnas {
namespace {

sim::RadarConfig quiet_config() {
  sim::RadarConfig cfg;
  cfg.noise_enabled = false;
  return cfg;
}

sim::SceneObject single(double range, double velocity, double azimuth, double rcs = 0.0) {
  sim::SceneObject obj;
  sim::Scatterer s;
  s.range_m = range;
  s.radial_velocity_mps = velocity;
  s.azimuth_rad = azimuth;
  s.rcs_dbsm = rcs;
  obj.scatterers.push_back(s);
  obj.offsets_m.push_back({0, 0});
  return obj;
}

double max_pairwise_distance(const sim::SceneObject& obj) {
  double d = 0;
  for (const auto& a : obj.offsets_m) {
    for (const auto& b : obj.offsets_m) d = std::max(d, std::hypot(a[0] - b[0], a[1] - b[1]));
  }
  return d;
}

TEST(RadarConfig, DerivedResolutions) {
  const sim::RadarConfig cfg;
  EXPECT_NEAR(cfg.range_resolution_m(), 299792458.0 / (2 * 850e6), 1e-12);
  EXPECT_NEAR(cfg.velocity_resolution_mps(), (299792458.0 / 76.5e9) / (2 * 16e-3), 1e-12);
  EXPECT_NEAR(cfg.max_velocity_mps(), 64 * cfg.velocity_resolution_mps(), 1e-12);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(RadarConfig, RejectsInvalidFields) {
  sim::RadarConfig cfg;
  cfg.n_antennas = 1;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = {};
  cfg.n_samples = 100;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = {};
  cfg.dynamic_range_db = 0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = {};
  cfg.bandwidth_hz = -1;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(SynthScene, OverridableSeedZero) {
  Rng rng(0);
  const auto obj = sim::synth_scene(Category::kOverridable, rng);
  EXPECT_GE(obj.scatterers.size(), 1u);
  EXPECT_LE(obj.scatterers.size(), 3u);
  for (const auto& s : obj.scatterers) EXPECT_EQ(s.micro_doppler_amplitude_mps, 0.0);
}

TEST(SynthScene, CarSeedSevenCount) {
  Rng rng(7);
  const auto obj = sim::synth_scene(Category::kCar, rng);
  EXPECT_GE(obj.scatterers.size(), 5u);
  EXPECT_LE(obj.scatterers.size(), 15u);
}

TEST(SynthScene, CategoryInvariantsHoldOverSeeds) {
  struct Expect {
    Category c;
    std::size_t lo, hi;
    double extent;
    bool micro_doppler;
  };
  const Expect table[] = {{Category::kCar, 5, 15, 5.0, false},
                          {Category::kPedestrian, 2, 5, 1.0, true},
                          {Category::kTwoWheeler, 3, 8, 2.0, true},
                          {Category::kOverridable, 1, 3, 1.0, false}};
  for (const auto& e : table) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      const auto obj = sim::synth_scene(e.c, rng);
      ASSERT_EQ(obj.category, e.c);
      ASSERT_GE(obj.scatterers.size(), e.lo);
      ASSERT_LE(obj.scatterers.size(), e.hi);
      ASSERT_LE(max_pairwise_distance(obj), e.extent + 1e-12);
      for (const auto& s : obj.scatterers) {
        if (e.micro_doppler) {
          ASSERT_GT(s.micro_doppler_amplitude_mps, 0.0);
        } else {
          ASSERT_EQ(s.micro_doppler_amplitude_mps, 0.0);
        }
        ASSERT_LT(std::abs(s.azimuth_rad), std::numbers::pi / 2);
      }
    }
  }
}

TEST(SynthScene, MeanRcsOrdering) {
  std::array<double, kNumClasses> mean{};
  for (Category c : kAllCategories) {
    double sum = 0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      Rng rng(seed);
      for (const auto& s : sim::synth_scene(c, rng).scatterers) {
        sum += s.rcs_dbsm;
        ++n;
      }
    }
    mean[label_of(c)] = sum / n;
  }
  const auto m = [&](Category c) { return mean[label_of(c)]; };
  EXPECT_GT(m(Category::kCar), m(Category::kTwoWheeler));
  EXPECT_GE(m(Category::kTwoWheeler), m(Category::kPedestrian));
  EXPECT_GT(m(Category::kPedestrian), m(Category::kOverridable));
}

TEST(RenderFrame, SingleScattererHasConstantEnvelope) {
  const auto cfg = quiet_config();
  Rng rng(1);
  const auto frame = sim::render_frame(single(12.0, 1.5, 0.3, 5.0), cfg, rng);
  ASSERT_EQ(frame.iq.size(), cfg.cube_size());
  const double ref = std::abs(frame.iq[0]);
  ASSERT_GT(ref, 0.0);
  for (const auto& v : frame.iq) ASSERT_NEAR(std::abs(v) / ref, 1.0, 1e-5);
}

TEST(RenderFrame, BoresightHasEqualAntennaPhase) {
  const auto cfg = quiet_config();
  Rng rng(2);
  const auto frame = sim::render_frame(single(10.0, -2.0, 0.0), cfg, rng);
  for (int n = 0; n < cfg.n_samples; n += 17) {
    for (int m = 0; m < cfg.n_chirps; m += 13) {
      const auto a0 = frame.iq[frame.index(n, m, 0)];
      for (int a = 1; a < cfg.n_antennas; ++a) {
        ASSERT_NEAR(std::abs(frame.iq[frame.index(n, m, a)] - a0), 0.0, 1e-6 * std::abs(a0));
      }
    }
  }
}

// Oracle: naive DFT of the fast-time samples of chirp 0, antenna 0.
TEST(RenderFrame, RangePeakMatchesBeatFrequency) {
  const auto cfg = quiet_config();
  for (double range : {3.0, 9.7, 15.3}) {
    Rng rng(3);
    const auto frame = sim::render_frame(single(range, 0.0, 0.0), cfg, rng);
    std::vector<std::complex<double>> x(static_cast<std::size_t>(cfg.n_samples));
    for (int n = 0; n < cfg.n_samples; ++n) x[n] = frame.iq[frame.index(n, 0, 0)];
    const auto spec = testing::naive_dft(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
      if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
    }
    // beat frequency 2 B r / (c T_chirp) sampled over one chirp -> r / dR bins
    const double predicted = range / cfg.range_resolution_m();
    EXPECT_LE(std::abs(static_cast<double>(best) - predicted), 1.0) << "range " << range;
  }
}

TEST(RenderFrame, RejectsAmbiguousScatterers) {
  const auto cfg = quiet_config();
  Rng rng(4);
  EXPECT_THROW(sim::render_frame(single(cfg.max_range_m() + 1.0, 0, 0), cfg, rng),
               ScattererOutOfUnambiguousRange);
  EXPECT_THROW(sim::render_frame(single(10, cfg.max_velocity_mps() + 0.1, 0), cfg, rng),
               ScattererOutOfUnambiguousRange);
  EXPECT_THROW(sim::render_frame(single(10, 0, std::numbers::pi / 2), cfg, rng),
               ScattererOutOfUnambiguousRange);
  EXPECT_THROW(sim::render_frame(single(-1, 0, 0), cfg, rng), ScattererOutOfUnambiguousRange);
}

TEST(RenderFrame, EnergyGrowsWithRcs) {
  const auto cfg = quiet_config();
  double last = 0;
  for (double rcs = -20; rcs <= 20; rcs += 5) {
    Rng rng(5);
    const auto frame = sim::render_frame(single(10, 1, 0.2, rcs), cfg, rng);
    double e = 0;
    for (const auto& v : frame.iq) e += std::norm(std::complex<double>(v));
    EXPECT_GT(e, last);
    last = e;
  }
}

// Second moment of the slow-time power spectrum about its peak, summed over
// fast-time samples.
double doppler_spread(const sim::RawFrame& f) {
  std::vector<double> p(static_cast<std::size_t>(f.n_chirps), 0.0);
  std::vector<std::complex<double>> x(static_cast<std::size_t>(f.n_chirps));
  for (int n = 0; n < f.n_samples; n += 8) {
    for (int m = 0; m < f.n_chirps; ++m) x[m] = f.iq[f.index(n, m, 0)];
    fft::forward(x);
    for (int m = 0; m < f.n_chirps; ++m) p[m] += std::norm(x[m]);
  }
  const auto peak = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  double num = 0, den = 0;
  for (int m = 0; m < f.n_chirps; ++m) {
    int d = std::abs(m - peak);
    d = std::min(d, f.n_chirps - d);
    num += p[m] * d * d;
    den += p[m];
  }
  return num / den;
}

TEST(RenderFrame, MicroDopplerWidensDopplerSpread) {
  const auto cfg = quiet_config();
  auto walker = single(10, 1, 0.1);
  walker.scatterers[0].micro_doppler_amplitude_mps = 1.2;
  walker.scatterers[0].micro_doppler_freq_hz = 30;
  walker.scatterers[0].micro_doppler_phase_rad = 0.4;
  const auto still = single(10, 1, 0.1);
  Rng r1(6), r2(6);
  EXPECT_GT(doppler_spread(sim::render_frame(walker, cfg, r1)),
            doppler_spread(sim::render_frame(still, cfg, r2)));
}

TEST(RenderFrame, NoiseMatchesConfiguredFloor) {
  sim::RadarConfig cfg;
  cfg.noise_floor_db = -30;
  sim::SceneObject empty;
  Rng rng(7);
  const auto frame = sim::render_frame(empty, cfg, rng);
  double p = 0;
  for (const auto& v : frame.iq) p += std::norm(std::complex<double>(v));
  p /= static_cast<double>(frame.iq.size());
  EXPECT_NEAR(10 * std::log10(p), -30.0, 0.1);
}

TEST(Dataset, ExactRequestedCounts) {
  sim::DatasetSpec spec;
  spec.counts = {10, 4, 3, 12};
  spec.frames_per_track = 1;
  const sim::RadarConfig cfg;
  const auto tracks = sim::generate_dataset(spec, cfg, 11);
  ASSERT_EQ(tracks.size(), 29u);
  std::array<int, kNumClasses> seen{};
  for (const auto& t : tracks) {
    ++seen[label_of(t.category)];
    for (const auto& f : t.frames) {
      ASSERT_EQ(f.truth.size(), 1u);
      EXPECT_EQ(f.truth[0].category, t.category);
    }
  }
  EXPECT_EQ(seen, spec.counts);
}

TEST(Dataset, RejectsZeroCount) {
  sim::DatasetSpec spec;
  spec.counts = {1, 0, 1, 1};
  EXPECT_THROW(spec.validate(), InvalidConfig);
  EXPECT_THROW(sim::generate_dataset(spec, {}, 0), InvalidConfig);
}

TEST(Dataset, ProportionalCountsFollowReferenceRatios) {
  const auto counts = sim::proportional_track_counts(1663);
  EXPECT_EQ(counts, sim::kReferenceTrackCounts);
  const auto c60 = sim::proportional_track_counts(60);
  EXPECT_EQ(std::accumulate(c60.begin(), c60.end(), 0), 60);
  const double total = 573 + 223 + 178 + 689;
  for (int i = 0; i < kNumClasses; ++i) {
    EXPECT_LE(std::abs(c60[i] - 60 * sim::kReferenceTrackCounts[i] / total), 1.0);
  }
}

TEST(Dataset, DefaultSpecKeepsOrderingWithClassFloor) {
  const auto spec = sim::default_dataset_spec();
  EXPECT_EQ(spec.total_tracks(), 60);
  for (int c : spec.counts) EXPECT_GE(c, 10);
  const auto& n = spec.counts;
  EXPECT_GE(n[label_of(Category::kOverridable)], n[label_of(Category::kPedestrian)]);
  EXPECT_GE(n[label_of(Category::kCar)], n[label_of(Category::kTwoWheeler)]);
  EXPECT_THROW(sim::proportional_track_counts(3), InvalidConfig);
}

TEST(Dataset, TrackApproachesObject) {
  const auto spec = sim::default_dataset_spec();
  const auto track = sim::generate_track(spec, {}, 5, 3);
  ASSERT_EQ(static_cast<int>(track.frames.size()), spec.frames_per_track);
  for (std::size_t f = 1; f < track.frames.size(); ++f) {
    EXPECT_LT(track.frames[f].truth[0].centroid_xy_m[0], track.frames[f - 1].truth[0].centroid_xy_m[0]);
  }
}

TEST(Dataset, SameSeedIsBitIdentical) {
  sim::DatasetSpec spec;
  spec.counts = {1, 1, 1, 1};
  spec.frames_per_track = 2;
  const sim::RadarConfig cfg;
  const auto a = sim::generate_dataset(spec, cfg, 42);
  const auto b = sim::generate_dataset(spec, cfg, 42);
  const auto c = sim::generate_dataset(spec, cfg, 43);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t f = 0; f < a[t].frames.size(); ++f) {
      const auto& x = a[t].frames[f].iq;
      const auto& y = b[t].frames[f].iq;
      ASSERT_EQ(0, std::memcmp(x.data(), y.data(), x.size() * sizeof(x[0])));
      differs = differs || x != c[t].frames[f].iq;
    }
  }
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace radarnas
