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

// k,l-spectra, OS-CFAR detection, azimuth estimation and reflection attributes.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "radarnas/common.hpp"
#include "radarnas/fft.hpp"
#include "radarnas/signal_sim.hpp"

namespace radarnas::dsp {

enum class Window { kHann, kRectangular };

struct Spectrum {
  int n_k = 0;
  int n_l = 0;
  int n_a = 0;
  // [k][l][antenna]; Doppler axis shifted so zero velocity sits at l = n_l / 2.
  std::vector<std::complex<double>> cells;
  // [k][l]: noncoherent sum over antennas, linear and in dB.
  std::vector<double> power;
  std::vector<double> magnitude_db;
  double noise_db = 0;
  double floor_db = 0;
  // Coherent gains of the windows used along each axis.
  double gain_k = 1;
  double gain_l = 1;

  std::size_t at(int k, int l) const { return static_cast<std::size_t>(k) * n_l + l; }
  double db(int k, int l) const { return magnitude_db[at(k, l)]; }
  std::span<const std::complex<double>> snapshot(int k, int l) const {
    return {cells.data() + at(k, l) * n_a, static_cast<std::size_t>(n_a)};
  }
};

inline constexpr double kPowerEpsilon = 1e-32;

// Fills magnitude_db from power. Values are clamped at (median power in dB -
// 20 dB); an all-zero power map clamps at -320 dB so the output stays finite.
inline void finalize_magnitude(Spectrum& spec) {
  std::vector<double> sorted = spec.power;
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  const double median = sorted.empty() ? 0.0 : sorted[mid];
  spec.noise_db = 10.0 * std::log10(std::max(median, 1e-30));
  spec.floor_db = spec.noise_db - 20.0;
  const double floor_lin = std::max(std::pow(10.0, spec.floor_db / 10.0), kPowerEpsilon);
  spec.magnitude_db.resize(spec.power.size());
  for (std::size_t i = 0; i < spec.power.size(); ++i) {
    spec.magnitude_db[i] = std::max(10.0 * std::log10(std::max(spec.power[i], floor_lin)),
                                    spec.floor_db);
  }
}

// A power-only spectrum, for exercising detection on synthetic maps.
inline Spectrum power_spectrum(int n_k, int n_l, std::vector<double> power) {
  if (power.size() != static_cast<std::size_t>(n_k) * n_l) {
    throw ShapeMismatch("power map size does not match dimensions");
  }
  Spectrum spec;
  spec.n_k = n_k;
  spec.n_l = n_l;
  spec.power = std::move(power);
  finalize_magnitude(spec);
  return spec;
}

inline Spectrum range_doppler_fft(std::span<const std::complex<float>> iq, int n_samples,
                                  int n_chirps, int n_antennas, Window window = Window::kHann) {
  const std::size_t expected = static_cast<std::size_t>(n_samples) * n_chirps * n_antennas;
  if (iq.size() != expected) throw ShapeMismatch("IQ cube size does not match dimensions");

  std::vector<double> wk(n_samples, 1.0), wl(n_chirps, 1.0);
  if (window == Window::kHann) {
    wk = fft::hann(n_samples);
    wl = fft::hann(n_chirps);
  }

  Spectrum spec;
  spec.n_k = n_samples;
  spec.n_l = n_chirps;
  spec.n_a = n_antennas;
  spec.cells.assign(expected, {});
  double sum_k = 0, sum_l = 0;
  for (double w : wk) sum_k += w;
  for (double w : wl) sum_l += w;
  spec.gain_k = sum_k / n_samples;
  spec.gain_l = sum_l / n_chirps;

  const fft::Plan plan_k(n_samples), plan_l(n_chirps);
  std::vector<std::complex<double>> buf_k(n_samples), buf_l(n_chirps);
  // Intermediate [k][chirp] per antenna.
  std::vector<std::complex<double>> stage(static_cast<std::size_t>(n_samples) * n_chirps);
  for (int a = 0; a < n_antennas; ++a) {
    for (int m = 0; m < n_chirps; ++m) {
      for (int n = 0; n < n_samples; ++n) {
        const auto v = iq[(static_cast<std::size_t>(n) * n_chirps + m) * n_antennas + a];
        buf_k[n] = std::complex<double>(v.real(), v.imag()) * (wk[n] * wl[m]);
      }
      plan_k.forward(buf_k);
      for (int k = 0; k < n_samples; ++k) stage[static_cast<std::size_t>(k) * n_chirps + m] = buf_k[k];
    }
    for (int k = 0; k < n_samples; ++k) {
      std::copy_n(stage.begin() + static_cast<std::ptrdiff_t>(k) * n_chirps, n_chirps, buf_l.begin());
      plan_l.forward(buf_l);
      for (int m = 0; m < n_chirps; ++m) {
        const int l = (m + n_chirps / 2) % n_chirps;
        spec.cells[spec.at(k, l) * n_antennas + a] = buf_l[m];
      }
    }
  }

  spec.power.assign(static_cast<std::size_t>(n_samples) * n_chirps, 0.0);
  for (std::size_t c = 0; c < spec.power.size(); ++c) {
    double p = 0;
    for (int a = 0; a < n_antennas; ++a) p += std::norm(spec.cells[c * n_antennas + a]);
    spec.power[c] = p;
  }
  finalize_magnitude(spec);
  return spec;
}

inline Spectrum range_doppler_fft(const sim::RawFrame& frame, Window window = Window::kHann) {
  return range_doppler_fft(frame.iq, frame.n_samples, frame.n_chirps, frame.n_antennas, window);
}

// Bin of the spectrum peak predicted for a scatterer (fractional).
inline std::pair<double, double> predicted_bin(const sim::Scatterer& s,
                                               const sim::RadarConfig& cfg) {
  return {s.range_m / cfg.range_resolution_m(),
          cfg.n_chirps / 2.0 + s.radial_velocity_mps / cfg.velocity_resolution_mps()};
}

// ---------------------------------------------------------------------------
// OS-CFAR

struct CfarParams {
  // Training cells extend window_cells / 2 bins to each side of the cell under
  // test; the central (2 guard_cells + 1)^2 block is excluded.
  int window_cells = 16;
  int guard_cells = 2;
  double rank_fraction = 0.75;
  double threshold_scale_db = 12.0;

  int half_window() const { return window_cells / 2; }

  void validate() const {
    if (guard_cells < 0 || window_cells <= 2 * guard_cells) {
      throw InvalidConfig("CFAR window must exceed twice the guard size");
    }
    if (!(rank_fraction > 0.0 && rank_fraction < 1.0)) {
      throw InvalidConfig("CFAR rank_fraction must lie in (0, 1)");
    }
  }
};

struct Detection {
  int k = 0;
  int l = 0;
  double snr_db = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Index of the ordered statistic within a population of n training cells.
inline std::size_t cfar_rank_index(std::size_t n, double rank_fraction) {
  return std::min(n - 1, static_cast<std::size_t>(rank_fraction * static_cast<double>(n - 1)));
}

inline bool is_local_max(const Spectrum& spec, int k, int l) {
  const double p = spec.power[spec.at(k, l)];
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dl = -1; dl <= 1; ++dl) {
      if (dk == 0 && dl == 0) continue;
      const int kk = k + dk, ll = l + dl;
      if (kk < 0 || kk >= spec.n_k || ll < 0 || ll >= spec.n_l) continue;
      if (spec.power[spec.at(kk, ll)] > p) return false;
    }
  }
  return true;
}

// Ordered-statistics CFAR on the linear power map. A cell is reported when
// its power exceeds threshold_scale times the rank_fraction quantile of its
// training cells and it is not smaller than any of its 8 neighbours. The
// window is clamped at the spectrum borders. Output is sorted by (k, l).
inline std::vector<Detection> os_cfar_detect(const Spectrum& spec, const CfarParams& params) {
  params.validate();
  const double scale = std::pow(10.0, params.threshold_scale_db / 10.0);
  const int h = params.half_window();
  const int g = params.guard_cells;
  std::vector<Detection> out;
  std::vector<double> train;
  train.reserve(static_cast<std::size_t>((2 * h + 1) * (2 * h + 1)));

  for (int k = 0; k < spec.n_k; ++k) {
    for (int l = 0; l < spec.n_l; ++l) {
      const double p = spec.power[spec.at(k, l)];
      if (!(p > 0.0) || !is_local_max(spec, k, l)) continue;
      train.clear();
      const int k0 = std::max(0, k - h), k1 = std::min(spec.n_k - 1, k + h);
      const int l0 = std::max(0, l - h), l1 = std::min(spec.n_l - 1, l + h);
      for (int kk = k0; kk <= k1; ++kk) {
        const bool guard_row = std::abs(kk - k) <= g;
        const double* row = spec.power.data() + spec.at(kk, 0);
        for (int ll = l0; ll <= l1; ++ll) {
          if (guard_row && std::abs(ll - l) <= g) continue;
          train.push_back(row[ll]);
        }
      }
      if (train.empty()) continue;
      const std::size_t r = cfar_rank_index(train.size(), params.rank_fraction);
      std::nth_element(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(r), train.end());
      const double level = train[r];
      if (p > scale * level) {
        const double snr = level > 0.0 ? 10.0 * std::log10(p / level) : 300.0;
        out.push_back({k, l, snr});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angle estimation

// Zero-padded DFT beamformer over the antenna snapshot with quadratic peak
// interpolation on log-magnitude. Returns the azimuth in (-pi/2, pi/2).
inline double estimate_azimuth(std::span<const std::complex<double>> snapshot,
                               double spacing_wavelengths, int padding = 8) {
  const int na = static_cast<int>(snapshot.size());
  const int m = na * padding;
  if (na == 0 || m < 3) return 0.0;

  // Signed integer frequency index keeps conj(snapshot) an exact mirror.
  auto freq_index = [m](int b) { return b < m / 2 ? b : b - m; };
  std::vector<double> mag(m);
  for (int b = 0; b < m; ++b) {
    const double f = static_cast<double>(freq_index(b)) / m;
    double re = 0, im = 0;
    for (int a = 0; a < na; ++a) {
      const double theta = 2.0 * std::numbers::pi * f * a;
      const double c = std::cos(theta), s = std::sin(theta);
      const double xr = snapshot[a].real(), xi = snapshot[a].imag();
      re += xr * c + xi * s;
      im += xi * c - xr * s;
    }
    mag[b] = re * re + im * im;
  }
  int best = 0;
  for (int b = 1; b < m; ++b) {
    if (mag[b] > mag[best]) best = b;
  }
  if (!(mag[best] > 0.0)) return 0.0;

  const double y0 = std::log(mag[best]);
  const double ym = std::log(std::max(mag[(best + m - 1) % m], 1e-300));
  const double yp = std::log(std::max(mag[(best + 1) % m], 1e-300));
  const double denom = (ym + yp) - 2.0 * y0;
  double delta = 0.0;
  if (denom < 0.0) delta = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);

  // The Nyquist bin is signed by the side the interpolated peak falls on.
  double pos = static_cast<double>(freq_index(best)) + delta;
  if (pos < -0.5 * m) pos += m;
  const double f_hat = pos / m;
  const double sine = std::clamp(f_hat / spacing_wavelengths, -1.0 + 1e-12, 1.0 - 1e-12);
  return std::asin(sine);
}

inline double estimate_azimuth(const Spectrum& spec, int k, int l, double spacing_wavelengths,
                               int padding = 8) {
  if (k < 0 || k >= spec.n_k || l < 0 || l >= spec.n_l) {
    throw ShapeMismatch("azimuth bin outside spectrum");
  }
  return estimate_azimuth(spec.snapshot(k, l), spacing_wavelengths, padding);
}

// ---------------------------------------------------------------------------
// Reflection attributes

// One-way antenna power gain, cosine shaped, in dB.
inline double antenna_gain_db(double azimuth_rad) {
  return 10.0 * std::log10(std::max(std::cos(azimuth_rad), 1e-3));
}

// Peak power of a boresight 0 dBsm scatterer at 1 m after windowed 2D FFT
// and antenna summation, in dB.
inline double rcs_calibration_db(const sim::RadarConfig& cfg, double gain_k = 0.5,
                                 double gain_l = 0.5) {
  const double coherent = cfg.n_samples * gain_k * cfg.n_chirps * gain_l;
  return 20.0 * std::log10(coherent) + 10.0 * std::log10(static_cast<double>(cfg.n_antennas));
}

inline double compute_rcs(double snapshot_power_db, double range_m, double azimuth_rad,
                          const sim::RadarConfig& cfg, double gain_k = 0.5, double gain_l = 0.5) {
  if (!(range_m > 0.0)) throw NonPositiveRange("RCS requires a positive range");
  constexpr double kReferenceRange = 1.0;
  return snapshot_power_db + 40.0 * std::log10(range_m / kReferenceRange) -
         2.0 * antenna_gain_db(azimuth_rad) - rcs_calibration_db(cfg, gain_k, gain_l);
}

inline std::pair<double, double> to_cartesian(double range_m, double azimuth_rad) {
  if (range_m < 0.0) throw NonPositiveRange("negative range");
  return {range_m * std::cos(azimuth_rad), range_m * std::sin(azimuth_rad)};
}

struct InterpolatedPeak {
  double k = 0;
  double l = 0;
  double power_db = 0;
};

// Three-point parabolic refinement of a peak along each axis, in dB. Removes
// most of the window scalloping loss for off-bin targets.
inline InterpolatedPeak interpolate_peak(const Spectrum& spec, int k, int l) {
  InterpolatedPeak peak{static_cast<double>(k), static_cast<double>(l), spec.db(k, l)};
  auto refine = [&](double ym, double y0, double yp, double& pos) {
    const double denom = (ym + yp) - 2.0 * y0;
    if (!(denom < 0.0)) return;
    const double delta = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
    pos += delta;
    peak.power_db += -0.25 * (ym - yp) * delta;
  };
  const double y0 = spec.db(k, l);
  if (k > 0 && k + 1 < spec.n_k) refine(spec.db(k - 1, l), y0, spec.db(k + 1, l), peak.k);
  if (l > 0 && l + 1 < spec.n_l) refine(spec.db(k, l - 1), y0, spec.db(k, l + 1), peak.l);
  return peak;
}

struct Reflection {
  int k_bin = 0;
  int l_bin = 0;
  double range_m = 0;
  double velocity_mps = 0;
  double azimuth_rad = 0;
  double rcs_dbsm = 0;
  double x_m = 0;
  double y_m = 0;
  double snr_db = 0;
};

inline Reflection make_reflection(const Spectrum& spec, const Detection& det,
                                  const sim::RadarConfig& cfg) {
  const InterpolatedPeak peak = interpolate_peak(spec, det.k, det.l);
  Reflection r;
  r.k_bin = det.k;
  r.l_bin = det.l;
  r.snr_db = det.snr_db;
  r.range_m = peak.k * cfg.range_resolution_m();
  r.velocity_mps = (peak.l - spec.n_l / 2.0) * cfg.velocity_resolution_mps();
  r.azimuth_rad = estimate_azimuth(spec, det.k, det.l, cfg.antenna_spacing_wavelengths);
  r.rcs_dbsm = compute_rcs(peak.power_db, r.range_m, r.azimuth_rad, cfg, spec.gain_k, spec.gain_l);
  std::tie(r.x_m, r.y_m) = to_cartesian(r.range_m, r.azimuth_rad);
  return r;
}

// Full detection chain for one spectrum. Detections in the DC range bin carry
// no usable range and are dropped.
inline std::vector<Reflection> extract_reflections(const Spectrum& spec,
                                                   const sim::RadarConfig& cfg,
                                                   const CfarParams& params) {
  std::vector<Reflection> out;
  for (const Detection& det : os_cfar_detect(spec, params)) {
    if (det.k == 0) continue;
    Reflection r = make_reflection(spec, det, cfg);
    if (r.range_m <= 0.0) continue;
    out.push_back(r);
  }
  return out;
}

inline void write_reflections(std::ostream& os, std::span<const Reflection> reflections) {
  os << "k,l,range_m,velocity_mps,azimuth_rad,rcs_dbsm,x_m,y_m,snr_db\n";
  for (const Reflection& r : reflections) {
    os << r.k_bin << ',' << r.l_bin << ',' << r.range_m << ',' << r.velocity_mps << ','
       << r.azimuth_rad << ',' << r.rcs_dbsm << ',' << r.x_m << ',' << r.y_m << ',' << r.snr_db
       << '\n';
  }
}

}  // namespace radarnas::dsp
