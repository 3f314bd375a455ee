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

// On-disk formats for raw recordings and processed ROI datasets.
//
// Raw dataset: one directory per track holding meta.json (category, scenario,
// radar config echo, per-frame ground truth) and frame_NNNN.iq files. Each IQ
// file is a 32-byte header followed by interleaved little-endian float32
// real/imag values in [sample][chirp][antenna] order:
//
//   bytes 0-5   magic "RRNAS1"
//   bytes 6-7   u16 format version (1)
//   bytes 8-19  u32 n_samples, n_chirps, n_antennas
//   bytes 20-23 u32 dtype code (1 = complex float32)
//   bytes 24-31 reserved, zero
//
// Processed dataset (ROIDS1): magic, u16 version, u32 record count, u32
// record size, u32 JSON length, JSON header (counts and config echo), then
// fixed-size records of ROI floats, RCS floats, u8 label, u32 track id,
// u32 frame index, u8 split.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radarnas/association_roi.hpp"
#include "radarnas/common.hpp"
#include "radarnas/signal_sim.hpp"

namespace radarnas::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr char kIqMagic[6] = {'R', 'R', 'N', 'A', 'S', '1'};
inline constexpr char kRoiMagic[6] = {'R', 'O', 'I', 'D', 'S', '1'};
inline constexpr std::uint32_t kDtypeComplexFloat32 = 1;

// ---------------------------------------------------------------------------
// JSON conversions

inline json to_json(const sim::RadarConfig& c) {
  return {{"carrier_freq_hz", c.carrier_freq_hz},
          {"bandwidth_hz", c.bandwidth_hz},
          {"cpi_duration_s", c.cpi_duration_s},
          {"n_samples", c.n_samples},
          {"n_chirps", c.n_chirps},
          {"n_antennas", c.n_antennas},
          {"antenna_spacing_wavelengths", c.antenna_spacing_wavelengths},
          {"noise_floor_db", c.noise_floor_db},
          {"dynamic_range_db", c.dynamic_range_db},
          {"rng_seed", c.rng_seed},
          {"noise_enabled", c.noise_enabled}};
}

inline sim::RadarConfig radar_config_from_json(const json& j) {
  sim::RadarConfig c;
  c.carrier_freq_hz = j.at("carrier_freq_hz").get<double>();
  c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  c.cpi_duration_s = j.at("cpi_duration_s").get<double>();
  c.n_samples = j.at("n_samples").get<int>();
  c.n_chirps = j.at("n_chirps").get<int>();
  c.n_antennas = j.at("n_antennas").get<int>();
  c.antenna_spacing_wavelengths = j.at("antenna_spacing_wavelengths").get<double>();
  c.noise_floor_db = j.at("noise_floor_db").get<double>();
  c.dynamic_range_db = j.at("dynamic_range_db").get<double>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.noise_enabled = j.value("noise_enabled", true);
  c.validate();
  return c;
}

inline json to_json(const sim::SceneObject& o) {
  json scatterers = json::array();
  for (std::size_t i = 0; i < o.scatterers.size(); ++i) {
    const auto& s = o.scatterers[i];
    scatterers.push_back({{"range_m", s.range_m},
                          {"radial_velocity_mps", s.radial_velocity_mps},
                          {"azimuth_rad", s.azimuth_rad},
                          {"rcs_dbsm", s.rcs_dbsm},
                          {"micro_doppler_amplitude_mps", s.micro_doppler_amplitude_mps},
                          {"micro_doppler_freq_hz", s.micro_doppler_freq_hz},
                          {"micro_doppler_phase_rad", s.micro_doppler_phase_rad},
                          {"offset_m", {o.offsets_m[i][0], o.offsets_m[i][1]}}});
  }
  return {{"category", category_name(o.category)},
          {"centroid_xy_m", {o.centroid_xy_m[0], o.centroid_xy_m[1]}},
          {"lateral_velocity_mps", o.lateral_velocity_mps},
          {"ego_speed_mps", o.ego_speed_mps},
          {"scatterers", scatterers}};
}

inline sim::SceneObject scene_object_from_json(const json& j) {
  sim::SceneObject o;
  o.category = category_from_name(j.at("category").get<std::string>());
  o.centroid_xy_m = {j.at("centroid_xy_m").at(0).get<double>(),
                     j.at("centroid_xy_m").at(1).get<double>()};
  o.lateral_velocity_mps = j.at("lateral_velocity_mps").get<double>();
  o.ego_speed_mps = j.at("ego_speed_mps").get<double>();
  for (const json& s : j.at("scatterers")) {
    sim::Scatterer sc;
    sc.range_m = s.at("range_m").get<double>();
    sc.radial_velocity_mps = s.at("radial_velocity_mps").get<double>();
    sc.azimuth_rad = s.at("azimuth_rad").get<double>();
    sc.rcs_dbsm = s.at("rcs_dbsm").get<double>();
    sc.micro_doppler_amplitude_mps = s.at("micro_doppler_amplitude_mps").get<double>();
    sc.micro_doppler_freq_hz = s.at("micro_doppler_freq_hz").get<double>();
    sc.micro_doppler_phase_rad = s.at("micro_doppler_phase_rad").get<double>();
    o.scatterers.push_back(sc);
    o.offsets_m.push_back({s.at("offset_m").at(0).get<double>(), s.at("offset_m").at(1).get<double>()});
  }
  return o;
}

// ---------------------------------------------------------------------------
// Raw IQ frames

inline void write_iq(const fs::path& path, const sim::RawFrame& frame) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kIqMagic, sizeof(kIqMagic));
  write_pod<std::uint16_t>(os, 1);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(frame.n_samples));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(frame.n_chirps));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(frame.n_antennas));
  write_pod<std::uint32_t>(os, kDtypeComplexFloat32);
  write_pod<std::uint64_t>(os, 0);
  static_assert(sizeof(std::complex<float>) == 8);
  os.write(reinterpret_cast<const char*>(frame.iq.data()),
           static_cast<std::streamsize>(frame.iq.size() * sizeof(std::complex<float>)));
  if (!os) throw Error("write failed for " + path.string());
}

inline sim::RawFrame read_iq(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[6];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 6, kIqMagic)) {
    throw FormatError(path.string() + ": bad IQ magic");
  }
  try {
    const auto version = read_pod<std::uint16_t>(is);
    if (version != 1) throw FormatError("unsupported IQ version " + std::to_string(version));
    sim::RawFrame frame;
    frame.n_samples = static_cast<int>(read_pod<std::uint32_t>(is));
    frame.n_chirps = static_cast<int>(read_pod<std::uint32_t>(is));
    frame.n_antennas = static_cast<int>(read_pod<std::uint32_t>(is));
    if (read_pod<std::uint32_t>(is) != kDtypeComplexFloat32) throw FormatError("unsupported dtype");
    read_pod<std::uint64_t>(is);
    const std::size_t n = static_cast<std::size_t>(frame.n_samples) * frame.n_chirps * frame.n_antennas;
    frame.iq.resize(n);
    is.read(reinterpret_cast<char*>(frame.iq.data()), static_cast<std::streamsize>(n * 8));
    if (!is) throw FormatError("truncated IQ payload");
    return frame;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Raw dataset directories

inline std::string track_dir_name(int track_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "track_%05d", track_id);
  return buf;
}

inline std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04zu.iq", index);
  return buf;
}

inline void write_json_file(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

inline json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_track(const fs::path& root, const sim::TrackRecording& track,
                        const sim::RadarConfig& cfg) {
  const fs::path dir = root / track_dir_name(track.track_id);
  fs::create_directories(dir);
  json frames = json::array();
  for (std::size_t f = 0; f < track.frames.size(); ++f) {
    json truth = json::array();
    for (const auto& o : track.frames[f].truth) truth.push_back(to_json(o));
    frames.push_back({{"index", f}, {"file", frame_file_name(f)}, {"truth", truth}});
    write_iq(dir / frame_file_name(f), track.frames[f]);
  }
  write_json_file(dir / "meta.json", {{"track_id", track.track_id},
                                      {"category", category_name(track.category)},
                                      {"scenario_tag", track.scenario_tag},
                                      {"radar_config", to_json(cfg)},
                                      {"frames", frames}});
}

inline std::vector<fs::path> list_track_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw FormatError(root.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("track_", 0) == 0) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

struct LoadedTrack {
  sim::TrackRecording track;
  sim::RadarConfig config;
};

inline LoadedTrack read_track(const fs::path& dir) {
  const json meta = read_json_file(dir / "meta.json");
  LoadedTrack out;
  try {
    out.config = radar_config_from_json(meta.at("radar_config"));
    out.track.track_id = meta.at("track_id").get<int>();
    out.track.category = category_from_name(meta.at("category").get<std::string>());
    out.track.scenario_tag = meta.at("scenario_tag").get<std::string>();
    for (const json& fr : meta.at("frames")) {
      sim::RawFrame frame = read_iq(dir / fr.at("file").get<std::string>());
      if (frame.n_samples != out.config.n_samples || frame.n_chirps != out.config.n_chirps ||
          frame.n_antennas != out.config.n_antennas) {
        throw FormatError(fr.at("file").get<std::string>() + ": dimensions disagree with config");
      }
      for (const json& o : fr.at("truth")) frame.truth.push_back(scene_object_from_json(o));
      out.track.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/meta.json: " + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// ROIDS1

struct RoiDataset {
  json header;
  std::vector<roi::RoiSample> samples;
};

inline std::size_t roi_record_size(int roi_size, int rcs_length) {
  return static_cast<std::size_t>(roi_size) * roi_size * 4 + static_cast<std::size_t>(rcs_length) * 4 +
         1 + 4 + 4 + 1;
}

inline json split_summary(const std::vector<roi::RoiSample>& samples) {
  json summary = json::object();
  for (roi::Split s : {roi::Split::kTrain, roi::Split::kValidation, roi::Split::kTest}) {
    json per = json::object();
    int total = 0;
    for (Category c : kAllCategories) {
      const auto n = std::count_if(samples.begin(), samples.end(), [&](const roi::RoiSample& x) {
        return x.split == s && x.category == c;
      });
      per[std::string(category_name(c))] = n;
      total += static_cast<int>(n);
    }
    per["total"] = total;
    summary[std::string(roi::split_name(s))] = per;
  }
  return summary;
}

inline void write_roi_dataset(const fs::path& path, const std::vector<roi::RoiSample>& samples,
                              json header, int roi_size, int rcs_length) {
  header["roi_size"] = roi_size;
  header["rcs_length"] = rcs_length;
  header["n_records"] = samples.size();
  header["counts"] = split_summary(samples);
  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kRoiMagic, sizeof(kRoiMagic));
  write_pod<std::uint16_t>(os, 1);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(samples.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(roi_record_size(roi_size, rcs_length)));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& s : samples) {
    if (s.roi.size() != static_cast<std::size_t>(roi_size) * roi_size ||
        s.rcs.size() != static_cast<std::size_t>(rcs_length)) {
      throw ShapeMismatch("sample does not match ROI dataset record layout");
    }
    os.write(reinterpret_cast<const char*>(s.roi.data()), static_cast<std::streamsize>(s.roi.size() * 4));
    os.write(reinterpret_cast<const char*>(s.rcs.data()), static_cast<std::streamsize>(s.rcs.size() * 4));
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(s.category));
    write_pod<std::uint32_t>(os, s.track_id);
    write_pod<std::uint32_t>(os, s.frame_index);
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(s.split));
  }
  if (!os) throw Error("write failed for " + path.string());
}

inline RoiDataset read_roi_dataset(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[6];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 6, kRoiMagic)) {
    throw FormatError(path.string() + ": bad ROIDS1 magic");
  }
  RoiDataset ds;
  try {
    if (read_pod<std::uint16_t>(is) != 1) throw FormatError("unsupported ROIDS version");
    const auto n = read_pod<std::uint32_t>(is);
    const auto record_size = read_pod<std::uint32_t>(is);
    const auto json_len = read_pod<std::uint32_t>(is);
    std::string text(json_len, '\0');
    is.read(text.data(), json_len);
    if (!is) throw FormatError("truncated header");
    ds.header = json::parse(text);
    const int roi_size = ds.header.at("roi_size").get<int>();
    const int rcs_length = ds.header.at("rcs_length").get<int>();
    if (record_size != roi_record_size(roi_size, rcs_length)) {
      throw FormatError("record size disagrees with header");
    }
    ds.samples.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      roi::RoiSample s;
      s.roi.resize(static_cast<std::size_t>(roi_size) * roi_size);
      s.rcs.resize(static_cast<std::size_t>(rcs_length));
      is.read(reinterpret_cast<char*>(s.roi.data()), static_cast<std::streamsize>(s.roi.size() * 4));
      is.read(reinterpret_cast<char*>(s.rcs.data()), static_cast<std::streamsize>(s.rcs.size() * 4));
      s.category = category_from_label(read_pod<std::uint8_t>(is));
      s.track_id = read_pod<std::uint32_t>(is);
      s.frame_index = read_pod<std::uint32_t>(is);
      const auto split = read_pod<std::uint8_t>(is);
      if (split > 2) throw FormatError("bad split tag in record " + std::to_string(i));
      s.split = static_cast<roi::Split>(split);
      s.n_reflections = static_cast<int>(std::count_if(s.rcs.begin(), s.rcs.end(),
                                                       [](float v) { return v != 0.0f; }));
      ds.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace radarnas::io
