// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"
#include "posekit/heatmap.hpp"
#include "posekit/joints.hpp"
#include "posekit/metrics.hpp"
#include "posekit/scale_recovery.hpp"
#include "posekit/synth.hpp"

namespace posekit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Cameras: {"fx":..., "fy":..., "cx":..., "cy":...}

inline json to_json(const CameraIntrinsics& K) {
  return json{{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}};
}

inline CameraIntrinsics camera_from_json(const json& j) {
  try {
    return CameraIntrinsics(j.at("fx").get<double>(), j.at("fy").get<double>(),
                            j.at("cx").get<double>(), j.at("cy").get<double>());
  } catch (const json::exception& e) {
    throw IoError(std::string("camera JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Poses: {"frame":"absolute|root_relative","root_index":i,"joints":[[X,Y,Z],...]}

inline json to_json(const Pose3D& p) {
  json joints = json::array();
  for (const auto& X : p.joints) joints.push_back({X.x(), X.y(), X.z()});
  return json{{"frame", p.frame == Frame::Absolute ? "absolute" : "root_relative"},
              {"root_index", p.root_index},
              {"joints", std::move(joints)}};
}

inline Pose3D pose3d_from_json(const json& j) {
  try {
    Pose3D p;
    const std::string frame = j.at("frame").get<std::string>();
    if (frame == "absolute") {
      p.frame = Frame::Absolute;
    } else if (frame == "root_relative") {
      p.frame = Frame::RootRelative;
    } else {
      throw IoError("pose JSON: frame must be \"absolute\" or \"root_relative\"");
    }
    p.root_index = j.at("root_index").get<int>();
    for (const auto& row : j.at("joints")) {
      if (row.size() != 3) throw IoError("pose JSON: each joint needs 3 coordinates");
      p.joints.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
    }
    if (p.root_index < 0 || p.root_index >= p.joint_count()) {
      throw IoError("pose JSON: root_index out of range");
    }
    if (p.frame == Frame::RootRelative &&
        p.joints[static_cast<size_t>(p.root_index)].cwiseAbs().maxCoeff() > 1e-9) {
      throw IoError("pose JSON: root-relative pose must have its root at the origin");
    }
    return p;
  } catch (const json::exception& e) {
    throw IoError(std::string("pose JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Bone specs: {"edges":[[i,j],...],"target_lengths_mm":[...]}

inline json to_json(const BoneSpec& b) {
  json edges = json::array();
  for (const auto& [a, c] : b.edges) edges.push_back({a, c});
  return json{{"edges", std::move(edges)}, {"target_lengths_mm", b.target_lengths_mm}};
}

inline BoneSpec bonespec_from_json(const json& j) {
  try {
    BoneSpec b;
    for (const auto& e : j.at("edges")) {
      if (e.size() != 2) throw IoError("bone spec JSON: each edge needs 2 indices");
      b.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    b.target_lengths_mm = j.at("target_lengths_mm").get<std::vector<double>>();
    return b;
  } catch (const json::exception& e) {
    throw IoError(std::string("bone spec JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Eval protocols

inline EvalProtocol protocol_from_json(const json& j) {
  try {
    EvalProtocol p;
    p.root_align = j.value("root_align", p.root_align);
    p.procrustes = j.value("procrustes", p.procrustes);
    p.pck_threshold_mm = j.value("pck_threshold_mm", p.pck_threshold_mm);
    p.auc_max_mm = j.value("auc_max_mm", p.auc_max_mm);
    p.joint_subset = j.value("joint_subset", p.joint_subset);
    p.bone_rescale = j.value("bone_rescale", p.bone_rescale);
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw IoError(std::string("protocol JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scene specs

inline SceneSpec scenespec_from_json(const json& j) {
  try {
    SceneSpec s;
    s.person_count = j.value("person_count", s.person_count);
    if (j.contains("depth_range_mm")) {
      const auto& r = j.at("depth_range_mm");
      if (r.size() != 2) throw IoError("scene spec JSON: depth_range_mm needs [min,max]");
      s.depth_min_mm = r[0].get<double>();
      s.depth_max_mm = r[1].get<double>();
    }
    s.bones = j.contains("bones") ? bonespec_from_json(j.at("bones")) : default_bone_spec();
    if (j.contains("noise")) {
      s.noise.sigma_2d_normalized = j.at("noise").value("sigma_2d_normalized", 0.0);
      s.noise.sigma_rel3d_mm = j.at("noise").value("sigma_rel3d_mm", 0.0);
    }
    s.truncation = j.value("truncation", s.truncation);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene spec JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Heatmap volumes: one-line JSON header, '\n', then the values as a flat
// little-endian float32 array (joint-major, then x, y, z row-major).
// Metric-mode header: {"joints":J,"bins":[nx,ny,nz],"mode":"metric",
// "extents_mm":[W,H,D]}. Image25d adds "crop_px":[w,h] and "stride_px".

namespace detail {

inline void append_le_f32(std::string& out, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) | ((u & 0x0000FF00u) << 8) |
        ((u & 0x000000FFu) << 24);
  }
  out.push_back(static_cast<char>(u & 0xFF));
  out.push_back(static_cast<char>((u >> 8) & 0xFF));
  out.push_back(static_cast<char>((u >> 16) & 0xFF));
  out.push_back(static_cast<char>((u >> 24) & 0xFF));
}

inline float read_le_f32(const char* p) {
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])); };
  const std::uint32_t u = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace detail

inline std::string serialize_volume(const HeatmapVolume& v) {
  json header{{"joints", v.joints},
              {"bins", {v.geometry.nx, v.geometry.ny, v.geometry.nz}},
              {"mode", v.geometry.mode == HeatmapMode::Metric ? "metric" : "image25d"},
              {"extents_mm", {v.geometry.extent_w, v.geometry.extent_h, v.geometry.extent_d}}};
  if (v.geometry.mode == HeatmapMode::Image25D) {
    header["crop_px"] = {v.geometry.crop_w, v.geometry.crop_h};
    header["stride_px"] = v.geometry.stride;
  }
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + v.values.size() * 4);
  for (double x : v.values) detail::append_le_f32(out, static_cast<float>(x));
  return out;
}

inline HeatmapVolume deserialize_volume(const std::string& data) {
  const size_t nl = data.find('\n');
  if (nl == std::string::npos) throw IoError("volume: missing header line");
  json header;
  try {
    header = json::parse(data.substr(0, nl));
    HeatmapVolume v;
    v.joints = header.at("joints").get<int>();
    const auto& bins = header.at("bins");
    const std::string mode = header.at("mode").get<std::string>();
    const auto& ext = header.at("extents_mm");
    if (mode == "metric") {
      v.geometry = HeatmapGeometry::metric(bins[0].get<int>(), bins[1].get<int>(),
                                           bins[2].get<int>(), ext[0].get<double>(),
                                           ext[1].get<double>(), ext[2].get<double>());
    } else if (mode == "image25d") {
      const auto& crop = header.at("crop_px");
      v.geometry = HeatmapGeometry::image25d(crop[0].get<int>(), crop[1].get<int>(),
                                             header.at("stride_px").get<int>(),
                                             bins[2].get<int>(), ext[2].get<double>());
      if (v.geometry.nx != bins[0].get<int>() || v.geometry.ny != bins[1].get<int>()) {
        throw IoError("volume: bins inconsistent with crop and stride");
      }
    } else {
      throw IoError("volume: unknown mode " + mode);
    }
    const size_t n = static_cast<size_t>(v.geometry.bins_per_joint()) * v.joints;
    if (data.size() - nl - 1 != n * 4) {
      throw IoError("volume: payload size does not match header");
    }
    v.values.resize(n);
    const char* p = data.data() + nl + 1;
    for (size_t i = 0; i < n; ++i) v.values[i] = detail::read_le_f32(p + 4 * i);
    return v;
  } catch (const json::exception& e) {
    throw IoError(std::string("volume header: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("failed writing " + path);
}

inline json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("parsing " + path + ": " + e.what());
  }
}

}  // namespace posekit
