// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "posekit/errors.hpp"
#include "posekit/scale_recovery.hpp"

namespace posekit {

/// Canonical 17-joint order used by the shipped subset tables and the default
/// skeleton. Index 0 (pelvis) is the root.
inline const std::array<const char*, 17>& joint_names_17() {
  static const std::array<const char*, 17> names = {
      "pelvis",    "r_hip",      "r_knee",  "r_ankle",   "l_hip",      "l_knee",
      "l_ankle",   "spine",      "neck",    "head",      "head_top",   "l_shoulder",
      "l_elbow",   "l_wrist",    "r_shoulder", "r_elbow", "r_wrist"};
  return names;
}

enum class JointSubset { J17 = 17, J16 = 16, J14 = 14 };

/// Indices (into the canonical 17-joint order) retained by each evaluation
/// subset: 17 keeps everything, 16 drops the pelvis, 14 additionally drops
/// spine and head, keeping limbs, neck and head top.
inline const std::vector<int>& subset_indices(JointSubset subset) {
  static const std::vector<int> j17 = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  static const std::vector<int> j16 = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  static const std::vector<int> j14 = {1, 2, 3, 4, 5, 6, 8, 10, 11, 12, 13, 14, 15, 16};
  switch (subset) {
    case JointSubset::J17: return j17;
    case JointSubset::J16: return j16;
    case JointSubset::J14: return j14;
  }
  throw ContractError("subset_indices: unknown subset");
}

inline JointSubset joint_subset_from_int(int n) {
  switch (n) {
    case 17: return JointSubset::J17;
    case 16: return JointSubset::J16;
    case 14: return JointSubset::J14;
    default: throw ContractError("joint subset must be 14, 16 or 17");
  }
}

/// Reindexes a pose to a named subset. If the subset drops the root joint,
/// the result is tagged absolute (its translation reference is gone) with
/// root_index 0; otherwise the frame and remapped root are preserved.
inline Pose3D select_joints(const Pose3D& p, JointSubset subset) {
  const std::vector<int>& idx = subset_indices(subset);
  if (p.joint_count() != 17) throw ContractError("select_joints: pose must have 17 joints");
  Pose3D out;
  out.joints.reserve(idx.size());
  int new_root = -1;
  for (size_t k = 0; k < idx.size(); ++k) {
    out.joints.push_back(p.joints[static_cast<size_t>(idx[k])]);
    if (idx[k] == p.root_index) new_root = static_cast<int>(k);
  }
  if (new_root >= 0) {
    out.frame = p.frame;
    out.root_index = new_root;
  } else {
    out.frame = Frame::Absolute;
    out.root_index = 0;
  }
  return out;
}

inline Pose2D select_joints(const Pose2D& p, JointSubset subset) {
  const std::vector<int>& idx = subset_indices(subset);
  if (p.joint_count() != 17) throw ContractError("select_joints: pose must have 17 joints");
  Pose2D out;
  out.space = p.space;
  out.joints.reserve(idx.size());
  out.valid.reserve(idx.size());
  for (int i : idx) {
    out.joints.push_back(p.joints[static_cast<size_t>(i)]);
    out.valid.push_back(p.valid[static_cast<size_t>(i)]);
  }
  return out;
}

/// Synthetic 17-joint skeleton with representative bone lengths (mm). These
/// are round plausible values for testing and scene generation, not averages
/// of any capture dataset.
inline BoneSpec default_bone_spec() {
  BoneSpec b;
  b.edges = {{0, 1},  {1, 2},   {2, 3},  {0, 4},  {4, 5},   {5, 6},
             {0, 7},  {7, 8},   {8, 9},  {9, 10}, {8, 11},  {11, 12},
             {12, 13}, {8, 14}, {14, 15}, {15, 16}};
  b.target_lengths_mm = {130.0, 450.0, 440.0, 130.0, 450.0, 440.0, 250.0, 250.0,
                         120.0, 110.0, 160.0, 280.0, 250.0, 160.0, 280.0, 250.0};
  return b;
}

inline constexpr int kPelvis = 0;
inline constexpr int kNeck = 8;
inline constexpr std::array<int, 2> kHips = {1, 4};

}  // namespace posekit
