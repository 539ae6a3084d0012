// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"
#include "posekit/reconstruction.hpp"
#include "posekit/rng.hpp"
#include "posekit/scale_recovery.hpp"

namespace posekit {

/// Additive Gaussian noise applied to the measurement channels of a
/// generated scene.
struct NoiseModel {
  double sigma_2d_normalized = 0.0;
  double sigma_rel3d_mm = 0.0;
};

struct SceneSpec {
  int person_count = 1;
  double depth_min_mm = 2000.0;
  double depth_max_mm = 6000.0;
  BoneSpec bones;
  NoiseModel noise;
  bool truncation = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(depth_min_mm > 0.0) || !(depth_max_mm >= depth_min_mm)) {
      throw ContractError("SceneSpec: depth range must be positive");
    }
    if (noise.sigma_2d_normalized < 0.0 || noise.sigma_rel3d_mm < 0.0) {
      throw ContractError("SceneSpec: noise sigmas must be >= 0");
    }
    if (person_count < 1) throw ContractError("SceneSpec: person_count must be >= 1");
  }
};

/// Random root-relative pose on the given skeleton: walking the bone tree
/// from the root, each bone gets a uniformly random direction at its
/// reference length. Rejection-samples until the pose fits a 2.2 m cube.
inline Pose3D random_pose(const BoneSpec& bones, Rng& rng) {
  const int J = 1 + static_cast<int>(bones.edges.size());
  bones.validate(J);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Pose3D pose;
    pose.frame = Frame::RootRelative;
    pose.root_index = 0;
    pose.joints.assign(static_cast<size_t>(J), Eigen::Vector3d::Zero());
    std::vector<bool> placed(static_cast<size_t>(J), false);
    placed[0] = true;
    // Edges are expected parent-before-child; walk until everything places.
    std::vector<bool> done(bones.edges.size(), false);
    int remaining = static_cast<int>(bones.edges.size());
    while (remaining > 0) {
      bool progress = false;
      for (size_t i = 0; i < bones.edges.size(); ++i) {
        if (done[i]) continue;
        const auto [parent, child] = bones.edges[i];
        if (!placed[static_cast<size_t>(parent)]) continue;
        double dir[3];
        rng.unit_vector3(dir);
        pose.joints[static_cast<size_t>(child)] =
            pose.joints[static_cast<size_t>(parent)] +
            bones.target_lengths_mm[i] * Eigen::Vector3d(dir[0], dir[1], dir[2]);
        placed[static_cast<size_t>(child)] = true;
        done[i] = true;
        --remaining;
        progress = true;
      }
      if (!progress) throw ContractError("random_pose: bone edges do not form a rooted tree");
    }
    Eigen::Vector3d lo = pose.joints[0], hi = pose.joints[0];
    for (const auto& X : pose.joints) {
      lo = lo.cwiseMin(X);
      hi = hi.cwiseMax(X);
    }
    if ((hi - lo).maxCoeff() <= 2200.0) return pose;
  }
  throw ContractError("random_pose: rejection budget exhausted (skeleton too large for 2.2 m cube)");
}

/// All channels of a generated scene. The absolute pose and the `*_exact`
/// channels are noiseless ground truth; the measurement channels carry the
/// additive noise of the noise model (equal to the exact ones at sigma 0).
struct SceneSample {
  Pose3D absolute;           // exact
  Pose3D rel3d_exact;        // root-relative, exact
  Pose2D pixel_exact;        // exact projection
  Pose2D normalized_exact;   // exact normalized projection
  Pose2D normalized;         // measurement: normalized + 2D noise
  Pose3D rel3d;              // measurement: root-relative + 3D noise (root stays pinned)
  Pose25D pose25d;           // measurement: noisy normalized 2D + noisy relative depths
};

/// Places a root-relative pose at `offset`, projects it through K and builds
/// every ground-truth and measurement channel.
inline SceneSample place_and_project(const Pose3D& rel_pose, const CameraIntrinsics& K,
                                     const Eigen::Vector3d& offset, const NoiseModel& noise,
                                     Rng& rng) {
  if (rel_pose.frame != Frame::RootRelative) {
    throw ContractError("place_and_project: pose must be root-relative");
  }
  SceneSample s;
  s.absolute = rel_pose;
  s.absolute.frame = Frame::Absolute;
  for (auto& X : s.absolute.joints) X += offset;
  s.rel3d_exact = rel_pose;
  s.pixel_exact = project(K, s.absolute);
  s.normalized_exact = normalize_points(K, s.pixel_exact);

  s.normalized = s.normalized_exact;
  for (auto& q : s.normalized.joints) {
    q.x() += rng.normal(0.0, noise.sigma_2d_normalized);
    q.y() += rng.normal(0.0, noise.sigma_2d_normalized);
  }
  s.rel3d = s.rel3d_exact;
  for (int j = 0; j < s.rel3d.joint_count(); ++j) {
    if (j == s.rel3d.root_index) continue;  // keep the root pinned at the origin
    for (int c = 0; c < 3; ++c) {
      s.rel3d.joints[static_cast<size_t>(j)](c) += rng.normal(0.0, noise.sigma_rel3d_mm);
    }
  }
  s.pose25d.p2d = s.normalized;
  s.pose25d.rel_depth_mm.resize(s.rel3d.joints.size());
  for (size_t j = 0; j < s.rel3d.joints.size(); ++j) {
    s.pose25d.rel_depth_mm[j] = s.rel3d.joints[j].z();
  }
  s.pose25d.valid.assign(s.rel3d.joints.size(), true);
  return s;
}

struct CropRect {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  double area() const { return w * h; }
};

/// Uniformly sampled sub-rectangle of a person bounding square keeping at
/// least a quarter of its area (rejection sampling over corner pairs).
inline CropRect truncated_crop(const CropRect& bbox, Rng& rng) {
  if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) {
    throw ContractError("truncated_crop: bbox must have positive size");
  }
  const double min_area = bbox.area() / 4.0;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x1 = rng.uniform(bbox.x, bbox.x + bbox.w);
    const double x2 = rng.uniform(bbox.x, bbox.x + bbox.w);
    const double y1 = rng.uniform(bbox.y, bbox.y + bbox.h);
    const double y2 = rng.uniform(bbox.y, bbox.y + bbox.h);
    CropRect c;
    c.x = std::min(x1, x2);
    c.y = std::min(y1, y2);
    c.w = std::abs(x2 - x1);
    c.h = std::abs(y2 - y1);
    if (c.area() >= min_area) return c;
  }
  throw ContractError("truncated_crop: rejection budget exhausted");
}

struct DepthRatioRow {
  double ratio = 1.0;
  double sigma_2d = 0.0;
  double mean_z0_error_full_mm = 0.0;
  double median_z0_error_full_mm = 0.0;
  double mean_z0_error_weak_mm = 0.0;
  double median_z0_error_weak_mm = 0.0;
  int scenes = 0;
};

namespace detail {
inline double median_inplace(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

/// Builds scenes whose joint depth ratio max Z / min Z hits each target
/// exactly (a ratio of 1 flattens the pose to a fronto-parallel plane;
/// otherwise the root distance that realizes the ratio is solved for), then
/// reconstructs the root with the weak and full perspective solvers and
/// tabulates the Z0 errors.
inline std::vector<DepthRatioRow> depth_ratio_sweep(const SceneSpec& spec,
                                                    const std::vector<double>& ratios,
                                                    int scenes_per_ratio) {
  spec.validate();
  if (scenes_per_ratio < 1) throw ContractError("depth_ratio_sweep: need at least one scene");
  std::vector<DepthRatioRow> rows;
  Rng rng(spec.seed);
  for (double ratio : ratios) {
    if (!(ratio >= 1.0)) throw ContractError("depth_ratio_sweep: ratios must be >= 1");
    std::vector<double> err_full, err_weak;
    err_full.reserve(static_cast<size_t>(scenes_per_ratio));
    err_weak.reserve(static_cast<size_t>(scenes_per_ratio));
    for (int s = 0; s < scenes_per_ratio; ++s) {
      Pose3D pose = random_pose(spec.bones, rng);
      const double z0 = rng.uniform(spec.depth_min_mm, spec.depth_max_mm);
      // Scale the pose's depth spread so (z0 + a*zhi) / (z0 + a*zlo) hits the
      // target ratio exactly while the root distance stays in the configured
      // range: the ratio is varied without confounding it with distance.
      if (ratio == 1.0) {
        for (auto& X : pose.joints) X.z() = 0.0;  // planar: every joint at the root depth
      } else {
        double zlo = pose.joints[0].z(), zhi = pose.joints[0].z();
        for (const auto& X : pose.joints) {
          zlo = std::min(zlo, X.z());
          zhi = std::max(zhi, X.z());
        }
        if (zhi - zlo < 1e-9) {
          --s;  // a numerically flat pose cannot realize the ratio; resample
          continue;
        }
        const double a = (ratio - 1.0) * z0 / (zhi - ratio * zlo);
        for (auto& X : pose.joints) X.z() *= a;
      }
      const Eigen::Vector3d offset(rng.uniform(-0.15, 0.15) * z0, rng.uniform(-0.15, 0.15) * z0,
                                   z0);
      const CameraIntrinsics K(1000.0, 1000.0, 128.0, 128.0);
      const SceneSample sample = place_and_project(pose, K, offset, spec.noise, rng);
      ReconstructionInput in;
      in.p2d = sample.normalized;
      in.rel3d = sample.rel3d;
      in.mask.assign(sample.rel3d.joints.size(), true);
      err_full.push_back(std::abs(solve_root_full(in).offset.z() - z0));
      err_weak.push_back(std::abs(solve_root_weak(in).offset.z() - z0));
    }
    DepthRatioRow row;
    row.ratio = ratio;
    row.sigma_2d = spec.noise.sigma_2d_normalized;
    row.scenes = scenes_per_ratio;
    double sf = 0.0, sw = 0.0;
    for (double e : err_full) sf += e;
    for (double e : err_weak) sw += e;
    row.mean_z0_error_full_mm = sf / err_full.size();
    row.mean_z0_error_weak_mm = sw / err_weak.size();
    row.median_z0_error_full_mm = detail::median_inplace(err_full);
    row.median_z0_error_weak_mm = detail::median_inplace(err_weak);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace posekit
