// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/rng.hpp"

namespace testutil {

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Relative agreement check with an absolute floor for near-zero values.
inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

inline posekit::Pose3D random_rel_pose(posekit::Rng& rng, int joints, double spread_mm,
                                       int root = 0) {
  posekit::Pose3D p;
  p.frame = posekit::Frame::RootRelative;
  p.root_index = root;
  p.joints.resize(static_cast<size_t>(joints));
  for (int j = 0; j < joints; ++j) {
    if (j == root) {
      p.joints[static_cast<size_t>(j)].setZero();
    } else {
      p.joints[static_cast<size_t>(j)] =
          Eigen::Vector3d(rng.uniform(-spread_mm, spread_mm), rng.uniform(-spread_mm, spread_mm),
                          rng.uniform(-spread_mm, spread_mm));
    }
  }
  return p;
}

inline posekit::Pose3D random_abs_pose(posekit::Rng& rng, int joints, double spread_mm,
                                       double depth_mm) {
  posekit::Pose3D p = random_rel_pose(rng, joints, spread_mm);
  p.frame = posekit::Frame::Absolute;
  for (auto& X : p.joints) X.z() += depth_mm;
  return p;
}

}  // namespace testutil
