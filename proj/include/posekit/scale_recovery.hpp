// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"

namespace posekit {

/// Skeleton edge list with reference bone lengths in mm.
struct BoneSpec {
  std::vector<std::pair<int, int>> edges;  // (parent, child)
  std::vector<double> target_lengths_mm;

  void validate(int joint_count) const {
    if (edges.size() != target_lengths_mm.size()) {
      throw ContractError("BoneSpec: edges and target_lengths_mm sizes differ");
    }
    for (size_t i = 0; i < edges.size(); ++i) {
      const auto [a, b] = edges[i];
      if (a < 0 || b < 0 || a >= joint_count || b >= joint_count) {
        throw ContractError("BoneSpec: edge index out of range");
      }
      if (a == b) throw ContractError("BoneSpec: self-edge");
      if (!(target_lengths_mm[i] > 0.0)) {
        throw ContractError("BoneSpec: target lengths must be positive");
      }
    }
  }
};

/// A 2.5D pose: normalized 2D joint coordinates plus root-relative metric
/// depths. Scale and distance remain unresolved until back-projection.
struct Pose25D {
  Pose2D p2d;  // normalized
  std::vector<double> rel_depth_mm;
  std::vector<bool> valid;

  int joint_count() const { return p2d.joint_count(); }
};

/// Back-projects a 2.5D pose at the hypothesized root depth Z0:
/// joint_j = (x_j, y_j, 1) * (Z0 + dZ_j).
inline Pose3D backproject_25d(const Pose25D& p, double z0) {
  if (p.p2d.space != Space::Normalized) {
    throw ContractError("backproject_25d: 2D pose must be in normalized coordinates");
  }
  const size_t J = p.p2d.joints.size();
  if (p.rel_depth_mm.size() != J || p.valid.size() != J) {
    throw ContractError("backproject_25d: field sizes do not match");
  }
  Pose3D out;
  out.frame = Frame::Absolute;
  out.joints.resize(J);
  for (size_t j = 0; j < J; ++j) {
    const double depth = z0 + p.rel_depth_mm[j];
    if (p.valid[j] && !(depth > 0.0)) {
      throw BehindCameraError("backproject_25d: joint " + std::to_string(j) +
                              " has nonpositive depth");
    }
    out.joints[j] = Eigen::Vector3d(p.p2d.joints[j].x(), p.p2d.joints[j].y(), 1.0) * depth;
  }
  return out;
}

/// Euclidean length of each edge.
inline std::vector<double> bone_lengths(const Pose3D& p, const BoneSpec& bones) {
  bones.validate(p.joint_count());
  std::vector<double> out(bones.edges.size());
  for (size_t i = 0; i < bones.edges.size(); ++i) {
    out[i] = (p.joints[static_cast<size_t>(bones.edges[i].first)] -
              p.joints[static_cast<size_t>(bones.edges[i].second)])
                 .norm();
  }
  return out;
}

struct ScaleRecoveryResult {
  double z0_mm = 0.0;
  double final_cost = 0.0;  // sum of squared bone length discrepancies, mm^2
  int iterations = 0;
  bool converged = false;
};

namespace detail {

struct UsableBone {
  Eigen::Vector3d ray_a, ray_b;  // (x, y, 1) of the endpoints
  double depth_a, depth_b;       // relative depths dZ
  double target;
};

/// Residuals r_i(Z0) = b_i(Z0) - t_i and their derivative w.r.t. Z0.
inline double bone_cost(const std::vector<UsableBone>& bones, double z0, double* grad,
                        double* gauss_newton_h) {
  double cost = 0.0, g = 0.0, h = 0.0;
  for (const UsableBone& bn : bones) {
    const Eigen::Vector3d d = bn.ray_a * (z0 + bn.depth_a) - bn.ray_b * (z0 + bn.depth_b);
    const double len = d.norm();
    const double r = len - bn.target;
    cost += r * r;
    if (grad != nullptr) {
      // d(len)/dZ0 = d . (ray_a - ray_b) / len; flat at a coincident pair
      const double dlen = len > 0.0 ? d.dot(bn.ray_a - bn.ray_b) / len : 0.0;
      g += r * dlen;
      h += dlen * dlen;
    }
  }
  if (grad != nullptr) *grad = g;
  if (gauss_newton_h != nullptr) *gauss_newton_h = h;
  return cost;
}

inline bool depths_positive(const std::vector<UsableBone>& bones, double z0) {
  for (const UsableBone& bn : bones) {
    if (!(z0 + bn.depth_a > 0.0) || !(z0 + bn.depth_b > 0.0)) return false;
  }
  return true;
}

}  // namespace detail

/// Recovers the absolute root depth by minimizing the squared discrepancy
/// between back-projected bone lengths and the reference lengths:
///   Z0* = argmin sum_i (b_i(Z0) - t_i)^2,
/// using only bones whose both endpoints are valid. A one-parameter
/// Levenberg-Marquardt descent runs from the best of 16 log-spaced seeds in
/// [500, 10000] mm plus `init_z0_mm`; damping starts at 1e-3, x10 on a
/// rejected step, /10 on an accepted one. Converged when |step| < 0.01 mm,
/// capped at 100 iterations (result then carries converged = false).
inline ScaleRecoveryResult recover_root_depth(const Pose25D& p, const BoneSpec& bones,
                                              double init_z0_mm = 2000.0) {
  bones.validate(p.joint_count());
  if (p.p2d.space != Space::Normalized) {
    throw ContractError("recover_root_depth: 2D pose must be in normalized coordinates");
  }
  std::vector<detail::UsableBone> usable;
  for (size_t i = 0; i < bones.edges.size(); ++i) {
    const size_t a = static_cast<size_t>(bones.edges[i].first);
    const size_t b = static_cast<size_t>(bones.edges[i].second);
    if (!p.valid[a] || !p.valid[b]) continue;
    detail::UsableBone bn;
    bn.ray_a = Eigen::Vector3d(p.p2d.joints[a].x(), p.p2d.joints[a].y(), 1.0);
    bn.ray_b = Eigen::Vector3d(p.p2d.joints[b].x(), p.p2d.joints[b].y(), 1.0);
    bn.depth_a = p.rel_depth_mm[a];
    bn.depth_b = p.rel_depth_mm[b];
    bn.target = bones.target_lengths_mm[i];
    usable.push_back(bn);
  }
  if (usable.empty()) {
    throw NoBonesError("recover_root_depth: no bone has both endpoints valid");
  }

  // Coarse seeding: 16 log-spaced candidates plus the caller's initial value.
  double z0 = init_z0_mm;
  double best_cost = detail::depths_positive(usable, z0)
                         ? detail::bone_cost(usable, z0, nullptr, nullptr)
                         : std::numeric_limits<double>::infinity();
  for (int k = 0; k < 16; ++k) {
    const double cand = 500.0 * std::pow(10000.0 / 500.0, k / 15.0);
    if (!detail::depths_positive(usable, cand)) continue;
    const double c = detail::bone_cost(usable, cand, nullptr, nullptr);
    if (c < best_cost) {
      best_cost = c;
      z0 = cand;
    }
  }

  ScaleRecoveryResult result;
  double lambda = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < 100; ++it) {
    double grad = 0.0, h = 0.0;
    const double cost = detail::bone_cost(usable, z0, &grad, &h);
    const double step = -grad / (h + lambda);
    const double z0_new = z0 + step;
    const bool ok = detail::depths_positive(usable, z0_new) &&
                    detail::bone_cost(usable, z0_new, nullptr, nullptr) < cost;
    if (ok) {
      z0 = z0_new;
      lambda = std::max(lambda / 10.0, 1e-12);
    } else {
      lambda *= 10.0;
    }
    // Converged once the (applied or unapplicable) update falls below 0.01 mm.
    if (std::abs(step) < 0.01) {
      converged = true;
      ++it;
      break;
    }
  }
  result.z0_mm = z0;
  result.final_cost = detail::bone_cost(usable, z0, nullptr, nullptr);
  result.iterations = it;
  result.converged = converged;
  return result;
}

}  // namespace posekit
