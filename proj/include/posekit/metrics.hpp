// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"

namespace posekit {

/// Evaluation protocol switches. Thresholds in mm.
struct EvalProtocol {
  bool root_align = true;
  bool procrustes = false;
  double pck_threshold_mm = 150.0;
  double auc_max_mm = 150.0;
  int joint_subset = 17;  // 14 | 16 | 17
  bool bone_rescale = false;

  void validate() const {
    if (!(pck_threshold_mm > 0.0) || !(auc_max_mm > 0.0)) {
      throw ContractError("EvalProtocol: thresholds must be positive");
    }
    if (joint_subset != 14 && joint_subset != 16 && joint_subset != 17) {
      throw ContractError("EvalProtocol: joint_subset must be 14, 16 or 17");
    }
  }
};

namespace detail {
inline void check_matching(const Pose3D& pred, const Pose3D& gt, const char* who) {
  if (pred.joint_count() != gt.joint_count() || pred.joints.empty()) {
    throw ContractError(std::string(who) + ": joint counts must match and be nonzero");
  }
}

inline Pose3D root_aligned(const Pose3D& pred, const Pose3D& gt) {
  Pose3D out = pred;
  const Eigen::Vector3d shift = gt.joints[static_cast<size_t>(gt.root_index)] -
                                pred.joints[static_cast<size_t>(pred.root_index)];
  for (auto& X : out.joints) X += shift;
  return out;
}

inline std::vector<double> joint_errors(const Pose3D& pred, const Pose3D& gt) {
  std::vector<double> e(pred.joints.size());
  for (size_t j = 0; j < pred.joints.size(); ++j) e[j] = (pred.joints[j] - gt.joints[j]).norm();
  return e;
}
}  // namespace detail

/// Mean per joint position error in mm, optionally after translating the
/// prediction so the root joints coincide.
inline double mpjpe(const Pose3D& pred, const Pose3D& gt, bool root_align) {
  detail::check_matching(pred, gt, "mpjpe");
  const Pose3D p = root_align ? detail::root_aligned(pred, gt) : pred;
  double sum = 0.0;
  for (size_t j = 0; j < p.joints.size(); ++j) sum += (p.joints[j] - gt.joints[j]).norm();
  return sum / static_cast<double>(p.joints.size());
}

/// Optimal similarity transform (rotation, uniform scale, translation)
/// minimizing the squared alignment error, via the SVD of the cross
/// covariance with a reflection guard on the smallest singular direction.
inline Pose3D procrustes_align(const Pose3D& pred, const Pose3D& gt) {
  detail::check_matching(pred, gt, "procrustes_align");
  const int J = pred.joint_count();
  if (J < 3) throw ContractError("procrustes_align: need at least 3 joints");
  Eigen::Vector3d mean_p = Eigen::Vector3d::Zero(), mean_g = Eigen::Vector3d::Zero();
  for (int j = 0; j < J; ++j) {
    mean_p += pred.joints[static_cast<size_t>(j)];
    mean_g += gt.joints[static_cast<size_t>(j)];
  }
  mean_p /= J;
  mean_g /= J;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_p = 0.0;
  for (int j = 0; j < J; ++j) {
    const Eigen::Vector3d pc = pred.joints[static_cast<size_t>(j)] - mean_p;
    const Eigen::Vector3d gc = gt.joints[static_cast<size_t>(j)] - mean_g;
    cov += gc * pc.transpose();
    var_p += pc.squaredNorm();
  }
  cov /= J;
  var_p /= J;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Collinear point sets leave the rotation about the line undetermined.
  if (!(sv(1) > 1e-12 * sv(0)) || !(var_p > 0.0)) {
    throw DegenerateGeometryError("procrustes_align: degenerate (collinear) configuration");
  }
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2) = -1.0;
  const Eigen::Matrix3d R = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  const double scale = sv.dot(d) / var_p;
  const Eigen::Vector3d t = mean_g - scale * (R * mean_p);
  Pose3D out = pred;
  for (auto& X : out.joints) X = scale * (R * X) + t;
  return out;
}

/// Fraction of joints within `threshold_mm` of the ground truth (inclusive).
inline double pck(const Pose3D& pred, const Pose3D& gt, double threshold_mm) {
  detail::check_matching(pred, gt, "pck");
  int good = 0;
  for (size_t j = 0; j < pred.joints.size(); ++j) {
    if ((pred.joints[j] - gt.joints[j]).norm() <= threshold_mm) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(pred.joints.size());
}

/// Area under the PCK curve, sampled at 31 evenly spaced thresholds from 0 to
/// `max_threshold_mm` (5 mm steps for the standard 150 mm maximum).
inline double auc(const Pose3D& pred, const Pose3D& gt, double max_threshold_mm) {
  detail::check_matching(pred, gt, "auc");
  constexpr int kSamples = 31;
  double sum = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    sum += pck(pred, gt, max_threshold_mm * i / (kSamples - 1));
  }
  return sum / kSamples;
}

/// Rescales each predicted bone vector to the ground-truth bone length,
/// walking the kinematic tree outward from the root. Directions and the root
/// position come from the prediction; lengths from the ground truth.
inline Pose3D bone_rescale(const Pose3D& pred, const Pose3D& gt,
                           const std::vector<std::pair<int, int>>& edges, int root) {
  detail::check_matching(pred, gt, "bone_rescale");
  const int J = pred.joint_count();
  if (root < 0 || root >= J) throw ContractError("bone_rescale: root out of range");
  // The edge set must form a tree rooted at `root`: every non-root joint is
  // the child of exactly one edge reachable from the root.
  std::vector<std::vector<size_t>> edges_from(static_cast<size_t>(J));
  std::vector<int> in_degree(static_cast<size_t>(J), 0);
  for (size_t i = 0; i < edges.size(); ++i) {
    const auto [a, b] = edges[i];
    if (a < 0 || b < 0 || a >= J || b >= J || a == b) {
      throw ContractError("bone_rescale: invalid edge");
    }
    edges_from[static_cast<size_t>(a)].push_back(i);
    ++in_degree[static_cast<size_t>(b)];
  }
  if (edges.size() != static_cast<size_t>(J - 1) || in_degree[static_cast<size_t>(root)] != 0) {
    throw ContractError("bone_rescale: edges do not form a tree rooted at root");
  }
  Pose3D out = pred;
  std::vector<bool> placed(static_cast<size_t>(J), false);
  placed[static_cast<size_t>(root)] = true;
  std::vector<int> queue = {root};
  size_t head = 0;
  int placed_count = 1;
  while (head < queue.size()) {
    const int parent = queue[head++];
    for (size_t ei : edges_from[static_cast<size_t>(parent)]) {
      const int child = edges[ei].second;
      if (placed[static_cast<size_t>(child)]) {
        throw ContractError("bone_rescale: edges do not form a tree rooted at root");
      }
      const Eigen::Vector3d dir = pred.joints[static_cast<size_t>(child)] -
                                  pred.joints[static_cast<size_t>(parent)];
      const double pred_len = dir.norm();
      const double gt_len = (gt.joints[static_cast<size_t>(child)] -
                             gt.joints[static_cast<size_t>(parent)])
                                .norm();
      if (pred_len <= 0.0 && gt_len > 0.0) {
        throw DegenerateGeometryError("bone_rescale: zero-length predicted bone has no direction");
      }
      out.joints[static_cast<size_t>(child)] =
          out.joints[static_cast<size_t>(parent)] +
          (pred_len > 0.0 ? Eigen::Vector3d(dir * (gt_len / pred_len)) : Eigen::Vector3d::Zero());
      placed[static_cast<size_t>(child)] = true;
      ++placed_count;
      queue.push_back(child);
    }
  }
  if (placed_count != J) {
    throw ContractError("bone_rescale: edges do not form a tree rooted at root");
  }
  return out;
}

/// Moves each hip joint by a fifth of the pelvis-to-neck vector, compensating
/// for hip labels that sit closer to the legs in some conventions.
inline Pose3D hip_adjust(const Pose3D& p, const std::vector<int>& hip_indices, int pelvis_index,
                         int neck_index) {
  const int J = p.joint_count();
  if (pelvis_index < 0 || pelvis_index >= J || neck_index < 0 || neck_index >= J) {
    throw ContractError("hip_adjust: index out of range");
  }
  const Eigen::Vector3d shift = 0.2 * (p.joints[static_cast<size_t>(neck_index)] -
                                       p.joints[static_cast<size_t>(pelvis_index)]);
  Pose3D out = p;
  for (int h : hip_indices) {
    if (h < 0 || h >= J) throw ContractError("hip_adjust: hip index out of range");
    out.joints[static_cast<size_t>(h)] += shift;
  }
  return out;
}

}  // namespace posekit
