// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"

namespace posekit {

struct LossConfig {
  double lambda_2d = 0.1;
  int absolute_loss_warmup_steps = 5000;

  LossConfig() = default;
  LossConfig(double lambda, int warmup) : lambda_2d(lambda), absolute_loss_warmup_steps(warmup) {
    if (lambda_2d < 0.0) throw ContractError("LossConfig: lambda_2d must be >= 0");
  }
};

namespace detail {
inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

/// Mean absolute error over coordinates, with the subgradient 0 at exact
/// ties. Gradient is with respect to the prediction.
struct L1Loss3D {
  double loss = 0.0;
  Eigen::Matrix3Xd grad;  // 3 x J
};

inline L1Loss3D l1_pose_loss(const Pose3D& pred, const Pose3D& gt) {
  if (pred.joint_count() != gt.joint_count()) {
    throw ContractError("l1_pose_loss: joint counts differ");
  }
  if (pred.joints.empty()) throw ContractError("l1_pose_loss: empty pose");
  const int J = pred.joint_count();
  L1Loss3D out;
  out.grad = Eigen::Matrix3Xd::Zero(3, J);
  const double inv_n = 1.0 / (3.0 * J);
  for (int j = 0; j < J; ++j) {
    for (int c = 0; c < 3; ++c) {
      const double d = pred.joints[static_cast<size_t>(j)](c) - gt.joints[static_cast<size_t>(j)](c);
      out.loss += std::abs(d) * inv_n;
      out.grad(c, j) = detail::sign0(d) * inv_n;
    }
  }
  return out;
}

struct L1Loss2D {
  double loss = 0.0;
  Eigen::Matrix2Xd grad;  // 2 x J; zero at joints invalid in gt
};

inline L1Loss2D l1_pose_loss(const Pose2D& pred, const Pose2D& gt) {
  if (pred.joint_count() != gt.joint_count()) {
    throw ContractError("l1_pose_loss: joint counts differ");
  }
  const int J = pred.joint_count();
  int n_valid = 0;
  for (int j = 0; j < J; ++j) {
    if (gt.valid[static_cast<size_t>(j)]) ++n_valid;
  }
  if (n_valid == 0) throw ContractError("l1_pose_loss: no valid ground-truth joints");
  L1Loss2D out;
  out.grad = Eigen::Matrix2Xd::Zero(2, J);
  const double inv_n = 1.0 / (2.0 * n_valid);
  for (int j = 0; j < J; ++j) {
    if (!gt.valid[static_cast<size_t>(j)]) continue;
    for (int c = 0; c < 2; ++c) {
      const double d = pred.joints[static_cast<size_t>(j)](c) - gt.joints[static_cast<size_t>(j)](c);
      out.loss += std::abs(d) * inv_n;
      out.grad(c, j) = detail::sign0(d) * inv_n;
    }
  }
  return out;
}

/// Orthographic projection: drops the Z coordinate.
inline Pose2D ortho_project(const Pose3D& p) {
  Pose2D out;
  out.space = Space::Pixel;
  out.joints.reserve(p.joints.size());
  for (const auto& X : p.joints) out.joints.emplace_back(X.x(), X.y());
  out.valid.assign(p.joints.size(), true);
  return out;
}

struct SimilarityAlignment2D {
  double scale = 1.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  Pose2D aligned;        // scale * pred + translation, all joints transformed
  bool mirrored = false; // negative optimal scale (flipped prediction)
};

/// Closed-form least-squares fit of scale s and translation t minimizing
/// sum_j ||s * pred_j + t - gt_j||^2 over the joints valid in gt:
/// center both sets, s = <pred_c, gt_c> / ||pred_c||^2, t = mean(gt) - s mean(pred).
inline SimilarityAlignment2D align_similarity_2d(const Pose2D& pred, const Pose2D& gt) {
  if (pred.joint_count() != gt.joint_count()) {
    throw ContractError("align_similarity_2d: joint counts differ");
  }
  const int J = pred.joint_count();
  std::vector<int> idx;
  for (int j = 0; j < J; ++j) {
    if (gt.valid[static_cast<size_t>(j)]) idx.push_back(j);
  }
  if (idx.size() < 2) {
    throw ContractError("align_similarity_2d: need at least 2 valid joints");
  }
  Eigen::Vector2d mean_p = Eigen::Vector2d::Zero(), mean_g = Eigen::Vector2d::Zero();
  for (int j : idx) {
    mean_p += pred.joints[static_cast<size_t>(j)];
    mean_g += gt.joints[static_cast<size_t>(j)];
  }
  mean_p /= static_cast<double>(idx.size());
  mean_g /= static_cast<double>(idx.size());
  double num = 0.0, den = 0.0;
  for (int j : idx) {
    const Eigen::Vector2d pc = pred.joints[static_cast<size_t>(j)] - mean_p;
    const Eigen::Vector2d gc = gt.joints[static_cast<size_t>(j)] - mean_g;
    num += pc.dot(gc);
    den += pc.squaredNorm();
  }
  if (!(den > 0.0)) {
    throw DegenerateGeometryError("align_similarity_2d: prediction joints are all coincident");
  }
  SimilarityAlignment2D out;
  out.scale = num / den;
  out.translation = mean_g - out.scale * mean_p;
  out.mirrored = out.scale < 0.0;
  out.aligned = pred;
  for (auto& q : out.aligned.joints) q = out.scale * q + out.translation;
  return out;
}

struct Agnostic2DLoss {
  double loss = 0.0;
  Eigen::Matrix3Xd grad;  // 3 x J w.r.t. the 3D prediction; Z rows are zero
  SimilarityAlignment2D alignment;
};

/// Scale- and translation-agnostic 2D loss: the prediction is
/// orthographically projected, similarity-aligned to the 2D ground truth, and
/// compared under L1. The gradient treats scale and translation as functions
/// of the prediction (full chain rule through the closed-form alignment), so
/// it vanishes along the scaling/translation directions.
inline Agnostic2DLoss agnostic_2d_loss(const Pose3D& pred3d, const Pose2D& gt2d) {
  const Pose2D proj = ortho_project(pred3d);
  SimilarityAlignment2D al = align_similarity_2d(proj, gt2d);

  const int J = pred3d.joint_count();
  std::vector<int> idx;
  for (int j = 0; j < J; ++j) {
    if (gt2d.valid[static_cast<size_t>(j)]) idx.push_back(j);
  }
  const double n = static_cast<double>(idx.size());

  Eigen::Vector2d mean_p = Eigen::Vector2d::Zero(), mean_g = Eigen::Vector2d::Zero();
  for (int j : idx) {
    mean_p += proj.joints[static_cast<size_t>(j)];
    mean_g += gt2d.joints[static_cast<size_t>(j)];
  }
  mean_p /= n;
  mean_g /= n;
  double den = 0.0;
  for (int j : idx) den += (proj.joints[static_cast<size_t>(j)] - mean_p).squaredNorm();

  Agnostic2DLoss out;
  out.grad = Eigen::Matrix3Xd::Zero(3, J);

  // L1 over valid coordinates of the aligned projection; w_j = dL/d(aligned_j).
  const double inv_coords = 1.0 / (2.0 * n);
  std::vector<Eigen::Vector2d> w(static_cast<size_t>(J), Eigen::Vector2d::Zero());
  for (int j : idx) {
    const Eigen::Vector2d d =
        al.aligned.joints[static_cast<size_t>(j)] - gt2d.joints[static_cast<size_t>(j)];
    out.loss += (std::abs(d.x()) + std::abs(d.y())) * inv_coords;
    w[static_cast<size_t>(j)] =
        Eigen::Vector2d(detail::sign0(d.x()), detail::sign0(d.y())) * inv_coords;
  }

  // Chain rule. With centered points P~ and g~ (sums over valid joints):
  //   s  = sum <P~, g~> / sum ||P~||^2
  //   a_j = s P~_j + mean(g)
  //   ds/dP_k = (g~_k - 2 s P~_k) / den
  //   dL/dP_k = c_s * ds/dP_k + s w_k - (s/n) sum_j w_j
  // where c_s = sum_j <w_j, P~_j>.
  double c_s = 0.0;
  Eigen::Vector2d w_sum = Eigen::Vector2d::Zero();
  for (int j : idx) {
    c_s += w[static_cast<size_t>(j)].dot(proj.joints[static_cast<size_t>(j)] - mean_p);
    w_sum += w[static_cast<size_t>(j)];
  }
  for (int j : idx) {
    const Eigen::Vector2d pc = proj.joints[static_cast<size_t>(j)] - mean_p;
    const Eigen::Vector2d gc = gt2d.joints[static_cast<size_t>(j)] - mean_g;
    const Eigen::Vector2d dLdP = c_s * (gc - 2.0 * al.scale * pc) / den +
                                 al.scale * w[static_cast<size_t>(j)] - (al.scale / n) * w_sum;
    out.grad(0, j) = dLdP.x();
    out.grad(1, j) = dLdP.y();
    // Z never enters the orthographic projection; its gradient stays zero.
  }
  out.alignment = std::move(al);
  return out;
}

/// Loss terms of the root-relative (two-term) objective.
struct MetroTerms {
  std::optional<double> rel3d_ann3d;  // L1 on root-relative 3D, 3D-annotated data
  std::optional<double> agno2d_ann2d; // agnostic 2D loss, 2D-annotated data
};

/// Loss terms of the absolute (five-term) objective.
struct MetrabsTerms {
  std::optional<double> abs3d_ann3d;
  std::optional<double> head3d_ann3d;
  std::optional<double> head2d_ann3d;
  std::optional<double> head2d_ann2d;
  std::optional<double> head3d_ann2d;
};

namespace detail {
inline double require_term(const std::optional<double>& t, const char* name) {
  if (!t.has_value()) {
    throw ContractError(std::string("composite_loss: missing required term ") + name);
  }
  return *t;
}
}  // namespace detail

/// L = L_ann3D + lambda * L_ann2D.
inline double composite_loss(const MetroTerms& t, const LossConfig& cfg) {
  return detail::require_term(t.rel3d_ann3d, "rel3d_ann3d") +
         cfg.lambda_2d * detail::require_term(t.agno2d_ann2d, "agno2d_ann2d");
}

/// L = L^abs3D_ann3D + L^head3D_ann3D + L^head2D_ann3D
///     + lambda * (L^head2D_ann2D + L^head3D_ann2D),
/// with the absolute term gated off while step < warmup (the reconstruction
/// is ill-conditioned before the heads roughly agree).
inline double composite_loss(const MetrabsTerms& t, const LossConfig& cfg, long step) {
  const double abs3d = detail::require_term(t.abs3d_ann3d, "abs3d_ann3d");
  const double gate = step >= cfg.absolute_loss_warmup_steps ? 1.0 : 0.0;
  return gate * abs3d + detail::require_term(t.head3d_ann3d, "head3d_ann3d") +
         detail::require_term(t.head2d_ann3d, "head2d_ann3d") +
         cfg.lambda_2d * (detail::require_term(t.head2d_ann2d, "head2d_ann2d") +
                          detail::require_term(t.head3d_ann2d, "head3d_ann2d"));
}

}  // namespace posekit
