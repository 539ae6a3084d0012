// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"

namespace posekit {

/// Inputs of the absolute-root recovery problem: a normalized 2D pose, a
/// root-relative 3D pose (mm) and a mask selecting the joints entering the
/// equation system.
struct ReconstructionInput {
  Pose2D p2d;    // normalized image coordinates
  Pose3D rel3d;  // root-relative, mm
  std::vector<bool> mask;

  int joint_count() const { return rel3d.joint_count(); }
};

/// Recovered root offset (X0, Y0, Z0) in mm plus the RMS residual of the
/// linear system in normalized-coordinate units.
struct RootSolution {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double residual_rms = 0.0;
};

namespace detail {

inline void check_reconstruction_input(const ReconstructionInput& in, const char* who) {
  if (in.p2d.space != Space::Normalized) {
    throw ContractError(std::string(who) + ": 2D pose must be in normalized coordinates");
  }
  if (in.rel3d.frame != Frame::RootRelative) {
    throw ContractError(std::string(who) + ": 3D pose must be root-relative");
  }
  if (in.p2d.joint_count() != in.rel3d.joint_count() ||
      static_cast<int>(in.mask.size()) != in.rel3d.joint_count()) {
    throw ContractError(std::string(who) + ": joint counts of inputs do not match");
  }
}

inline std::vector<int> masked_indices(const ReconstructionInput& in, const char* who) {
  std::vector<int> idx;
  for (int j = 0; j < in.joint_count(); ++j) {
    if (in.mask[static_cast<size_t>(j)]) idx.push_back(j);
  }
  if (idx.size() < 2) {
    throw UnderdeterminedError(std::string(who) +
                               ": need at least 2 masked-in joints, got " +
                               std::to_string(idx.size()));
  }
  return idx;
}

/// Solves A v = b in the least-squares sense by Cholesky factorization of the
/// normal equations, guarding positive definiteness by the eigenvalue ratio.
inline RootSolution solve_normal_equations(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                           const char* who) {
  const Eigen::Matrix3d H = A.transpose() * A;
  const Eigen::Vector3d g = A.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(H);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(2))) {
    throw DegenerateGeometryError(std::string(who) + ": rank-deficient system (eigenvalue ratio " +
                                  std::to_string(ev(2) > 0.0 ? ev(0) / ev(2) : 0.0) + ")");
  }
  RootSolution sol;
  sol.offset = Eigen::LLT<Eigen::Matrix3d>(H).solve(g);
  sol.residual_rms = std::sqrt((A * sol.offset - b).squaredNorm() / static_cast<double>(A.rows()));
  return sol;
}

}  // namespace detail

/// Stacks the rearranged pinhole equations over the masked-in joints:
///   [1, 0, -x_j] (X0,Y0,Z0)^T = x_j dZ_j - dX_j
///   [0, 1, -y_j] (X0,Y0,Z0)^T = y_j dZ_j - dY_j
/// with (x, y) the normalized 2D estimate and (dX, dY, dZ) the root-relative
/// 3D estimate, giving 2K linear equations in the three offset variables.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_full_perspective_system(
    const ReconstructionInput& in) {
  detail::check_reconstruction_input(in, "build_full_perspective_system");
  const std::vector<int> idx = detail::masked_indices(in, "build_full_perspective_system");
  Eigen::MatrixXd A(2 * idx.size(), 3);
  Eigen::VectorXd b(2 * idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    const size_t j = static_cast<size_t>(idx[k]);
    const double x = in.p2d.joints[j].x();
    const double y = in.p2d.joints[j].y();
    const Eigen::Vector3d& d = in.rel3d.joints[j];
    A.row(2 * k) << 1.0, 0.0, -x;
    A.row(2 * k + 1) << 0.0, 1.0, -y;
    b(2 * k) = x * d.z() - d.x();
    b(2 * k + 1) = y * d.z() - d.y();
  }
  return {std::move(A), std::move(b)};
}

/// Least-squares root offset under the full perspective model.
inline RootSolution solve_root_full(const ReconstructionInput& in) {
  auto [A, b] = build_full_perspective_system(in);
  return detail::solve_normal_equations(A, b, "solve_root_full");
}

/// Least-squares root offset under the weak perspective model: the per-joint
/// depth variation is dropped from the projection denominator, i.e. we
/// minimize sum_j (x_j Z0 - X0 - dX_j)^2 + (y_j Z0 - Y0 - dY_j)^2. Equivalent
/// to the full system with the x_j dZ_j terms removed from the right side.
inline RootSolution solve_root_weak(const ReconstructionInput& in) {
  detail::check_reconstruction_input(in, "solve_root_weak");
  const std::vector<int> idx = detail::masked_indices(in, "solve_root_weak");
  Eigen::MatrixXd A(2 * idx.size(), 3);
  Eigen::VectorXd b(2 * idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    const size_t j = static_cast<size_t>(idx[k]);
    const double x = in.p2d.joints[j].x();
    const double y = in.p2d.joints[j].y();
    const Eigen::Vector3d& d = in.rel3d.joints[j];
    A.row(2 * k) << 1.0, 0.0, -x;
    A.row(2 * k + 1) << 0.0, 1.0, -y;
    b(2 * k) = -d.x();
    b(2 * k + 1) = -d.y();
  }
  return detail::solve_normal_equations(A, b, "solve_root_weak");
}

/// Joints predicted closer to the crop border than one stride length are
/// excluded from the reconstruction (the 2D head cannot localize them).
/// The boundary itself counts as inside.
inline std::vector<bool> border_mask(const Pose2D& p2d, double crop_w, double crop_h,
                                     double stride) {
  if (p2d.space != Space::Pixel) {
    throw ContractError("border_mask: pose must be in pixel space");
  }
  std::vector<bool> mask(static_cast<size_t>(p2d.joint_count()));
  for (int j = 0; j < p2d.joint_count(); ++j) {
    const Eigen::Vector2d& q = p2d.joints[static_cast<size_t>(j)];
    mask[static_cast<size_t>(j)] = stride <= q.x() && q.x() <= crop_w - stride &&
                                   stride <= q.y() && q.y() <= crop_h - stride;
  }
  return mask;
}

/// Absolute pose from the recovered root offset. In-image joints are
/// back-projected from the 2D head as (x_j, y_j, 1) * (dZ_j + Z0); masked-out
/// (truncated) joints fall back to offsetting the 3D head output.
inline Pose3D compose_absolute(const Pose2D& p2d, const Pose3D& rel3d, const RootSolution& root,
                               const std::vector<bool>& mask) {
  if (p2d.space != Space::Normalized) {
    throw ContractError("compose_absolute: 2D pose must be in normalized coordinates");
  }
  if (rel3d.frame != Frame::RootRelative) {
    throw ContractError("compose_absolute: 3D pose must be root-relative");
  }
  if (p2d.joint_count() != rel3d.joint_count() ||
      mask.size() != static_cast<size_t>(rel3d.joint_count())) {
    throw ContractError("compose_absolute: joint counts of inputs do not match");
  }
  Pose3D out;
  out.frame = Frame::Absolute;
  out.root_index = rel3d.root_index;
  out.joints.resize(rel3d.joints.size());
  for (int j = 0; j < rel3d.joint_count(); ++j) {
    const size_t sj = static_cast<size_t>(j);
    const Eigen::Vector3d& d = rel3d.joints[sj];
    if (mask[sj]) {
      const double depth = d.z() + root.offset.z();
      if (!(depth > 0.0)) {
        throw BehindCameraError("compose_absolute: joint " + std::to_string(j) +
                                " has nonpositive depth " + std::to_string(depth));
      }
      out.joints[sj] = Eigen::Vector3d(p2d.joints[sj].x(), p2d.joints[sj].y(), 1.0) * depth;
    } else {
      out.joints[sj] = d + root.offset;
    }
  }
  return out;
}

/// Partial derivatives of the least-squares root offset with respect to every
/// input entry. Each column j holds d(offset)/d(input of joint j); masked-out
/// joints have exactly zero columns.
struct RootJacobian {
  Eigen::Matrix3Xd d_x;   // w.r.t. normalized x_j
  Eigen::Matrix3Xd d_y;   // w.r.t. normalized y_j
  Eigen::Matrix3Xd d_dx;  // w.r.t. relative dX_j
  Eigen::Matrix3Xd d_dy;  // w.r.t. relative dY_j
  Eigen::Matrix3Xd d_dz;  // w.r.t. relative dZ_j
};

/// solve_root_full plus analytic derivatives via implicit differentiation of
/// the normal equations A^T A v = A^T b:
///   dv = (A^T A)^-1 (dA^T (b - A v) + A^T (db - dA v)).
/// Per joint only one row pair of A and b depends on each input, so every
/// partial reduces to one 3-vector solve against the cached factorization.
inline std::pair<RootSolution, RootJacobian> solve_root_full_with_jacobian(
    const ReconstructionInput& in) {
  auto [A, b] = build_full_perspective_system(in);
  const Eigen::Matrix3d H = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(H);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(2))) {
    throw DegenerateGeometryError("solve_root_full_with_jacobian: rank-deficient system");
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(H);
  RootSolution sol;
  sol.offset = llt.solve(A.transpose() * b);
  const Eigen::VectorXd residual = b - A * sol.offset;
  sol.residual_rms = std::sqrt(residual.squaredNorm() / static_cast<double>(A.rows()));

  const int J = in.joint_count();
  RootJacobian jac;
  jac.d_x = Eigen::Matrix3Xd::Zero(3, J);
  jac.d_y = Eigen::Matrix3Xd::Zero(3, J);
  jac.d_dx = Eigen::Matrix3Xd::Zero(3, J);
  jac.d_dy = Eigen::Matrix3Xd::Zero(3, J);
  jac.d_dz = Eigen::Matrix3Xd::Zero(3, J);

  int k = 0;  // row-pair index among masked-in joints
  for (int j = 0; j < J; ++j) {
    if (!in.mask[static_cast<size_t>(j)]) continue;
    const size_t sj = static_cast<size_t>(j);
    const double x = in.p2d.joints[sj].x();
    const double y = in.p2d.joints[sj].y();
    const Eigen::Vector3d& d = in.rel3d.joints[sj];
    const Eigen::Vector3d row_x(1.0, 0.0, -x);
    const Eigen::Vector3d row_y(0.0, 1.0, -y);
    const double rx = residual(2 * k);
    const double ry = residual(2 * k + 1);

    // d/dx_j: dA has row 2k = [0,0,-1], db has entry 2k = dZ_j.
    jac.d_x.col(j) = llt.solve(Eigen::Vector3d(0.0, 0.0, -rx) +
                               row_x * (d.z() + sol.offset.z()));
    // d/dy_j: same structure on the y row.
    jac.d_y.col(j) = llt.solve(Eigen::Vector3d(0.0, 0.0, -ry) +
                               row_y * (d.z() + sol.offset.z()));
    // d/d(dX_j): db entry 2k = -1.  d/d(dY_j): db entry 2k+1 = -1.
    jac.d_dx.col(j) = llt.solve(-row_x);
    jac.d_dy.col(j) = llt.solve(-row_y);
    // d/d(dZ_j): db entries (x, y) on the joint's row pair.
    jac.d_dz.col(j) = llt.solve(row_x * x + row_y * y);
    ++k;
  }
  return {std::move(sol), std::move(jac)};
}

/// max_j Z_j / min_j Z_j of an absolute pose; measures how strongly the
/// perspective varies across the body.
inline double depth_ratio(const Pose3D& p) {
  if (p.joints.empty()) throw ContractError("depth_ratio: empty pose");
  double zmin = p.joints[0].z(), zmax = p.joints[0].z();
  for (const auto& X : p.joints) {
    zmin = std::min(zmin, X.z());
    zmax = std::max(zmax, X.z());
  }
  if (!(zmin > 0.0)) throw BehindCameraError("depth_ratio: nonpositive joint depth");
  return zmax / zmin;
}

}  // namespace posekit
