// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <string>
#include <vector>

#include "posekit/errors.hpp"

namespace posekit {

/// Pinhole intrinsics, zero skew. Focal lengths and principal point in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
        !std::isfinite(cx) || !std::isfinite(cy)) {
      throw ContractError("CameraIntrinsics: focal lengths must be positive and all fields finite");
    }
  }
};

enum class Frame { Absolute, RootRelative };
enum class Space { Pixel, Normalized };

/// J joint positions in millimeters in a camera coordinate frame.
/// In the root-relative frame the root joint is pinned to the origin.
struct Pose3D {
  std::vector<Eigen::Vector3d> joints;
  Frame frame = Frame::Absolute;
  int root_index = 0;

  int joint_count() const { return static_cast<int>(joints.size()); }
};

/// J joint positions in pixel or normalized image coordinates, with a
/// per-joint validity mask.
struct Pose2D {
  std::vector<Eigen::Vector2d> joints;
  Space space = Space::Pixel;
  std::vector<bool> valid;

  int joint_count() const { return static_cast<int>(joints.size()); }

  static Pose2D all_valid(std::vector<Eigen::Vector2d> pts, Space sp) {
    Pose2D p;
    p.valid.assign(pts.size(), true);
    p.joints = std::move(pts);
    p.space = sp;
    return p;
  }
};

/// Pixel coordinates -> normalized image coordinates: (x - cx)/fx, (y - cy)/fy.
/// The validity mask is carried over unchanged.
inline Pose2D normalize_points(const CameraIntrinsics& K, const Pose2D& p) {
  if (p.space != Space::Pixel) {
    throw ContractError("normalize_points: input must be in pixel space");
  }
  Pose2D out = p;
  out.space = Space::Normalized;
  for (auto& q : out.joints) {
    q.x() = (q.x() - K.cx) / K.fx;
    q.y() = (q.y() - K.cy) / K.fy;
  }
  return out;
}

/// Full-perspective projection x = fx*X/Z + cx, y = fy*Y/Z + cy.
/// Every joint must be strictly in front of the camera.
inline Pose2D project(const CameraIntrinsics& K, const Pose3D& p) {
  Pose2D out;
  out.space = Space::Pixel;
  out.joints.reserve(p.joints.size());
  for (int j = 0; j < p.joint_count(); ++j) {
    const Eigen::Vector3d& X = p.joints[static_cast<size_t>(j)];
    if (!(X.z() > 0.0)) {
      throw BehindCameraError("project: joint " + std::to_string(j) +
                              " has nonpositive depth Z=" + std::to_string(X.z()));
    }
    out.joints.emplace_back(K.fx * X.x() / X.z() + K.cx, K.fy * X.y() / X.z() + K.cy);
  }
  out.valid.assign(p.joints.size(), true);
  return out;
}

/// Rotation that maps the back-projected ray through `crop_center` onto the
/// optical axis (0,0,1). Centering a crop on a subject implicitly rotates the
/// camera; this is the compensating camera-to-virtual-camera rotation.
/// Constructed as the minimal-roll rotation: the axis is perpendicular to
/// both the ray and the optical axis, so the third row equals the normalized
/// ray direction.
inline Eigen::Matrix3d crop_rotation(const CameraIntrinsics& K,
                                     const Eigen::Vector2d& crop_center) {
  Eigen::Vector3d ray((crop_center.x() - K.cx) / K.fx, (crop_center.y() - K.cy) / K.fy, 1.0);
  ray.normalize();
  const Eigen::Vector3d z_axis(0.0, 0.0, 1.0);
  const Eigen::Vector3d v = ray.cross(z_axis);
  const double s2 = v.squaredNorm();
  const double c = ray.dot(z_axis);  // > 0: the ray always has a positive Z component
  if (s2 < 1e-30) {
    return Eigen::Matrix3d::Identity();
  }
  Eigen::Matrix3d vx;
  vx << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return Eigen::Matrix3d::Identity() + vx + vx * vx * ((1.0 - c) / s2);
}

/// Max-norm deviation of R^T R from the identity.
inline double orthonormality_defect(const Eigen::Matrix3d& R) {
  return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

/// Applies a rotation to every joint. The frame tag is preserved; a
/// root-relative pose stays root-relative since R*0 = 0.
inline Pose3D rotate_pose(const Eigen::Matrix3d& R, const Pose3D& p) {
  if (orthonormality_defect(R) > 1e-9) {
    throw InvalidRotationError("rotate_pose: matrix fails the orthonormality check");
  }
  Pose3D out = p;
  for (auto& X : out.joints) X = R * X;
  return out;
}

}  // namespace posekit
