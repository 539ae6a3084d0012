// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"

namespace posekit {

enum class HeatmapMode { Metric, Image25D };

/// Maps volumetric heatmap bins to coordinates.
///
/// Metric mode: all three axes span fixed metric extents (W, H, D) mm around
/// the person, decoupled from image space; bin p sits at coordinate
/// p * (W / nx), i.e. bin 0 at coordinate 0. Image25D mode: X and Y axes are
/// image space (bin p at pixel p * stride over the crop) and Z spans a metric
/// depth extent D.
struct HeatmapGeometry {
  HeatmapMode mode = HeatmapMode::Metric;
  int nx = 8, ny = 8, nz = 8;
  double extent_w = 2200.0, extent_h = 2200.0, extent_d = 2200.0;  // mm
  int crop_w = 0, crop_h = 0, stride = 0;                          // px, Image25D only

  static HeatmapGeometry metric(int nx, int ny, int nz, double w_mm, double h_mm, double d_mm) {
    if (nx < 1 || ny < 1 || nz < 1) throw ContractError("HeatmapGeometry: bin counts must be >= 1");
    if (!(w_mm > 0.0) || !(h_mm > 0.0) || !(d_mm > 0.0)) {
      throw ContractError("HeatmapGeometry: extents must be positive");
    }
    HeatmapGeometry g;
    g.mode = HeatmapMode::Metric;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    g.extent_w = w_mm;
    g.extent_h = h_mm;
    g.extent_d = d_mm;
    return g;
  }

  /// Metric geometry for a backbone with the given crop and stride
  /// (nx = crop_w / stride, ny = crop_h / stride).
  static HeatmapGeometry metric_for_crop(int crop_w, int crop_h, int stride, int nz,
                                         double w_mm, double h_mm, double d_mm) {
    if (stride < 1 || crop_w % stride != 0 || crop_h % stride != 0) {
      throw ContractError("HeatmapGeometry: crop size must be a positive multiple of stride");
    }
    return metric(crop_w / stride, crop_h / stride, nz, w_mm, h_mm, d_mm);
  }

  static HeatmapGeometry image25d(int crop_w, int crop_h, int stride, int nz, double depth_mm) {
    if (stride < 1 || crop_w < 1 || crop_h < 1 || crop_w % stride != 0 || crop_h % stride != 0) {
      throw ContractError("HeatmapGeometry: crop size must be a positive multiple of stride");
    }
    if (nz < 1) throw ContractError("HeatmapGeometry: bin counts must be >= 1");
    if (!(depth_mm > 0.0)) throw ContractError("HeatmapGeometry: extents must be positive");
    HeatmapGeometry g;
    g.mode = HeatmapMode::Image25D;
    g.nx = crop_w / stride;
    g.ny = crop_h / stride;
    g.nz = nz;
    g.crop_w = crop_w;
    g.crop_h = crop_h;
    g.stride = stride;
    g.extent_w = 0.0;
    g.extent_h = 0.0;
    g.extent_d = depth_mm;
    return g;
  }

  /// Coordinate advance per index step along each axis.
  double step_x() const {
    return mode == HeatmapMode::Metric ? extent_w / nx : static_cast<double>(stride);
  }
  double step_y() const {
    return mode == HeatmapMode::Metric ? extent_h / ny : static_cast<double>(stride);
  }
  double step_z() const { return extent_d / nz; }

  long bins_per_joint() const { return static_cast<long>(nx) * ny * nz; }
};

/// Per-joint nonnegative probability volumes. Storage is joint-major, then
/// x, y, z row-major; each joint's volume sums to 1 within 1e-6.
struct HeatmapVolume {
  std::vector<double> values;
  HeatmapGeometry geometry;
  int joints = 0;

  double at(int j, int p, int q, int r) const {
    return values[static_cast<size_t>(((static_cast<long>(j) * geometry.nx + p) * geometry.ny + q) *
                                          geometry.nz +
                                      r)];
  }
};

namespace detail {

inline void check_normalized(const HeatmapVolume& v, const char* who) {
  const long n = v.geometry.bins_per_joint();
  for (int j = 0; j < v.joints; ++j) {
    double sum = 0.0;
    const double* p = v.values.data() + static_cast<long>(j) * n;
    for (long i = 0; i < n; ++i) sum += p[i];
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ContractError(std::string(who) + ": volume of joint " + std::to_string(j) +
                          " is not normalized (sum=" + std::to_string(sum) + ")");
    }
  }
}

}  // namespace detail

/// 3D spatial softmax over each joint's volume: exp(l - max) / sum.
inline HeatmapVolume spatial_softmax(const std::vector<double>& logits, int joints,
                                     const HeatmapGeometry& geometry) {
  const long n = geometry.bins_per_joint();
  if (static_cast<long>(logits.size()) != n * joints) {
    throw ContractError("spatial_softmax: logits size does not match joints * bins");
  }
  for (double l : logits) {
    if (!std::isfinite(l)) throw ContractError("spatial_softmax: non-finite logit");
  }
  HeatmapVolume out;
  out.geometry = geometry;
  out.joints = joints;
  out.values.resize(logits.size());
  for (int j = 0; j < joints; ++j) {
    const double* in = logits.data() + static_cast<long>(j) * n;
    double* dst = out.values.data() + static_cast<long>(j) * n;
    const double m = *std::max_element(in, in + n);
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      dst[i] = std::exp(in[i] - m);
      sum += dst[i];
    }
    for (long i = 0; i < n; ++i) dst[i] /= sum;
  }
  return out;
}

/// Soft-argmax with fixed metric scaling factors: the expectation of
/// (p * W/nx, q * H/ny, r * D/nz) under each joint's volume. The result lives
/// in the prediction volume's coordinates, i.e. it is translation-ambiguous
/// until root-centered.
inline Pose3D soft_argmax_metric(const HeatmapVolume& v) {
  if (v.geometry.mode != HeatmapMode::Metric) {
    throw ContractError("soft_argmax_metric: volume is not in metric mode");
  }
  detail::check_normalized(v, "soft_argmax_metric");
  const HeatmapGeometry& g = v.geometry;
  const double sx = g.step_x(), sy = g.step_y(), sz = g.step_z();
  Pose3D out;
  out.frame = Frame::Absolute;
  out.joints.reserve(static_cast<size_t>(v.joints));
  for (int j = 0; j < v.joints; ++j) {
    double ex = 0.0, ey = 0.0, ez = 0.0;
    for (int p = 0; p < g.nx; ++p)
      for (int q = 0; q < g.ny; ++q)
        for (int r = 0; r < g.nz; ++r) {
          const double w = v.at(j, p, q, r);
          ex += w * p;
          ey += w * q;
          ez += w * r;
        }
    out.joints.emplace_back(ex * sx, ey * sy, ez * sz);
  }
  return out;
}

/// Soft-argmax of an image-space volume: pixel coordinates over the crop plus
/// a per-joint depth expectation in [0, D). Depths are root-centered by the
/// caller.
inline std::pair<Pose2D, std::vector<double>> soft_argmax_25d(const HeatmapVolume& v) {
  if (v.geometry.mode != HeatmapMode::Image25D) {
    throw ContractError("soft_argmax_25d: volume is not in image25d mode");
  }
  detail::check_normalized(v, "soft_argmax_25d");
  const HeatmapGeometry& g = v.geometry;
  Pose2D pix;
  pix.space = Space::Pixel;
  std::vector<double> depth(static_cast<size_t>(v.joints));
  for (int j = 0; j < v.joints; ++j) {
    double ex = 0.0, ey = 0.0, ez = 0.0;
    for (int p = 0; p < g.nx; ++p)
      for (int q = 0; q < g.ny; ++q)
        for (int r = 0; r < g.nz; ++r) {
          const double w = v.at(j, p, q, r);
          ex += w * p;
          ey += w * q;
          ez += w * r;
        }
    pix.joints.emplace_back(ex * g.step_x(), ey * g.step_y());
    depth[static_cast<size_t>(j)] = ez * g.step_z();
  }
  pix.valid.assign(static_cast<size_t>(v.joints), true);
  return {std::move(pix), std::move(depth)};
}

/// Subtracts the root joint from every joint. Idempotent and invariant to
/// constant offsets; the root lands exactly at the origin.
inline Pose3D root_center(const Pose3D& p) {
  if (p.root_index < 0 || p.root_index >= p.joint_count()) {
    throw ContractError("root_center: root_index out of range");
  }
  Pose3D out = p;
  const Eigen::Vector3d root = p.joints[static_cast<size_t>(p.root_index)];
  for (auto& X : out.joints) X -= root;
  out.joints[static_cast<size_t>(p.root_index)].setZero();
  out.frame = Frame::RootRelative;
  return out;
}

namespace detail {

/// Gaussian blob volume from continuous bin-space centers, one per joint.
inline HeatmapVolume gaussian_volume_from_bins(const std::vector<Eigen::Vector3d>& bin_centers,
                                               const HeatmapGeometry& g, double sigma_bins) {
  if (!(sigma_bins > 0.0)) throw ContractError("synthesize_gaussian_volume: sigma_bins must be > 0");
  for (size_t j = 0; j < bin_centers.size(); ++j) {
    const Eigen::Vector3d& c = bin_centers[j];
    if (!(c.x() >= 0.0 && c.x() <= g.nx - 1 && c.y() >= 0.0 && c.y() <= g.ny - 1 &&
          c.z() >= 0.0 && c.z() <= g.nz - 1)) {
      throw OutOfVolumeError("synthesize_gaussian_volume: target of joint " + std::to_string(j) +
                             " lies outside the volume");
    }
  }
  HeatmapVolume out;
  out.geometry = g;
  out.joints = static_cast<int>(bin_centers.size());
  out.values.resize(static_cast<size_t>(g.bins_per_joint()) * bin_centers.size());
  const double inv2s2 = 1.0 / (2.0 * sigma_bins * sigma_bins);
  for (int j = 0; j < out.joints; ++j) {
    const Eigen::Vector3d& c = bin_centers[static_cast<size_t>(j)];
    double sum = 0.0;
    double* dst = out.values.data() + static_cast<long>(j) * g.bins_per_joint();
    long i = 0;
    for (int p = 0; p < g.nx; ++p)
      for (int q = 0; q < g.ny; ++q)
        for (int r = 0; r < g.nz; ++r, ++i) {
          const double d2 = (p - c.x()) * (p - c.x()) + (q - c.y()) * (q - c.y()) +
                            (r - c.z()) * (r - c.z());
          dst[i] = std::exp(-d2 * inv2s2);
          sum += dst[i];
        }
    for (long k = 0; k < g.bins_per_joint(); ++k) dst[k] /= sum;
  }
  return out;
}

}  // namespace detail

/// Isotropic Gaussian blob per joint, centered at the continuous bin
/// coordinate of a metric-space target, normalized to sum 1. Test oracle for
/// the decoding path.
inline HeatmapVolume synthesize_gaussian_volume(const Pose3D& targets, const HeatmapGeometry& g,
                                                double sigma_bins) {
  if (g.mode != HeatmapMode::Metric) {
    throw ContractError("synthesize_gaussian_volume: Pose3D targets require metric mode");
  }
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(targets.joints.size());
  for (const auto& t : targets.joints) {
    centers.emplace_back(t.x() / g.step_x(), t.y() / g.step_y(), t.z() / g.step_z());
  }
  return detail::gaussian_volume_from_bins(centers, g, sigma_bins);
}

/// Same for 2.5D targets: pixel coordinates over the crop plus depths in [0, D).
inline HeatmapVolume synthesize_gaussian_volume(const Pose2D& pixel_targets,
                                                const std::vector<double>& depths,
                                                const HeatmapGeometry& g, double sigma_bins) {
  if (g.mode != HeatmapMode::Image25D) {
    throw ContractError("synthesize_gaussian_volume: 2.5D targets require image25d mode");
  }
  if (pixel_targets.space != Space::Pixel) {
    throw ContractError("synthesize_gaussian_volume: 2.5D targets must be in pixel space");
  }
  if (depths.size() != pixel_targets.joints.size()) {
    throw ContractError("synthesize_gaussian_volume: depths size mismatch");
  }
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(pixel_targets.joints.size());
  for (size_t j = 0; j < pixel_targets.joints.size(); ++j) {
    centers.emplace_back(pixel_targets.joints[j].x() / g.step_x(),
                         pixel_targets.joints[j].y() / g.step_y(), depths[j] / g.step_z());
  }
  return detail::gaussian_volume_from_bins(centers, g, sigma_bins);
}

}  // namespace posekit
