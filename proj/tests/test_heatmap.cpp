// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "posekit/heatmap.hpp"
#include "posekit/rng.hpp"
#include "support/test_helpers.hpp"

using namespace posekit;

namespace {

// Paper-default training geometry: 256 px crop at stride 32, 2.2 m extents,
// 8 depth bins.
HeatmapGeometry paper_geometry() {
  return HeatmapGeometry::metric_for_crop(256, 256, 32, 8, 2200.0, 2200.0, 2200.0);
}

HeatmapVolume delta_volume(const HeatmapGeometry& g, int p, int q, int r) {
  HeatmapVolume v;
  v.geometry = g;
  v.joints = 1;
  v.values.assign(static_cast<size_t>(g.bins_per_joint()), 0.0);
  v.values[static_cast<size_t>((static_cast<long>(p) * g.ny + q) * g.nz + r)] = 1.0;
  return v;
}

HeatmapVolume uniform_volume(const HeatmapGeometry& g) {
  HeatmapVolume v;
  v.geometry = g;
  v.joints = 1;
  v.values.assign(static_cast<size_t>(g.bins_per_joint()),
                  1.0 / static_cast<double>(g.bins_per_joint()));
  return v;
}

}  // namespace

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(HeatmapGeometry::metric(0, 8, 8, 2200, 2200, 2200), ContractError);
  CHECK_THROWS_AS(HeatmapGeometry::metric(8, 8, 8, -1.0, 2200, 2200), ContractError);
  CHECK_THROWS_AS(HeatmapGeometry::image25d(250, 256, 32, 8, 2200), ContractError);
  CHECK(paper_geometry().nx == 8);
  CHECK(paper_geometry().step_x() == Catch::Approx(275.0));
}

TEST_CASE("spatial softmax normalizes, saturates and is shift invariant") {
  const HeatmapGeometry g = paper_geometry();
  const long n = g.bins_per_joint();

  std::vector<double> zeros(static_cast<size_t>(n), 0.0);
  const HeatmapVolume u = spatial_softmax(zeros, 1, g);
  for (double v : u.values) CHECK(v == Catch::Approx(1.0 / 512.0).margin(1e-15));

  std::vector<double> peaky(static_cast<size_t>(n), 0.0);
  peaky[37] = 1000.0;
  const HeatmapVolume d = spatial_softmax(peaky, 1, g);
  CHECK(d.values[37] == Catch::Approx(1.0).margin(1e-6));

  Rng rng(3);
  std::vector<double> logits(static_cast<size_t>(n));
  for (auto& l : logits) l = rng.uniform(-4.0, 4.0);
  std::vector<double> shifted = logits;
  for (auto& l : shifted) l += 123.456;
  const HeatmapVolume a = spatial_softmax(logits, 1, g);
  const HeatmapVolume b = spatial_softmax(shifted, 1, g);
  for (long i = 0; i < n; ++i) {
    CHECK(std::abs(a.values[static_cast<size_t>(i)] - b.values[static_cast<size_t>(i)]) <= 1e-9);
  }

  std::vector<double> bad(static_cast<size_t>(n), 0.0);
  bad[0] = std::nan("");
  CHECK_THROWS_AS(spatial_softmax(bad, 1, g), ContractError);
}

TEST_CASE("metric soft-argmax of delta and uniform volumes") {
  const HeatmapGeometry g = paper_geometry();

  const Pose3D zero = soft_argmax_metric(delta_volume(g, 0, 0, 0));
  CHECK(zero.joints[0].cwiseAbs().maxCoeff() == 0.0);

  const Pose3D mid = soft_argmax_metric(delta_volume(g, 4, 4, 4));
  CHECK(mid.joints[0].x() == Catch::Approx(1100.0).margin(1e-6));
  CHECK(mid.joints[0].y() == Catch::Approx(1100.0).margin(1e-6));
  CHECK(mid.joints[0].z() == Catch::Approx(1100.0).margin(1e-6));

  const Pose3D uni = soft_argmax_metric(uniform_volume(g));
  CHECK(uni.joints[0].x() == Catch::Approx(962.5).margin(1e-6));
  CHECK(uni.joints[0].y() == Catch::Approx(962.5).margin(1e-6));
  CHECK(uni.joints[0].z() == Catch::Approx(962.5).margin(1e-6));

  HeatmapVolume v25 = delta_volume(HeatmapGeometry::image25d(256, 256, 32, 8, 2200.0), 0, 0, 0);
  CHECK_THROWS_AS(soft_argmax_metric(v25), ContractError);
}

TEST_CASE("image25d soft-argmax decodes pixels and depth") {
  const HeatmapGeometry g = HeatmapGeometry::image25d(256, 256, 32, 8, 2200.0);

  const auto [p0, d0] = soft_argmax_25d(delta_volume(g, 0, 0, 0));
  CHECK(p0.joints[0].x() == 0.0);
  CHECK(d0[0] == 0.0);

  const auto [p7, d7] = soft_argmax_25d(delta_volume(g, 7, 7, 7));
  CHECK(p7.joints[0].x() == Catch::Approx(224.0).margin(1e-9));
  CHECK(p7.joints[0].y() == Catch::Approx(224.0).margin(1e-9));
  CHECK(d7[0] == Catch::Approx(1925.0).margin(1e-9));

  const auto [pu, du] = soft_argmax_25d(uniform_volume(g));
  CHECK(pu.joints[0].x() == Catch::Approx(112.0).margin(1e-9));
  CHECK(pu.joints[0].y() == Catch::Approx(112.0).margin(1e-9));
  CHECK(du[0] == Catch::Approx(962.5).margin(1e-9));

  CHECK_THROWS_AS(soft_argmax_25d(uniform_volume(paper_geometry())), ContractError);
}

TEST_CASE("root_center subtracts the root and is idempotent") {
  Pose3D p;
  p.joints = {{10.0, 20.0, 30.0}, {40.0, 50.0, 60.0}};
  p.root_index = 0;
  const Pose3D c = root_center(p);
  CHECK(c.frame == Frame::RootRelative);
  CHECK(c.joints[0] == Eigen::Vector3d(0, 0, 0));
  CHECK(c.joints[1] == Eigen::Vector3d(30, 30, 30));

  const Pose3D cc = root_center(c);
  CHECK(cc.joints[0] == c.joints[0]);
  CHECK(cc.joints[1] == c.joints[1]);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    Pose3D q = testutil::random_abs_pose(rng, 6, 700.0, 3000.0);
    Pose3D shifted = q;
    const Eigen::Vector3d off(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4),
                              rng.uniform(-1e4, 1e4));
    for (auto& X : shifted.joints) X += off;
    const Pose3D a = root_center(q);
    const Pose3D b = root_center(shifted);
    for (size_t j = 0; j < a.joints.size(); ++j) {
      CHECK((a.joints[j] - b.joints[j]).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("gaussian synthesis round-trips through the decoder") {
  const HeatmapGeometry g = paper_geometry();

  // Volume-center target decodes exactly by symmetry.
  Pose3D center;
  center.joints = {{3.5 * 275.0, 3.5 * 275.0, 3.5 * 275.0}};
  const HeatmapVolume vc = synthesize_gaussian_volume(center, g, 1.0);
  const Pose3D dc = soft_argmax_metric(vc);
  CHECK(dc.joints[0].x() == Catch::Approx(center.joints[0].x()).margin(1e-9));

  // Tiny sigma concentrates on the nearest bin.
  Pose3D at_bin;
  at_bin.joints = {{3.0 * 275.0, 2.0 * 275.0, 5.0 * 275.0}};
  const Pose3D db = soft_argmax_metric(synthesize_gaussian_volume(at_bin, g, 0.05));
  CHECK((db.joints[0] - at_bin.joints[0]).cwiseAbs().maxCoeff() <= 1e-6 * 275.0);

  // Halfway between bin centers, sigma 1: within 1 mm.
  Pose3D halfway;
  halfway.joints = {{3.5 * 275.0, 3.0 * 275.0, 3.5 * 275.0}};
  const Pose3D dh = soft_argmax_metric(synthesize_gaussian_volume(halfway, g, 1.0));
  CHECK((dh.joints[0] - halfway.joints[0]).cwiseAbs().maxCoeff() <= 1.0);

  Pose3D outside;
  outside.joints = {{-10.0, 0.0, 0.0}};
  CHECK_THROWS_AS(synthesize_gaussian_volume(outside, g, 1.0), OutOfVolumeError);
  CHECK_THROWS_AS(synthesize_gaussian_volume(center, g, 0.0), ContractError);
}

TEST_CASE("metric round trip recovers interior targets within 1 mm") {
  const HeatmapGeometry g = paper_geometry();
  const double sigma = 1.0;
  Rng rng(23);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Pose3D target;
    target.joints = {{rng.uniform(3.0, 4.0) * 275.0, rng.uniform(3.0, 4.0) * 275.0,
                      rng.uniform(3.0, 4.0) * 275.0}};
    const Pose3D dec = soft_argmax_metric(synthesize_gaussian_volume(target, g, sigma));
    worst = std::max(worst, (dec.joints[0] - target.joints[0]).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1.0);
}

TEST_CASE("image25d round trip recovers interior targets within 0.05 px") {
  const HeatmapGeometry g = HeatmapGeometry::image25d(512, 512, 8, 32, 2200.0);
  const double sigma = 1.0;
  Rng rng(29);
  double worst_px = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Pose2D target;
    target.space = Space::Pixel;
    target.joints = {{rng.uniform(3.0, 60.0) * 8.0, rng.uniform(3.0, 60.0) * 8.0}};
    target.valid = {true};
    const std::vector<double> depth = {rng.uniform(3.0, 28.0) * (2200.0 / 32.0)};
    const auto [dp, dd] = soft_argmax_25d(synthesize_gaussian_volume(target, depth, g, sigma));
    worst_px = std::max(worst_px, (dp.joints[0] - target.joints[0]).cwiseAbs().maxCoeff());
  }
  CHECK(worst_px <= 0.05);
}

TEST_CASE("soft-argmax is linear in the volume and stays inside it") {
  const HeatmapGeometry g = paper_geometry();
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> l1(static_cast<size_t>(g.bins_per_joint()));
    std::vector<double> l2(l1.size());
    for (auto& v : l1) v = rng.uniform(-3.0, 3.0);
    for (auto& v : l2) v = rng.uniform(-3.0, 3.0);
    const HeatmapVolume v1 = spatial_softmax(l1, 1, g);
    const HeatmapVolume v2 = spatial_softmax(l2, 1, g);
    const double alpha = rng.uniform(0.0, 1.0);
    HeatmapVolume mix = v1;
    for (size_t i = 0; i < mix.values.size(); ++i) {
      mix.values[i] = alpha * v1.values[i] + (1.0 - alpha) * v2.values[i];
    }
    const Eigen::Vector3d dm = soft_argmax_metric(mix).joints[0];
    const Eigen::Vector3d expect =
        alpha * soft_argmax_metric(v1).joints[0] + (1.0 - alpha) * soft_argmax_metric(v2).joints[0];
    CHECK((dm - expect).cwiseAbs().maxCoeff() <= 1e-9);
    // Convex combination of bin coordinates stays inside the volume span.
    for (int c = 0; c < 3; ++c) {
      CHECK(dm(c) >= 0.0);
      CHECK(dm(c) <= 7.0 * 275.0 + 1e-9);
    }
  }
}
