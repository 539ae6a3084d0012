// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "posekit/reconstruction.hpp"
#include "posekit/rng.hpp"
#include "support/test_helpers.hpp"

using namespace posekit;

namespace {

Pose2D normalized_points(std::vector<Eigen::Vector2d> pts) {
  return Pose2D::all_valid(std::move(pts), Space::Normalized);
}

/// Noiseless scene: random root-relative pose placed at a known offset,
/// projected exactly through the ideal pinhole.
ReconstructionInput consistent_scene(Rng& rng, int joints, const Eigen::Vector3d& offset,
                                     double spread = 700.0) {
  ReconstructionInput in;
  in.rel3d = testutil::random_rel_pose(rng, joints, spread);
  in.p2d.space = Space::Normalized;
  for (const auto& d : in.rel3d.joints) {
    const Eigen::Vector3d abs = d + offset;
    in.p2d.joints.emplace_back(abs.x() / abs.z(), abs.y() / abs.z());
  }
  in.p2d.valid.assign(in.rel3d.joints.size(), true);
  in.mask.assign(in.rel3d.joints.size(), true);
  return in;
}

}  // namespace

TEST_CASE("full perspective system rows follow the rearranged pinhole equations") {
  ReconstructionInput in;
  in.p2d = normalized_points({{0.0, 0.0}});
  in.rel3d.frame = Frame::RootRelative;
  in.rel3d.joints = {{0.0, 0.0, 0.0}};
  in.mask = {true};
  // Single joint still yields two equations; mask minimum is 2 joints.
  CHECK_THROWS_AS(build_full_perspective_system(in), UnderdeterminedError);

  in.p2d = normalized_points({{0.0, 0.0}, {0.1, -0.2}});
  in.rel3d.joints = {{0.0, 0.0, 0.0}, {10.0, 20.0, 30.0}};
  in.mask = {true, true};
  const auto [A, b] = build_full_perspective_system(in);
  REQUIRE(A.rows() == 4);
  CHECK(A.row(0) == Eigen::RowVector3d(1.0, 0.0, 0.0));
  CHECK(A.row(1) == Eigen::RowVector3d(0.0, 1.0, 0.0));
  CHECK(b(0) == 0.0);
  CHECK(b(1) == 0.0);
  CHECK(A.row(2) == Eigen::RowVector3d(1.0, 0.0, -0.1));
  CHECK(A.row(3) == Eigen::RowVector3d(0.0, 1.0, 0.2));
  CHECK(b(2) == Catch::Approx(-7.0).margin(1e-12));
  CHECK(b(3) == Catch::Approx(-26.0).margin(1e-12));

  in.mask = {false, true};
  CHECK_THROWS_AS(build_full_perspective_system(in), UnderdeterminedError);
}

TEST_CASE("solve_root_full recovers the exact offset on noiseless scenes") {
  Rng rng(41);
  const Eigen::Vector3d offset(100.0, -50.0, 3000.0);
  ReconstructionInput in = consistent_scene(rng, 17, offset);
  const RootSolution sol = solve_root_full(in);
  CHECK((sol.offset - offset).norm() / offset.norm() <= 1e-6);
  CHECK(sol.residual_rms <= 1e-9);

  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector3d off(rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0),
                              rng.uniform(1500.0, 8000.0));
    const int joints = 2 + static_cast<int>(rng.next_u64() % 16);
    const ReconstructionInput scene = consistent_scene(rng, joints, off);
    const RootSolution s = solve_root_full(scene);
    CHECK((s.offset - off).norm() / off.norm() <= 1e-6);
  }
}

TEST_CASE("full perspective residual is zero iff inputs are consistent") {
  Rng rng(43);
  ReconstructionInput in = consistent_scene(rng, 10, {200.0, 100.0, 4000.0});
  CHECK(solve_root_full(in).residual_rms <= 1e-9);
  in.p2d.joints[3].x() += 0.05;  // break projective consistency
  CHECK(solve_root_full(in).residual_rms > 1e-6);
}

TEST_CASE("solve_root_full detects degenerate geometry") {
  ReconstructionInput in;
  // All joints projectively coincident: every row pair is identical, so the
  // system has rank 2.
  in.p2d = normalized_points({{0.1, 0.1}, {0.1, 0.1}, {0.1, 0.1}});
  in.rel3d.frame = Frame::RootRelative;
  in.rel3d.joints = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  in.mask = {true, true, true};
  CHECK_THROWS_AS(solve_root_full(in), DegenerateGeometryError);
}

TEST_CASE("noise robustness improves with joint count") {
  Rng rng(47);
  const double sigma = 1e-3;
  const std::vector<int> counts = {4, 8, 17};
  std::vector<double> mean_err(counts.size(), 0.0);
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Vector3d off(rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0),
                              rng.uniform(2000.0, 5000.0));
    ReconstructionInput big = consistent_scene(rng, counts.back(), off);
    for (auto& q : big.p2d.joints) {
      q.x() += rng.normal(0.0, sigma);
      q.y() += rng.normal(0.0, sigma);
    }
    for (size_t c = 0; c < counts.size(); ++c) {
      ReconstructionInput sub = big;
      sub.mask.assign(big.mask.size(), false);
      for (int j = 0; j < counts[c]; ++j) sub.mask[static_cast<size_t>(j)] = true;
      mean_err[c] += std::abs(solve_root_full(sub).offset.z() - off.z()) / trials;
    }
  }
  CHECK(mean_err[0] > mean_err[1]);
  CHECK(mean_err[1] > mean_err[2]);
}

TEST_CASE("weak solver equals full solver on planar people") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    ReconstructionInput in;
    in.rel3d = testutil::random_rel_pose(rng, 12, 700.0);
    for (auto& d : in.rel3d.joints) d.z() = 0.0;
    const Eigen::Vector3d offset(rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0),
                                 rng.uniform(1500.0, 6000.0));
    in.p2d.space = Space::Normalized;
    for (const auto& d : in.rel3d.joints) {
      const Eigen::Vector3d abs = d + offset;
      in.p2d.joints.emplace_back(abs.x() / abs.z(), abs.y() / abs.z());
    }
    in.p2d.valid.assign(in.rel3d.joints.size(), true);
    in.mask.assign(in.rel3d.joints.size(), true);
    const RootSolution w = solve_root_weak(in);
    const RootSolution f = solve_root_full(in);
    CHECK((w.offset - f.offset).norm() <= 1e-9 * std::max(1.0, f.offset.norm()));
  }
}

TEST_CASE("weak solver degrades as perspective effects grow") {
  Rng rng(59);
  const int trials = 500;
  double weak_near = 0.0, full_near = 0.0, weak_far = 0.0;
  for (int t = 0; t < trials; ++t) {
    Pose3D rel = testutil::random_rel_pose(rng, 17, 700.0);
    double zlo = 0.0, zhi = 0.0;
    for (const auto& d : rel.joints) {
      zlo = std::min(zlo, d.z());
      zhi = std::max(zhi, d.z());
    }
    // Depth ratio 1.4 (strong perspective) vs 1.02 (near-planar).
    const double z_near = (zhi - 1.4 * zlo) / 0.4;
    const double z_far = (zhi - 1.02 * zlo) / 0.02;
    for (double z0 : {z_near, z_far}) {
      ReconstructionInput in;
      in.rel3d = rel;
      in.p2d.space = Space::Normalized;
      in.p2d.joints.clear();
      const Eigen::Vector3d offset(0.05 * z0, -0.03 * z0, z0);
      for (const auto& d : rel.joints) {
        const Eigen::Vector3d abs = d + offset;
        in.p2d.joints.emplace_back(abs.x() / abs.z(), abs.y() / abs.z());
      }
      in.p2d.valid.assign(rel.joints.size(), true);
      in.mask.assign(rel.joints.size(), true);
      const double we = std::abs(solve_root_weak(in).offset.z() - z0);
      const double fe = std::abs(solve_root_full(in).offset.z() - z0);
      if (z0 == z_near) {
        weak_near += we / trials;
        full_near += fe / trials;
      } else {
        weak_far += we / z0 / trials;  // relative error for the distance sweep
      }
    }
  }
  CHECK(weak_near > full_near);
  CHECK(full_near <= 1e-6);
  // As the depth ratio approaches 1 the weak model error collapses: the
  // relative Z0 error at ratio 1.02 sits within 1% .
  CHECK(weak_far <= 0.01);
}

TEST_CASE("border mask uses inclusive stride distance") {
  Pose2D p = Pose2D::all_valid({{128.0, 128.0}, {31.0, 128.0}, {32.0, 32.0}, {224.0, 225.0}},
                               Space::Pixel);
  const std::vector<bool> mask = border_mask(p, 256.0, 256.0, 32.0);
  CHECK(mask[0]);
  CHECK_FALSE(mask[1]);
  CHECK(mask[2]);
  CHECK_FALSE(mask[3]);
}

TEST_CASE("compose_absolute blends back-projection and offset addition") {
  Rng rng(61);
  const Eigen::Vector3d offset(150.0, -40.0, 2800.0);
  ReconstructionInput in = consistent_scene(rng, 9, offset);
  const RootSolution sol = solve_root_full(in);

  std::vector<bool> mask(9, true);
  mask[2] = mask[5] = false;
  const Pose3D composed = compose_absolute(in.p2d, in.rel3d, sol, mask);
  for (int j = 0; j < 9; ++j) {
    const Eigen::Vector3d truth = in.rel3d.joints[static_cast<size_t>(j)] + offset;
    CHECK((composed.joints[static_cast<size_t>(j)] - truth).cwiseAbs().maxCoeff() <= 1e-6);
  }

  // All masked out: pure offset addition.
  const Pose3D offs = compose_absolute(in.p2d, in.rel3d, sol, std::vector<bool>(9, false));
  for (int j = 0; j < 9; ++j) {
    CHECK((offs.joints[static_cast<size_t>(j)] -
           (in.rel3d.joints[static_cast<size_t>(j)] + sol.offset))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }

  // Axis ray joint.
  Pose2D axis = normalized_points({{0.0, 0.0}, {0.1, 0.0}});
  Pose3D rel;
  rel.frame = Frame::RootRelative;
  rel.joints = {{0.0, 0.0, 0.0}, {10.0, 0.0, 0.0}};
  RootSolution rs;
  rs.offset = {0.0, 0.0, 3000.0};
  const Pose3D ax = compose_absolute(axis, rel, rs, {true, true});
  CHECK(ax.joints[0] == Eigen::Vector3d(0.0, 0.0, 3000.0));

  rs.offset = {0.0, 0.0, -1.0};
  CHECK_THROWS_AS(compose_absolute(axis, rel, rs, {true, true}), BehindCameraError);
}

TEST_CASE("jacobians match central finite differences") {
  Rng rng(67);
  const double step_2d = 1e-5;
  const double step_mm = 1e-2;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d off(rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0),
                              rng.uniform(2000.0, 5000.0));
    ReconstructionInput in = consistent_scene(rng, 8, off);
    // Perturb inputs so the residual is nonzero (generic operating point).
    for (auto& q : in.p2d.joints) {
      q.x() += rng.normal(0.0, 5e-3);
      q.y() += rng.normal(0.0, 5e-3);
    }
    in.mask[1] = false;
    const auto [sol, jac] = solve_root_full_with_jacobian(in);
    (void)sol;

    for (int j = 0; j < in.joint_count(); ++j) {
      if (!in.mask[static_cast<size_t>(j)]) {
        CHECK(jac.d_x.col(j).cwiseAbs().maxCoeff() == 0.0);
        CHECK(jac.d_dz.col(j).cwiseAbs().maxCoeff() == 0.0);
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        auto fd = [&](double* slot, double h, int comp) {
          const double saved = *slot;
          *slot = saved + h;
          const double up = solve_root_full(in).offset(comp);
          *slot = saved - h;
          const double dn = solve_root_full(in).offset(comp);
          *slot = saved;
          return (up - dn) / (2.0 * h);
        };
        const size_t sj = static_cast<size_t>(j);
        CHECK(testutil::close_rel(jac.d_x(c, j), fd(&in.p2d.joints[sj].x(), step_2d, c), 1e-4,
                                  1e-6));
        CHECK(testutil::close_rel(jac.d_y(c, j), fd(&in.p2d.joints[sj].y(), step_2d, c), 1e-4,
                                  1e-6));
        CHECK(testutil::close_rel(jac.d_dx(c, j), fd(&in.rel3d.joints[sj].x(), step_mm, c), 1e-4,
                                  1e-8));
        CHECK(testutil::close_rel(jac.d_dy(c, j), fd(&in.rel3d.joints[sj].y(), step_mm, c), 1e-4,
                                  1e-8));
        CHECK(testutil::close_rel(jac.d_dz(c, j), fd(&in.rel3d.joints[sj].z(), step_mm, c), 1e-4,
                                  1e-8));
      }
    }
  }
}

TEST_CASE("uniform relative-depth shifts move the recovered depth oppositely") {
  Rng rng(71);
  ReconstructionInput in = consistent_scene(rng, 11, {120.0, 60.0, 3500.0});
  const auto [sol, jac] = solve_root_full_with_jacobian(in);
  (void)sol;
  // Shifting every dZ by delta shifts Z0 by -delta: the analytic sum of the
  // dZ partials is exactly -1, confirmed against finite differences.
  double dz_sum = 0.0;
  for (int j = 0; j < in.joint_count(); ++j) dz_sum += jac.d_dz(2, j);
  CHECK(dz_sum == Catch::Approx(-1.0).margin(1e-6));

  const double h = 1e-2;
  ReconstructionInput up = in, dn = in;
  for (auto& d : up.rel3d.joints) d.z() += h;
  for (auto& d : dn.rel3d.joints) d.z() -= h;
  const double fd =
      (solve_root_full(up).offset.z() - solve_root_full(dn).offset.z()) / (2.0 * h);
  CHECK(fd == Catch::Approx(-1.0).margin(1e-6));
}

TEST_CASE("depth_ratio arithmetic") {
  Pose3D p;
  p.joints = {{0, 0, 2000.0}, {0, 0, 2200.0}, {0, 0, 2440.0}};
  CHECK(depth_ratio(p) == Catch::Approx(1.22).margin(1e-12));

  Pose3D q;
  q.joints = {{1, 2, 1500.0}, {3, 4, 1500.0}};
  CHECK(depth_ratio(q) == 1.0);

  Pose3D r;
  r.joints = {{0, 0, 1000.0}, {0, 0, 1410.0}};
  CHECK(depth_ratio(r) == Catch::Approx(1.41).margin(1e-12));

  Pose3D bad;
  bad.joints = {{0, 0, 1000.0}, {0, 0, -5.0}};
  CHECK_THROWS_AS(depth_ratio(bad), BehindCameraError);
}
