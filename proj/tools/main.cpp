// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness around the library: synthetic decoding round trips,
// weak-vs-full perspective reconstruction sweeps, bone-length scale recovery
// studies, metric evaluation of pose files and striding-geometry reports.
// All stochastic subcommands are reproducible byte-for-byte under --seed.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "posekit/posekit.hpp"

namespace {

using posekit::json;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_int(long v) { return std::to_string(v); }

std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t config_hash(const std::string& config_bytes, std::uint64_t seed) {
  std::uint64_t h = fnv1a(config_bytes);
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ULL;
  }
  return h;
}

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::uint64_t hash = 0;

  std::string render(const std::string& format) const {
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(hash));
    if (format == "json") {
      json j;
      j["columns"] = columns;
      j["rows"] = rows;
      j["config_hash"] = hash_hex;
      j["version"] = posekit::kVersion;
      return j.dump(2) + "\n";
    }
    std::string out;
    for (size_t c = 0; c < columns.size(); ++c) {
      out += columns[c];
      out += c + 1 < columns.size() ? "," : "\n";
    }
    for (const auto& row : rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        out += row[c];
        out += c + 1 < row.size() ? "," : "\n";
      }
    }
    out += std::string("# config_hash=") + hash_hex + " version=" + posekit::kVersion + "\n";
    return out;
  }
};

void emit(const Report& report, const std::string& out_path, const std::string& format) {
  const std::string text = report.render(format);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    posekit::write_file(out_path, text);
  }
}

// ---------------------------------------------------------------------------
// roundtrip: synthesize Gaussian volumes for random interior targets, decode
// them and report the per-scene recovery error.

Report cmd_roundtrip(const json& cfg, std::uint64_t seed) {
  const int scenes = cfg.value("scenes", 100);
  const int joints = cfg.value("joints", 17);
  const double sigma_bins = cfg.value("sigma_bins", 1.0);
  const double margin_sigma = cfg.value("margin_sigma", 3.0);
  int nx = 8, ny = 8, nz = 8;
  double W = 2200.0, H = 2200.0, D = 2200.0;
  if (cfg.contains("geometry")) {
    const json& g = cfg.at("geometry");
    if (g.contains("bins")) {
      nx = g.at("bins")[0].get<int>();
      ny = g.at("bins")[1].get<int>();
      nz = g.at("bins")[2].get<int>();
    }
    if (g.contains("extents_mm")) {
      W = g.at("extents_mm")[0].get<double>();
      H = g.at("extents_mm")[1].get<double>();
      D = g.at("extents_mm")[2].get<double>();
    }
  }
  const posekit::HeatmapGeometry geom = posekit::HeatmapGeometry::metric(nx, ny, nz, W, H, D);
  const double margin = margin_sigma * sigma_bins;
  if (margin > (std::min({nx, ny, nz}) - 1) / 2.0) {
    throw posekit::ContractError("roundtrip: margin leaves no interior volume");
  }
  posekit::Rng rng(seed);
  Report rep;
  rep.columns = {"scene", "max_err_mm", "mean_err_mm"};
  for (int s = 0; s < scenes; ++s) {
    posekit::Pose3D targets;
    for (int j = 0; j < joints; ++j) {
      targets.joints.emplace_back(rng.uniform(margin, nx - 1 - margin) * geom.step_x(),
                                  rng.uniform(margin, ny - 1 - margin) * geom.step_y(),
                                  rng.uniform(margin, nz - 1 - margin) * geom.step_z());
    }
    const posekit::HeatmapVolume vol =
        posekit::synthesize_gaussian_volume(targets, geom, sigma_bins);
    const posekit::Pose3D decoded = posekit::soft_argmax_metric(vol);
    double max_err = 0.0, sum_err = 0.0;
    for (int j = 0; j < joints; ++j) {
      const double e =
          (decoded.joints[static_cast<size_t>(j)] - targets.joints[static_cast<size_t>(j)]).norm();
      max_err = std::max(max_err, e);
      sum_err += e;
    }
    rep.rows.push_back({fmt_int(s), fmt_num(max_err), fmt_num(sum_err / joints)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// reconstruct-compare: depth-ratio sweep of weak vs full perspective.

Report cmd_reconstruct_compare(const json& cfg, std::uint64_t seed) {
  const int scenes = cfg.value("scenes", 500);
  std::vector<double> ratios = {1.0, 1.1, 1.2, 1.4};
  if (cfg.contains("ratios")) ratios = cfg.at("ratios").get<std::vector<double>>();

  // The config is a SceneSpec payload plus the sweep keys above.
  posekit::SceneSpec spec = posekit::scenespec_from_json(cfg);
  std::vector<double> sigmas = {spec.noise.sigma_2d_normalized};
  if (cfg.contains("sigmas_2d")) sigmas = cfg.at("sigmas_2d").get<std::vector<double>>();

  Report rep;
  rep.columns = {"ratio", "solver", "sigma_2d", "mean_z0_error_mm", "median_z0_error_mm"};
  for (double sigma : sigmas) {
    spec.noise.sigma_2d_normalized = sigma;
    spec.seed = seed;
    const auto rows = posekit::depth_ratio_sweep(spec, ratios, scenes);
    for (const auto& r : rows) {
      rep.rows.push_back({fmt_num(r.ratio), "full", fmt_num(sigma),
                          fmt_num(r.mean_z0_error_full_mm), fmt_num(r.median_z0_error_full_mm)});
      rep.rows.push_back({fmt_num(r.ratio), "weak", fmt_num(sigma),
                          fmt_num(r.mean_z0_error_weak_mm), fmt_num(r.median_z0_error_weak_mm)});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// scale-recovery: bone-length root depth recovery vs noise and target-length
// mismatch.

Report cmd_scale_recovery(const json& cfg, std::uint64_t seed) {
  const int scenes = cfg.value("scenes", 200);
  const bool planar = cfg.value("planar", false);
  std::vector<double> sigmas = {0.0};
  if (cfg.contains("sigmas_2d")) sigmas = cfg.at("sigmas_2d").get<std::vector<double>>();
  std::vector<double> target_scales = {1.0};
  if (cfg.contains("target_scales")) {
    target_scales = cfg.at("target_scales").get<std::vector<double>>();
  }
  const double sigma_depth = cfg.value("sigma_depth_mm", 0.0);
  double depth_lo = 1500.0, depth_hi = 6000.0;
  if (cfg.contains("depth_range_mm")) {
    depth_lo = cfg.at("depth_range_mm")[0].get<double>();
    depth_hi = cfg.at("depth_range_mm")[1].get<double>();
  }
  const posekit::BoneSpec bones = cfg.contains("bones")
                                      ? posekit::bonespec_from_json(cfg.at("bones"))
                                      : posekit::default_bone_spec();

  Report rep;
  rep.columns = {"sigma_2d",          "target_scale",       "mean_abs_err_mm",
                 "median_abs_err_mm", "mean_recovered_over_true", "mean_iterations"};
  for (double sigma : sigmas) {
    for (double scale : target_scales) {
      posekit::Rng rng(seed);
      std::vector<double> errs;
      double ratio_sum = 0.0, iter_sum = 0.0;
      for (int s = 0; s < scenes; ++s) {
        posekit::Pose3D rel = posekit::random_pose(bones, rng);
        if (planar) {
          for (auto& X : rel.joints) X.z() = 0.0;
        }
        const double z0 = rng.uniform(depth_lo, depth_hi);
        posekit::Pose25D p;
        p.p2d.space = posekit::Space::Normalized;
        for (const auto& d : rel.joints) {
          const double depth = z0 + d.z();
          p.p2d.joints.emplace_back(d.x() / depth + rng.normal(0.0, sigma),
                                    d.y() / depth + rng.normal(0.0, sigma));
          p.rel_depth_mm.push_back(d.z() + rng.normal(0.0, sigma_depth));
        }
        p.p2d.valid.assign(rel.joints.size(), true);
        p.valid.assign(rel.joints.size(), true);
        // Reference lengths from the true pose geometry, then scaled to
        // emulate a subject taller or shorter than the skeleton prior.
        posekit::BoneSpec used = bones;
        used.target_lengths_mm = posekit::bone_lengths(rel, bones);
        for (auto& t : used.target_lengths_mm) t = std::max(t * scale, 1e-9);
        const posekit::ScaleRecoveryResult r = posekit::recover_root_depth(p, used);
        errs.push_back(std::abs(r.z0_mm - z0));
        ratio_sum += r.z0_mm / z0;
        iter_sum += r.iterations;
      }
      double mean = 0.0;
      for (double e : errs) mean += e;
      mean /= errs.size();
      std::sort(errs.begin(), errs.end());
      const double median = errs.size() % 2 == 1
                                ? errs[errs.size() / 2]
                                : 0.5 * (errs[errs.size() / 2 - 1] + errs[errs.size() / 2]);
      rep.rows.push_back({fmt_num(sigma), fmt_num(scale), fmt_num(mean), fmt_num(median),
                          fmt_num(ratio_sum / scenes), fmt_num(iter_sum / scenes)});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// evaluate: metric evaluation of prediction/ground-truth pose files.

struct SequenceAccumulator {
  std::vector<double> err_protocol;  // per-joint errors under the protocol alignment
  std::vector<double> err_procrustes;
  std::vector<double> err_absolute;
  long frames = 0;
};

void accumulate(SequenceAccumulator& acc, const posekit::Pose3D& pred_in,
                const posekit::Pose3D& gt_in, const posekit::EvalProtocol& proto,
                const std::vector<std::pair<int, int>>& rescale_edges, int rescale_root) {
  using namespace posekit;
  Pose3D pred = pred_in;
  const Pose3D& gt = gt_in;
  if (pred.joint_count() != gt.joint_count()) {
    throw ContractError("evaluate: prediction/ground-truth joint counts differ");
  }
  if (proto.bone_rescale) pred = bone_rescale(pred, gt, rescale_edges, rescale_root);

  Pose3D pred_sub = pred, gt_sub = gt;
  if (pred.joint_count() == 17 && proto.joint_subset != 17) {
    const JointSubset subset = joint_subset_from_int(proto.joint_subset);
    pred_sub = select_joints(pred, subset);
    gt_sub = select_joints(gt, subset);
  }

  Pose3D aligned = pred_sub;
  if (proto.root_align) {
    const Eigen::Vector3d shift = gt.joints[static_cast<size_t>(gt.root_index)] -
                                  pred.joints[static_cast<size_t>(pred.root_index)];
    for (auto& X : aligned.joints) X += shift;
  }
  for (size_t j = 0; j < gt_sub.joints.size(); ++j) {
    acc.err_protocol.push_back((aligned.joints[j] - gt_sub.joints[j]).norm());
    acc.err_absolute.push_back((pred_sub.joints[j] - gt_sub.joints[j]).norm());
  }
  if (proto.procrustes) {
    const Pose3D pa = procrustes_align(pred_sub, gt_sub);
    for (size_t j = 0; j < gt_sub.joints.size(); ++j) {
      acc.err_procrustes.push_back((pa.joints[j] - gt_sub.joints[j]).norm());
    }
  }
  ++acc.frames;
}

std::vector<std::string> metrics_row(const std::string& name, const SequenceAccumulator& acc,
                                     const posekit::EvalProtocol& proto) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return v.empty() ? 0.0 : s / v.size();
  };
  auto frac_within = [](const std::vector<double>& v, double thr) {
    if (v.empty()) return 0.0;
    long n = 0;
    for (double e : v) {
      if (e <= thr) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(v.size());
  };
  auto auc_of = [&](const std::vector<double>& v, double mx) {
    double s = 0.0;
    for (int i = 0; i < 31; ++i) s += frac_within(v, mx * i / 30.0);
    return s / 31.0;
  };
  return {name,
          fmt_int(acc.frames),
          fmt_num(mean(acc.err_protocol)),
          proto.procrustes ? fmt_num(mean(acc.err_procrustes)) : "",
          fmt_num(frac_within(acc.err_protocol, proto.pck_threshold_mm)),
          fmt_num(auc_of(acc.err_protocol, proto.auc_max_mm)),
          fmt_num(mean(acc.err_absolute)),
          fmt_num(frac_within(acc.err_absolute, proto.pck_threshold_mm))};
}

Report cmd_evaluate(const json& cfg, const std::string& pred_path, const std::string& gt_path) {
  using namespace posekit;
  const EvalProtocol proto = protocol_from_json(cfg);
  std::vector<std::pair<int, int>> rescale_edges;
  int rescale_root = 0;
  if (proto.bone_rescale) {
    if (!cfg.contains("bones")) {
      throw ContractError("evaluate: bone_rescale requires a \"bones\" object in the protocol");
    }
    rescale_edges = bonespec_from_json(cfg.at("bones")).edges;
    rescale_root = cfg.at("bones").value("root", 0);
  }

  const json pred_doc = parse_json_file(pred_path);
  const json gt_doc = parse_json_file(gt_path);
  try {
    const json& pred_seqs = pred_doc.at("sequences");
    const json& gt_seqs = gt_doc.at("sequences");
    if (pred_seqs.size() != gt_seqs.size()) {
      throw ContractError("evaluate: sequence counts differ between files");
    }
    Report rep;
    rep.columns = {"sequence", "frames", "mpjpe_mm", "p_mpjpe_mm",
                   "pck",      "auc",    "a_mpjpe_mm", "a_pck"};
    SequenceAccumulator total;
    for (size_t s = 0; s < pred_seqs.size(); ++s) {
      const std::string name = gt_seqs[s].at("name").get<std::string>();
      if (pred_seqs[s].at("name").get<std::string>() != name) {
        throw ContractError("evaluate: sequence names differ at index " + std::to_string(s));
      }
      const json& pp = pred_seqs[s].at("poses");
      const json& gp = gt_seqs[s].at("poses");
      if (pp.size() != gp.size()) {
        throw ContractError("evaluate: frame counts differ in sequence " + name);
      }
      SequenceAccumulator acc;
      for (size_t f = 0; f < pp.size(); ++f) {
        accumulate(acc, pose3d_from_json(pp[f]), pose3d_from_json(gp[f]), proto, rescale_edges,
                   rescale_root);
        accumulate(total, pose3d_from_json(pp[f]), pose3d_from_json(gp[f]), proto, rescale_edges,
                   rescale_root);
      }
      rep.rows.push_back(metrics_row(name, acc, proto));
    }
    rep.rows.push_back(metrics_row("ALL", total, proto));
    return rep;
  } catch (const json::exception& e) {
    throw IoError(std::string("evaluate: malformed pose file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// striding-report: receptive-center grids and their means.

Report cmd_striding_report(const json& cfg) {
  using namespace posekit;
  const int input = cfg.value("input_size", 256);
  std::vector<int> strides = {32, 16};
  if (cfg.contains("strides")) strides = cfg.at("strides").get<std::vector<int>>();
  std::vector<std::string> modes = {"normal", "centered"};
  if (cfg.contains("modes")) modes = cfg.at("modes").get<std::vector<std::string>>();

  Report rep;
  rep.columns = {"input_px", "stride_px", "mode", "count", "mean_px", "centers_px"};
  for (int stride : strides) {
    for (const std::string& mode : modes) {
      if (mode != "normal" && mode != "centered") {
        throw ContractError("striding-report: mode must be normal or centered");
      }
      const StridingConfig sc(input, stride,
                              mode == "centered" ? StridingMode::Centered : StridingMode::Normal);
      const auto centers = receptive_centers(sc);
      std::string joined;
      for (size_t i = 0; i < centers.size(); ++i) {
        joined += fmt_num(centers[i]);
        if (i + 1 < centers.size()) joined += ';';
      }
      rep.rows.push_back({fmt_int(input), fmt_int(stride), mode,
                          fmt_int(static_cast<long>(centers.size())),
                          fmt_num(centers_mean(centers)), joined});
    }
  }
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posekit: geometry, decoding, reconstruction and evaluation for metric-scale "
               "3D human pose"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", pred_path, gt_path;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_seed) {
    sub->add_option("--config", config_path, "JSON config payload")->required();
    sub->add_option("--out", out_path, "output path (stdout when omitted)");
    sub->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* s = sub->add_option("--seed", seed, "RNG seed");
    if (needs_seed) s->required();
  };

  CLI::App* roundtrip = app.add_subcommand(
      "roundtrip", "synthesize Gaussian heatmaps for random targets, decode and report errors");
  add_common(roundtrip, true);
  CLI::App* compare = app.add_subcommand(
      "reconstruct-compare", "weak vs full perspective root recovery across depth ratios");
  add_common(compare, true);
  CLI::App* scale = app.add_subcommand(
      "scale-recovery", "bone-length root depth recovery vs noise and length mismatch");
  add_common(scale, true);
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "compute pose metrics for prediction/ground-truth files");
  add_common(evaluate, false);
  evaluate->add_option("--pred", pred_path, "prediction pose file")->required();
  evaluate->add_option("--gt", gt_path, "ground-truth pose file")->required();
  CLI::App* striding =
      app.add_subcommand("striding-report", "receptive-field center grids and means");
  add_common(striding, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    const std::string config_bytes = posekit::read_file(config_path);
    const json cfg = [&] {
      try {
        return json::parse(config_bytes);
      } catch (const json::exception& e) {
        throw posekit::IoError(std::string("config parse: ") + e.what());
      }
    }();

    Report rep;
    if (roundtrip->parsed()) {
      rep = cmd_roundtrip(cfg, seed);
    } else if (compare->parsed()) {
      rep = cmd_reconstruct_compare(cfg, seed);
    } else if (scale->parsed()) {
      rep = cmd_scale_recovery(cfg, seed);
    } else if (evaluate->parsed()) {
      rep = cmd_evaluate(cfg, pred_path, gt_path);
    } else {
      rep = cmd_striding_report(cfg);
    }
    rep.hash = config_hash(config_bytes, seed);
    emit(rep, out_path, format);
    return 0;
  } catch (const posekit::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const posekit::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const posekit::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
