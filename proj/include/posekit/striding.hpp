// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "posekit/errors.hpp"

namespace posekit {

enum class StridingMode { Normal, Centered };

/// Receptive-field-center grid of a strided fully-convolutional layer,
/// idealized as an affine grid along one axis (2D is the Cartesian product).
struct StridingConfig {
  int input_size = 256;  // px
  int stride = 32;       // px
  StridingMode mode = StridingMode::Normal;

  StridingConfig() = default;
  StridingConfig(int input, int s, StridingMode m) : input_size(input), stride(s), mode(m) {
    if (s < 1 || input < 1 || input % s != 0) {
      throw ContractError("StridingConfig: input_size must be a positive multiple of stride");
    }
  }
};

/// Per-axis output-neuron centers in pixels.
/// Normal striding keeps the top-left result of each block: c_i = i*s, which
/// skews coverage away from the bottom-right border. Centered striding keeps
/// the bottom-right result, c_i = i*s + s/2, distributing centers
/// symmetrically so their mean is exactly input_size/2.
inline std::vector<double> receptive_centers(const StridingConfig& cfg) {
  const int n = cfg.input_size / cfg.stride;
  const double s = static_cast<double>(cfg.stride);
  const double offset = cfg.mode == StridingMode::Centered ? s / 2.0 : 0.0;
  std::vector<double> centers(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) centers[static_cast<size_t>(i)] = i * s + offset;
  return centers;
}

inline double centers_mean(const std::vector<double>& centers) {
  double sum = 0.0;
  for (double c : centers) sum += c;
  return sum / static_cast<double>(centers.size());
}

}  // namespace posekit
