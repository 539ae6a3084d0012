// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace posekit {

/// Base class of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an API contract (wrong space/frame/mode tag,
/// non-finite input, inconsistent sizes, bad configuration).
struct ContractError : Error {
  using Error::Error;
};

/// A 3D point required to be in front of the camera has Z <= 0.
struct BehindCameraError : Error {
  using Error::Error;
};

/// A matrix passed as a rotation fails the orthonormality check.
struct InvalidRotationError : Error {
  using Error::Error;
};

/// Fewer equations than unknowns (e.g. less than 2 usable joints).
struct UnderdeterminedError : Error {
  using Error::Error;
};

/// The system is formally determined but numerically rank deficient.
struct DegenerateGeometryError : Error {
  using Error::Error;
};

/// A synthesis target lies outside the heatmap volume.
struct OutOfVolumeError : Error {
  using Error::Error;
};

/// No bone has both endpoints valid; scale recovery cannot run.
struct NoBonesError : Error {
  using Error::Error;
};

/// File or stream level I/O failure (missing file, malformed payload).
struct IoError : Error {
  using Error::Error;
};

}  // namespace posekit
