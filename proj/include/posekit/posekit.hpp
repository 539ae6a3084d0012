// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "posekit/camera.hpp"
#include "posekit/errors.hpp"
#include "posekit/heatmap.hpp"
#include "posekit/io.hpp"
#include "posekit/joints.hpp"
#include "posekit/losses.hpp"
#include "posekit/metrics.hpp"
#include "posekit/reconstruction.hpp"
#include "posekit/rng.hpp"
#include "posekit/scale_recovery.hpp"
#include "posekit/striding.hpp"
#include "posekit/synth.hpp"
#include "posekit/version.hpp"
