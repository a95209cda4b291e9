// Copyright 2026 The ARHNet Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "arhnet/networks.hpp"
#include "arhnet/volume.hpp"

namespace arhnet {

/// The "composite" baseline: returns the input unchanged.
Volume3D composite_identity(const Volume3D& image);

enum class HmReference {
  kShell,       // dilate(M, context_radius) AND NOT M
  kBackground,  // every non-mask voxel
};

struct HistogramMatchOptions {
  int bins = 256;
  int context_radius = 8;
  HmReference reference = HmReference::kShell;
};

/// Remaps foreground intensities onto the reference region's distribution.
/// A foreground value v sits at level (#{< v} + #{= v} / 2) / n of the
/// foreground, and maps to the reference quantile at that level, read from
/// a `bins`-bin histogram over [ref_min, ref_max] with linear interpolation
/// inside a bin. Background voxels are copied.
Volume3D histogram_match(const Volume3D& image, const Mask3D& mask, const HistogramMatchOptions& options = {});

/// Runs the generator over patch_size^3 windows covering the mask's bounding
/// box and writes its output on mask voxels. Axes shorter than patch_size
/// are processed whole.
Volume3D harmonize_with_model(const Generator& g, const Volume3D& image, const Mask3D& mask, std::int64_t patch_size);

}  // namespace arhnet
