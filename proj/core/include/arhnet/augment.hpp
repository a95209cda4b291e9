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

#include <optional>

#include "arhnet/rng.hpp"
#include "arhnet/volume.hpp"

namespace arhnet {

/// Foreground intensity perturbation: fg' = (1 + alpha) * fg + lambda.
struct Perturbation {
  double alpha = 0.0;
  double lambda = 0.0;
};

inline constexpr double kPerturbationRange = 0.3;

/// alpha, lambda ~ U(-0.3, 0.3), drawn in that order.
Perturbation sample_perturbation(Rng& rng);

/// Applies the perturbation inside M and clamps those voxels to [0, 1];
/// background voxels are copied unchanged.
Volume3D perturb_foreground(const Volume3D& image, const Mask3D& mask, const Perturbation& p);

/// Morphology with the 6-connected structuring element applied `radius` times.
/// Voxels outside the volume count as background (zero padding).
Mask3D dilate(const Mask3D& m, int radius);
Mask3D erode(const Mask3D& m, int radius);

/// Band straddling the mask border: dilate(M, r) AND NOT erode(M, r).
Mask3D extract_boundary(const Mask3D& m, int radius = 2);

struct PlacementPolicy {
  int max_attempts = 100;
  bool allow_overlap = false;
  /// When set, every pasted voxel must land inside this region.
  std::optional<Mask3D> host_region;
};

struct Composite {
  Volume3D image;
  Mask3D mask;
  Index3 offset{0, 0, 0};  // host position of the donor lesion bounding box
};

/// Hard-pastes the donor's foreground voxels into the host at a uniformly
/// sampled offset. Throws PlacementError when no attempt satisfies the policy.
Composite copy_paste(const Volume3D& host, const Mask3D& host_mask, const Volume3D& donor,
                     const Mask3D& donor_mask, const PlacementPolicy& policy, Rng& rng);

}  // namespace arhnet
