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

#include <vector>

#include "arhnet/volume.hpp"

namespace arhnet {

inline constexpr double kPsnrCapDb = 99.0;

struct HarmonizationReport {
  double mae = 0;
  double fmae = 0;
  double psnr_db = 0;
  double fpsnr_db = 0;
};

struct SegmentationReport {
  double dice = 0;
  double asd_mm = 0;
  double hd95_mm = 0;
};

/// Mean |a - b| over region voxels (all voxels when region is null).
double mae(const Volume3D& a, const Volume3D& b, const Mask3D* region = nullptr);
/// 10 log10(peak^2 / MSE) over the region; MSE = 0 gives `cap`.
double psnr(const Volume3D& a, const Volume3D& b, const Mask3D* region = nullptr, double peak = 1.0,
            double cap = kPsnrCapDb);
HarmonizationReport harmonization_report(const Volume3D& truth, const Volume3D& output, const Mask3D& mask);

/// 2|A n B| / (|A| + |B|); 1 when both are empty.
double dice(const Mask3D& a, const Mask3D& b);

/// Foreground voxels with a background 6-neighbour; the outside of the volume
/// counts as background.
Mask3D surface_voxels(const Mask3D& m);

/// Squared Euclidean distance (mm^2) from every voxel to the nearest voxel
/// of `sites`, by separable lower-envelope transforms. Infinite when `sites`
/// is empty.
std::vector<double> squared_distance_transform(const Mask3D& sites, const Spacing3& spacing);

/// Distances from each surface voxel of A to the surface of B followed by
/// those from B to A, sorted ascending. Throws DegenerateRegionError when
/// either mask is empty.
std::vector<double> surface_distances(const Mask3D& a, const Mask3D& b, const Spacing3& spacing = {});

/// Linear-interpolated percentile at q * (n - 1) of sorted values.
double percentile(const std::vector<double>& sorted, double q);

SegmentationReport segmentation_report(const Mask3D& pred, const Mask3D& truth, const Spacing3& spacing = {});

}  // namespace arhnet
