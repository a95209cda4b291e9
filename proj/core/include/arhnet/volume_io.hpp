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

#include <filesystem>
#include <optional>
#include <string_view>

#include "arhnet/volume.hpp"

namespace arhnet {

/// On-disk volume formats.
///
/// nifti1: uncompressed single-file NIfTI-1 (".nii"), little-endian, int16 or
///   float32 voxels. The affine is read from / written to the sform rows.
/// rawf32: "<stem>.json" sidecar {"dims":[H,W,D],"spacing":[x,y,z],"affine":[16]}
///   plus "<stem>.bin" holding H*W*D little-endian float32 values in index
///   order (i * W + j) * D + k.
enum class VolumeFormat { kNifti1, kRawF32 };

std::string_view to_string(VolumeFormat f);
VolumeFormat parse_volume_format(std::string_view name);

/// Guesses the format from the extension (.nii -> nifti1, .bin/.json -> rawf32).
std::optional<VolumeFormat> format_from_path(const std::filesystem::path& path);

Volume3D load_volume(const std::filesystem::path& path, VolumeFormat format);
/// Same, with the format taken from the extension.
Volume3D load_volume(const std::filesystem::path& path);

void save_volume(const Volume3D& v, const std::filesystem::path& path, VolumeFormat format);
void save_volume(const Volume3D& v, const std::filesystem::path& path);

/// Masks are stored as volumes; voxels > 0.5 are foreground on load.
Mask3D load_mask(const std::filesystem::path& path);
void save_mask(const Mask3D& m, const std::filesystem::path& path, Spacing3 spacing = {});

/// Path of the rawf32 sidecar/blob for any of "<stem>", "<stem>.json", "<stem>.bin".
std::filesystem::path rawf32_json_path(const std::filesystem::path& path);
std::filesystem::path rawf32_bin_path(const std::filesystem::path& path);

}  // namespace arhnet
