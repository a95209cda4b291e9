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
#include <string>
#include <vector>

#include "arhnet/volume.hpp"

namespace arhnet {

struct Case {
  std::string name;  // image file name
  Volume3D image;
  Mask3D mask;
};

/// Image files (".nii" or rawf32 ".json") directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_volumes(const std::filesystem::path& dir);

/// Loads `<root>/images/*` with masks from `<root>/masks/<same name>`.
/// Intensities must lie in [0, 1] unless `normalize` rescales them.
std::vector<Case> load_dataset(const std::filesystem::path& root, bool normalize = false);

}  // namespace arhnet
