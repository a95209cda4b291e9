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

#include "arhnet/dataset.hpp"

#include <algorithm>

#include "arhnet/error.hpp"
#include "arhnet/volume_io.hpp"

namespace arhnet {

namespace fs = std::filesystem;

std::vector<fs::path> list_volumes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".nii" || ext == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Case> load_dataset(const fs::path& root, bool normalize) {
  std::vector<Case> cases;
  for (const auto& path : list_volumes(root / "images")) {
    const fs::path mask_path = root / "masks" / path.filename();
    if (!fs::exists(mask_path)) throw IoError("no mask for " + path.string() + " (expected " + mask_path.string() + ")");
    Case c{path.filename().string(), load_volume(path), load_mask(mask_path)};
    if (!(c.image.dims() == c.mask.dims())) {
      throw PreconditionError(c.name + ": image " + c.image.dims().str() + " vs mask " + c.mask.dims().str());
    }
    if (normalize) {
      c.image = normalize_intensity(c.image);
    } else {
      const auto [lo, hi] = std::minmax_element(c.image.data().begin(), c.image.data().end());
      if (*lo < 0.0f || *hi > 1.0f) {
        throw PreconditionError(c.name + ": intensities outside [0, 1]; set normalize = true");
      }
    }
    cases.push_back(std::move(c));
  }
  if (cases.empty()) throw PreconditionError("dataset " + root.string() + " holds no images");
  return cases;
}

}  // namespace arhnet
