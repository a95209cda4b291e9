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

#include <cstdint>
#include <filesystem>

#include "arhnet/dataset.hpp"

namespace arhnet {

struct SynthOptions {
  std::int64_t train = 8;
  std::int64_t test = 4;
  std::int64_t size = 24;
  std::uint64_t seed = 0;
};

/// One synthetic case: a smooth low-frequency background field with mild
/// noise and an ellipsoidal lesion whose intensity is the field plus a
/// negative offset. Deterministic in (seed, split, index).
Case synth_case(std::int64_t size, std::uint64_t seed, std::uint64_t split, std::int64_t index);

/// Writes `<out>/train/{images,masks}` and `<out>/test/{images,masks}` as
/// NIfTI files named case_NNN.nii.
void write_synth_dataset(const std::filesystem::path& out, const SynthOptions& options);

}  // namespace arhnet
