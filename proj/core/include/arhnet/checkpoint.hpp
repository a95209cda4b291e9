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
#include <string>
#include <vector>

namespace arhnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedBuffer {
  std::string name;
  std::vector<float> values;
};

/// Container layout (little-endian): "ARHF", u32 version, u64 metadata length,
/// metadata bytes (JSON text), u32 buffer count, then per buffer u32 name
/// length, name bytes, u64 value count, float32 values.
struct CheckpointData {
  std::string metadata;
  std::vector<NamedBuffer> buffers;

  /// Throws FormatError for unknown names.
  const NamedBuffer& find(const std::string& name) const;
};

void save_checkpoint(const CheckpointData& data, const std::filesystem::path& path);
/// Throws FormatError on a bad magic or truncation, UnsupportedFormatError on
/// a version mismatch, IoError when the file cannot be read.
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace arhnet
