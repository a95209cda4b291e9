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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arhnet/rng.hpp"

namespace arhnet {

/// Voxel counts along the three axes (H, W, D).
struct Dims3 {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t d = 0;

  std::int64_t count() const { return h * w * d; }
  std::int64_t operator[](int axis) const { return axis == 0 ? h : axis == 1 ? w : d; }
  bool operator==(const Dims3&) const = default;
  std::string str() const;
};

/// Millimetres per voxel along (H, W, D).
struct Spacing3 {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  bool operator==(const Spacing3&) const = default;
};

/// Row-major 4x4 voxel-to-world transform, carried through untouched.
using Affine = std::array<double, 16>;

using Index3 = std::array<std::int64_t, 3>;

/// Scalar 3D intensity field. Storage order is index = (i * W + j) * D + k.
class Volume3D {
 public:
  Volume3D() = default;
  explicit Volume3D(Dims3 dims, Spacing3 spacing = {}, std::optional<Affine> affine = {});
  Volume3D(Dims3 dims, std::vector<float> data, Spacing3 spacing = {},
           std::optional<Affine> affine = {});

  const Dims3& dims() const { return dims_; }
  const Spacing3& spacing() const { return spacing_; }
  const std::optional<Affine>& affine() const { return affine_; }
  void set_affine(std::optional<Affine> affine) { affine_ = affine; }

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return (i * dims_.w + j) * dims_.d + k;
  }
  float at(std::int64_t i, std::int64_t j, std::int64_t k) const { return data_[index(i, j, k)]; }
  float& at(std::int64_t i, std::int64_t j, std::int64_t k) { return data_[index(i, j, k)]; }

  bool operator==(const Volume3D&) const = default;

 private:
  Dims3 dims_;
  Spacing3 spacing_;
  std::optional<Affine> affine_;
  std::vector<float> data_;
};

/// Binary 3D field, one byte per voxel holding 0 (background) or 1.
class Mask3D {
 public:
  Mask3D() = default;
  explicit Mask3D(Dims3 dims);
  Mask3D(Dims3 dims, std::vector<std::uint8_t> data);

  const Dims3& dims() const { return dims_; }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> mutable_data() { return data_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return (i * dims_.w + j) * dims_.d + k;
  }
  bool at(std::int64_t i, std::int64_t j, std::int64_t k) const { return data_[index(i, j, k)] != 0; }
  void set(std::int64_t i, std::int64_t j, std::int64_t k, bool on) { data_[index(i, j, k)] = on ? 1 : 0; }

  std::int64_t count() const;
  bool empty() const { return count() == 0; }

  bool operator==(const Mask3D&) const = default;

 private:
  Dims3 dims_;
  std::vector<std::uint8_t> data_;
};

/// Axis-aligned window inside a volume.
struct PatchSpec {
  Index3 origin{0, 0, 0};
  Index3 size{0, 0, 0};

  bool operator==(const PatchSpec&) const = default;
};

struct BoundingBox {
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};  // exclusive

  std::int64_t extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// Min-max scaling to [0, 1]; a constant volume maps to all zeros.
Volume3D normalize_intensity(const Volume3D& v);

/// Converts a volume to a mask: voxels strictly above `threshold` are set.
Mask3D mask_from_volume(const Volume3D& v, float threshold = 0.5f);
Volume3D volume_from_mask(const Mask3D& m, Spacing3 spacing = {});

/// Tight bounding box of the foreground; nullopt when the mask is empty.
std::optional<BoundingBox> bounding_box(const Mask3D& m);

/// Throws PreconditionError unless the window lies inside `dims`.
void validate_patch(const PatchSpec& spec, const Dims3& dims);

Volume3D crop(const Volume3D& v, const PatchSpec& spec);
Mask3D crop(const Mask3D& m, const PatchSpec& spec);

struct Patch {
  Volume3D volume;
  Mask3D mask;
  PatchSpec spec;
};

/// Draws a window of `size` uniformly among all origins whose window holds at
/// least one foreground voxel of `m`.
Patch extract_patch(const Volume3D& v, const Mask3D& m, const Index3& size, Rng& rng);

/// Copy of `v` with the window at `spec` replaced by `patch`.
Volume3D insert_patch(const Volume3D& v, const Volume3D& patch, const PatchSpec& spec);

}  // namespace arhnet
