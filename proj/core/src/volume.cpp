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

#include "arhnet/volume.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "arhnet/error.hpp"

namespace arhnet {

std::string Dims3::str() const {
  std::ostringstream os;
  os << h << "x" << w << "x" << d;
  return os.str();
}

namespace {

void check_dims(const Dims3& dims) {
  if (dims.h <= 0 || dims.w <= 0 || dims.d <= 0) {
    throw PreconditionError("volume dims must be positive, got " + dims.str());
  }
}

void check_spacing(const Spacing3& s) {
  if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0)) {
    throw PreconditionError("voxel spacing must be positive");
  }
}

}  // namespace

Volume3D::Volume3D(Dims3 dims, Spacing3 spacing, std::optional<Affine> affine)
    : dims_(dims), spacing_(spacing), affine_(affine) {
  check_dims(dims);
  check_spacing(spacing);
  data_.assign(static_cast<std::size_t>(dims.count()), 0.0f);
}

Volume3D::Volume3D(Dims3 dims, std::vector<float> data, Spacing3 spacing,
                   std::optional<Affine> affine)
    : dims_(dims), spacing_(spacing), affine_(affine), data_(std::move(data)) {
  check_dims(dims);
  check_spacing(spacing);
  if (static_cast<std::int64_t>(data_.size()) != dims.count()) {
    throw PreconditionError("volume data length " + std::to_string(data_.size()) +
                            " does not match dims " + dims.str());
  }
}

Mask3D::Mask3D(Dims3 dims) : dims_(dims) {
  check_dims(dims);
  data_.assign(static_cast<std::size_t>(dims.count()), 0);
}

Mask3D::Mask3D(Dims3 dims, std::vector<std::uint8_t> data) : dims_(dims), data_(std::move(data)) {
  check_dims(dims);
  if (static_cast<std::int64_t>(data_.size()) != dims.count()) {
    throw PreconditionError("mask data length does not match dims " + dims.str());
  }
  for (auto& b : data_) b = b != 0 ? 1 : 0;
}

std::int64_t Mask3D::count() const {
  return std::count(data_.begin(), data_.end(), std::uint8_t{1});
}

Volume3D normalize_intensity(const Volume3D& v) {
  if (v.size() == 0) throw PreconditionError("normalize_intensity: empty volume");
  const auto [lo_it, hi_it] = std::minmax_element(v.data().begin(), v.data().end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  Volume3D out(v.dims(), v.spacing(), v.affine());
  auto dst = out.mutable_data();
  if (hi == lo) return out;
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  auto src = v.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double x = (static_cast<double>(src[i]) - lo) / range;
    dst[i] = static_cast<float>(std::clamp(x, 0.0, 1.0));
  }
  return out;
}

Mask3D mask_from_volume(const Volume3D& v, float threshold) {
  Mask3D m(v.dims());
  auto src = v.data();
  auto dst = m.mutable_data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > threshold ? 1 : 0;
  return m;
}

Volume3D volume_from_mask(const Mask3D& m, Spacing3 spacing) {
  Volume3D v(m.dims(), spacing);
  auto dst = v.mutable_data();
  auto src = m.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  return v;
}

std::optional<BoundingBox> bounding_box(const Mask3D& m) {
  const Dims3& d = m.dims();
  BoundingBox box{{d.h, d.w, d.d}, {0, 0, 0}};
  bool any = false;
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        if (!m.at(i, j, k)) continue;
        any = true;
        const Index3 p{i, j, k};
        for (int a = 0; a < 3; ++a) {
          box.lo[a] = std::min(box.lo[a], p[a]);
          box.hi[a] = std::max(box.hi[a], p[a] + 1);
        }
      }
  if (!any) return std::nullopt;
  return box;
}

void validate_patch(const PatchSpec& spec, const Dims3& dims) {
  for (int a = 0; a < 3; ++a) {
    if (spec.origin[a] < 0 || spec.size[a] <= 0 || spec.origin[a] + spec.size[a] > dims[a]) {
      std::ostringstream os;
      os << "patch window origin (" << spec.origin[0] << "," << spec.origin[1] << ","
         << spec.origin[2] << ") size (" << spec.size[0] << "," << spec.size[1] << ","
         << spec.size[2] << ") does not fit volume " << dims.str();
      throw PreconditionError(os.str());
    }
  }
}

Volume3D crop(const Volume3D& v, const PatchSpec& spec) {
  validate_patch(spec, v.dims());
  Volume3D out(Dims3{spec.size[0], spec.size[1], spec.size[2]}, v.spacing(), v.affine());
  for (std::int64_t i = 0; i < spec.size[0]; ++i)
    for (std::int64_t j = 0; j < spec.size[1]; ++j)
      for (std::int64_t k = 0; k < spec.size[2]; ++k)
        out.at(i, j, k) = v.at(spec.origin[0] + i, spec.origin[1] + j, spec.origin[2] + k);
  return out;
}

Mask3D crop(const Mask3D& m, const PatchSpec& spec) {
  validate_patch(spec, m.dims());
  Mask3D out(Dims3{spec.size[0], spec.size[1], spec.size[2]});
  for (std::int64_t i = 0; i < spec.size[0]; ++i)
    for (std::int64_t j = 0; j < spec.size[1]; ++j)
      for (std::int64_t k = 0; k < spec.size[2]; ++k)
        out.set(i, j, k, m.at(spec.origin[0] + i, spec.origin[1] + j, spec.origin[2] + k));
  return out;
}

namespace {

// Summed-volume table with a zero border: sum over [0,i)x[0,j)x[0,k).
class MaskIntegral {
 public:
  explicit MaskIntegral(const Mask3D& m) : h_(m.dims().h + 1), w_(m.dims().w + 1), d_(m.dims().d + 1) {
    table_.assign(static_cast<std::size_t>(h_ * w_ * d_), 0);
    for (std::int64_t i = 1; i < h_; ++i)
      for (std::int64_t j = 1; j < w_; ++j)
        for (std::int64_t k = 1; k < d_; ++k) {
          table_[idx(i, j, k)] = (m.at(i - 1, j - 1, k - 1) ? 1 : 0) + table_[idx(i - 1, j, k)] +
                                 table_[idx(i, j - 1, k)] + table_[idx(i, j, k - 1)] -
                                 table_[idx(i - 1, j - 1, k)] - table_[idx(i - 1, j, k - 1)] -
                                 table_[idx(i, j - 1, k - 1)] + table_[idx(i - 1, j - 1, k - 1)];
        }
  }

  std::int64_t window_sum(const Index3& lo, const Index3& size) const {
    const std::int64_t i0 = lo[0], j0 = lo[1], k0 = lo[2];
    const std::int64_t i1 = i0 + size[0], j1 = j0 + size[1], k1 = k0 + size[2];
    return table_[idx(i1, j1, k1)] - table_[idx(i0, j1, k1)] - table_[idx(i1, j0, k1)] -
           table_[idx(i1, j1, k0)] + table_[idx(i0, j0, k1)] + table_[idx(i0, j1, k0)] +
           table_[idx(i1, j0, k0)] - table_[idx(i0, j0, k0)];
  }

 private:
  std::size_t idx(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>((i * w_ + j) * d_ + k);
  }
  std::int64_t h_, w_, d_;
  std::vector<std::int64_t> table_;
};

}  // namespace

Patch extract_patch(const Volume3D& v, const Mask3D& m, const Index3& size, Rng& rng) {
  if (!(v.dims() == m.dims())) {
    throw PreconditionError("extract_patch: volume " + v.dims().str() + " vs mask " + m.dims().str());
  }
  const Dims3& dims = v.dims();
  Index3 span{};
  for (int a = 0; a < 3; ++a) {
    if (size[a] <= 0 || size[a] > dims[a]) {
      throw PreconditionError("extract_patch: patch size exceeds volume dims " + dims.str());
    }
    span[a] = dims[a] - size[a] + 1;
  }
  const MaskIntegral integral(m);
  auto for_each_valid = [&](auto&& visit) {
    for (std::int64_t i = 0; i < span[0]; ++i)
      for (std::int64_t j = 0; j < span[1]; ++j)
        for (std::int64_t k = 0; k < span[2]; ++k) {
          const Index3 origin{i, j, k};
          if (integral.window_sum(origin, size) > 0 && visit(origin)) return;
        }
  };
  std::uint64_t valid = 0;
  for_each_valid([&](const Index3&) {
    ++valid;
    return false;
  });
  if (valid == 0) throw PreconditionError("extract_patch: mask has no foreground voxel");

  std::uint64_t target = rng.uniform_index(valid);
  PatchSpec spec{{0, 0, 0}, size};
  for_each_valid([&](const Index3& origin) {
    if (target-- == 0) {
      spec.origin = origin;
      return true;
    }
    return false;
  });
  return Patch{crop(v, spec), crop(m, spec), spec};
}

Volume3D insert_patch(const Volume3D& v, const Volume3D& patch, const PatchSpec& spec) {
  validate_patch(spec, v.dims());
  const Dims3& pd = patch.dims();
  if (pd.h != spec.size[0] || pd.w != spec.size[1] || pd.d != spec.size[2]) {
    throw PreconditionError("insert_patch: patch dims " + pd.str() + " differ from window size");
  }
  Volume3D out = v;
  for (std::int64_t i = 0; i < pd.h; ++i)
    for (std::int64_t j = 0; j < pd.w; ++j)
      for (std::int64_t k = 0; k < pd.d; ++k)
        out.at(spec.origin[0] + i, spec.origin[1] + j, spec.origin[2] + k) = patch.at(i, j, k);
  return out;
}

}  // namespace arhnet
