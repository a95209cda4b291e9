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

#include "arhnet/harmonize.hpp"

#include <algorithm>

#include "arhnet/augment.hpp"
#include "arhnet/convert.hpp"
#include "arhnet/error.hpp"

namespace arhnet {

Volume3D composite_identity(const Volume3D& image) { return image; }

Volume3D histogram_match(const Volume3D& image, const Mask3D& mask, const HistogramMatchOptions& options) {
  if (!(image.dims() == mask.dims())) {
    throw PreconditionError("histogram_match: image " + image.dims().str() + " vs mask " + mask.dims().str());
  }
  if (options.bins < 1) throw PreconditionError("histogram_match: bins must be >= 1");
  if (options.context_radius < 1) throw PreconditionError("histogram_match: context_radius must be >= 1");
  auto v = image.data();
  auto m = mask.data();

  std::vector<float> fg;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i]) fg.push_back(v[i]);
  }
  if (fg.empty()) throw PreconditionError("histogram_match: mask is empty");

  std::vector<float> ref;
  if (options.reference == HmReference::kShell) {
    const Mask3D shell = dilate(mask, options.context_radius);
    auto s = shell.data();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (s[i] && !m[i]) ref.push_back(v[i]);
    }
    if (ref.empty()) {
      throw PreconditionError("histogram_match: context shell of radius " + std::to_string(options.context_radius) +
                              " is empty; use a larger context radius");
    }
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!m[i]) ref.push_back(v[i]);
    }
    if (ref.empty()) throw PreconditionError("histogram_match: no background voxels to match against");
  }

  const auto [lo_it, hi_it] = std::minmax_element(ref.begin(), ref.end());
  const double lo = *lo_it, hi = *hi_it;
  const int bins = options.bins;
  const double width = (hi - lo) / bins;
  // cdf[b] = fraction of reference values in bins [0, b).
  std::vector<double> cdf(static_cast<std::size_t>(bins) + 1, 0.0);
  if (hi > lo) {
    for (float x : ref) {
      const int b = std::min(bins - 1, static_cast<int>((x - lo) / width));
      cdf[static_cast<std::size_t>(b) + 1] += 1.0;
    }
    for (int b = 1; b <= bins; ++b) cdf[b] += cdf[b - 1];
    for (auto& c : cdf) c /= static_cast<double>(ref.size());
  }
  auto quantile = [&](double level) {
    if (hi <= lo) return lo;
    const auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), level);
    const std::size_t b = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), bins)) - 1;
    const double span = cdf[b + 1] - cdf[b];
    const double t = span > 0 ? (level - cdf[b]) / span : 0.0;
    return std::clamp(lo + (static_cast<double>(b) + t) * width, lo, hi);
  };

  std::vector<float> sorted = fg;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  Volume3D out = image;
  auto dst = out.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    const auto range = std::equal_range(sorted.begin(), sorted.end(), v[i]);
    const double below = static_cast<double>(range.first - sorted.begin());
    const double equal = static_cast<double>(range.second - range.first);
    dst[i] = static_cast<float>(quantile((below + 0.5 * equal) / n));
  }
  return out;
}

namespace {

// Window starts along one axis covering [lo, hi).
std::vector<std::int64_t> window_starts(std::int64_t lo, std::int64_t hi, std::int64_t dim, std::int64_t size) {
  if (size >= dim) return {0};
  std::vector<std::int64_t> starts;
  if (hi - lo <= size) {
    starts.push_back(std::clamp((lo + hi - size) / 2, std::int64_t{0}, dim - size));
    return starts;
  }
  for (std::int64_t s = lo; s < hi; s += size) starts.push_back(std::min(s, dim - size));
  return starts;
}

}  // namespace

Volume3D harmonize_with_model(const Generator& g, const Volume3D& image, const Mask3D& mask, std::int64_t patch_size) {
  if (!(image.dims() == mask.dims())) {
    throw PreconditionError("harmonize: image " + image.dims().str() + " vs mask " + mask.dims().str());
  }
  const auto box = bounding_box(mask);
  if (!box) return image;
  const Dims3& d = image.dims();
  Index3 size{};
  std::vector<std::int64_t> starts[3];
  for (int a = 0; a < 3; ++a) {
    size[a] = std::min(patch_size, d[a]);
    starts[a] = window_starts(box->lo[a], box->hi[a], d[a], size[a]);
  }
  NoGradGuard no_grad;
  Volume3D out = image;
  Mask3D written(d);
  for (auto i0 : starts[0])
    for (auto j0 : starts[1])
      for (auto k0 : starts[2]) {
        const PatchSpec spec{{i0, j0, k0}, size};
        const Mask3D pm = crop(mask, spec);
        if (pm.empty()) continue;
        const auto result = g.forward(volume_to_tensor(crop(image, spec)), mask_to_tensor(pm));
        const Volume3D h = tensor_to_volume(result.harmonized);
        for (std::int64_t i = 0; i < size[0]; ++i)
          for (std::int64_t j = 0; j < size[1]; ++j)
            for (std::int64_t k = 0; k < size[2]; ++k) {
              if (!pm.at(i, j, k) || written.at(i0 + i, j0 + j, k0 + k)) continue;
              out.at(i0 + i, j0 + j, k0 + k) = h.at(i, j, k);
              written.set(i0 + i, j0 + j, k0 + k, true);
            }
      }
  return out;
}

}  // namespace arhnet
