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

#include "arhnet/augment.hpp"

#include <algorithm>

#include "arhnet/error.hpp"

namespace arhnet {

Perturbation sample_perturbation(Rng& rng) {
  Perturbation p;
  p.alpha = rng.uniform(-kPerturbationRange, kPerturbationRange);
  p.lambda = rng.uniform(-kPerturbationRange, kPerturbationRange);
  return p;
}

Volume3D perturb_foreground(const Volume3D& image, const Mask3D& mask, const Perturbation& p) {
  if (!(image.dims() == mask.dims())) {
    throw PreconditionError("perturb_foreground: image " + image.dims().str() + " vs mask " + mask.dims().str());
  }
  Volume3D out = image;
  auto dst = out.mutable_data();
  auto m = mask.data();
  const double gain = 1.0 + p.alpha;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!m[i]) continue;
    const double v = gain * static_cast<double>(dst[i]) + p.lambda;
    dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

namespace {

constexpr std::int64_t kNeighbors[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

Mask3D morph_step(const Mask3D& m, bool dilation) {
  const Dims3& d = m.dims();
  Mask3D out(d);
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        bool value = m.at(i, j, k);
        for (const auto& n : kNeighbors) {
          const std::int64_t a = i + n[0], b = j + n[1], c = k + n[2];
          const bool inside = a >= 0 && a < d.h && b >= 0 && b < d.w && c >= 0 && c < d.d;
          const bool neighbor = inside && m.at(a, b, c);
          value = dilation ? (value || neighbor) : (value && neighbor);
        }
        out.set(i, j, k, value);
      }
  return out;
}

}  // namespace

Mask3D dilate(const Mask3D& m, int radius) {
  if (radius < 0) throw PreconditionError("dilate: radius must be >= 0");
  Mask3D out = m;
  for (int r = 0; r < radius; ++r) out = morph_step(out, true);
  return out;
}

Mask3D erode(const Mask3D& m, int radius) {
  if (radius < 0) throw PreconditionError("erode: radius must be >= 0");
  Mask3D out = m;
  for (int r = 0; r < radius; ++r) out = morph_step(out, false);
  return out;
}

Mask3D extract_boundary(const Mask3D& m, int radius) {
  if (radius < 1) throw PreconditionError("extract_boundary: radius must be >= 1");
  const Mask3D outer = dilate(m, radius);
  const Mask3D inner = erode(m, radius);
  Mask3D band(m.dims());
  auto dst = band.mutable_data();
  auto o = outer.data();
  auto in = inner.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (o[i] && !in[i]) ? 1 : 0;
  return band;
}

Composite copy_paste(const Volume3D& host, const Mask3D& host_mask, const Volume3D& donor, const Mask3D& donor_mask,
                     const PlacementPolicy& policy, Rng& rng) {
  if (!(host.dims() == host_mask.dims())) throw PreconditionError("copy_paste: host image/mask dims differ");
  if (!(donor.dims() == donor_mask.dims())) throw PreconditionError("copy_paste: donor image/mask dims differ");
  if (policy.max_attempts < 1) throw PreconditionError("copy_paste: max_attempts must be >= 1");
  if (policy.host_region && !(policy.host_region->dims() == host.dims())) {
    throw PreconditionError("copy_paste: host_region dims differ from host");
  }
  const auto box = bounding_box(donor_mask);
  if (!box) throw PreconditionError("copy_paste: donor mask is empty");
  const Dims3& hd = host.dims();
  Index3 span{};
  for (int a = 0; a < 3; ++a) {
    if (box->extent(a) > hd[a]) {
      throw PreconditionError("copy_paste: donor lesion bounding box does not fit host " + hd.str());
    }
    span[a] = hd[a] - box->extent(a) + 1;
  }

  std::vector<Index3> lesion;
  for (std::int64_t i = box->lo[0]; i < box->hi[0]; ++i)
    for (std::int64_t j = box->lo[1]; j < box->hi[1]; ++j)
      for (std::int64_t k = box->lo[2]; k < box->hi[2]; ++k)
        if (donor_mask.at(i, j, k)) lesion.push_back({i - box->lo[0], j - box->lo[1], k - box->lo[2]});

  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    Index3 t{};
    for (int a = 0; a < 3; ++a) t[a] = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(span[a])));
    bool ok = true;
    for (const auto& p : lesion) {
      const std::int64_t i = t[0] + p[0], j = t[1] + p[1], k = t[2] + p[2];
      if (policy.host_region && !policy.host_region->at(i, j, k)) ok = false;
      if (!policy.allow_overlap && host_mask.at(i, j, k)) ok = false;
      if (!ok) break;
    }
    if (!ok) continue;

    Composite out{host, host_mask, t};
    for (const auto& p : lesion) {
      const std::int64_t i = t[0] + p[0], j = t[1] + p[1], k = t[2] + p[2];
      out.image.at(i, j, k) = donor.at(box->lo[0] + p[0], box->lo[1] + p[1], box->lo[2] + p[2]);
      out.mask.set(i, j, k, true);
    }
    return out;
  }
  throw PlacementError("copy_paste: no valid placement within " + std::to_string(policy.max_attempts) + " attempts");
}

}  // namespace arhnet
