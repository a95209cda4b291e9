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

#include "arhnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arhnet/error.hpp"

namespace arhnet {

namespace {

void check_dims(const Dims3& a, const Dims3& b, const Mask3D* region, const char* op) {
  if (!(a == b) || (region && !(region->dims() == a))) throw PreconditionError(std::string(op) + ": dims differ");
}

// Sum of f(a_i, b_i) over region voxels, and the voxel count.
template <typename F>
std::pair<double, std::int64_t> region_sum(const Volume3D& a, const Volume3D& b, const Mask3D* region, F f) {
  auto x = a.data();
  auto y = b.data();
  double acc = 0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (region && !region->data()[i]) continue;
    acc += f(static_cast<double>(x[i]) - static_cast<double>(y[i]));
    ++n;
  }
  if (n == 0) throw DegenerateRegionError("metric region is empty");
  return {acc, n};
}

}  // namespace

double mae(const Volume3D& a, const Volume3D& b, const Mask3D* region) {
  check_dims(a.dims(), b.dims(), region, "mae");
  const auto [s, n] = region_sum(a, b, region, [](double d) { return std::abs(d); });
  return s / static_cast<double>(n);
}

double psnr(const Volume3D& a, const Volume3D& b, const Mask3D* region, double peak, double cap) {
  check_dims(a.dims(), b.dims(), region, "psnr");
  const auto [s, n] = region_sum(a, b, region, [](double d) { return d * d; });
  const double mse = s / static_cast<double>(n);
  if (mse == 0) return cap;
  return std::min(cap, 10.0 * std::log10(peak * peak / mse));
}

HarmonizationReport harmonization_report(const Volume3D& truth, const Volume3D& output, const Mask3D& mask) {
  return {mae(truth, output), mae(truth, output, &mask), psnr(truth, output), psnr(truth, output, &mask)};
}

double dice(const Mask3D& a, const Mask3D& b) {
  if (!(a.dims() == b.dims())) throw PreconditionError("dice: dims differ");
  std::int64_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const bool x = a.data()[i], y = b.data()[i];
    inter += x && y;
    na += x;
    nb += y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

Mask3D surface_voxels(const Mask3D& m) {
  const Dims3& d = m.dims();
  Mask3D out(d);
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        if (!m.at(i, j, k)) continue;
        const bool border = i == 0 || j == 0 || k == 0 || i == d.h - 1 || j == d.w - 1 || k == d.d - 1;
        const bool surface = border || !m.at(i - 1, j, k) || !m.at(i + 1, j, k) || !m.at(i, j - 1, k) ||
                             !m.at(i, j + 1, k) || !m.at(i, j, k - 1) || !m.at(i, j, k + 1);
        out.set(i, j, k, surface);
      }
  return out;
}

namespace {

// One-dimensional squared distance transform of f with sample spacing s.
void dt_1d(const double* f, double* out, std::int64_t n, double s, std::vector<std::int64_t>& v, std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double s2 = s * s;
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (k >= 0) {
      const std::int64_t p = v[k];
      const double x = ((f[q] + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p));
      if (x <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : ((f[q] + s2 * q * q) - (f[v[k - 1]] + s2 * v[k - 1] * v[k - 1])) / (2.0 * s2 * (q - v[k - 1]));
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill_n(out, n, kInf);
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (z[j + 1] < static_cast<double>(q)) ++j;
    const double dq = static_cast<double>(q - v[j]) * s;
    out[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const Mask3D& sites, const Spacing3& spacing) {
  const Dims3& d = sites.dims();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(d.count()));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = sites.data()[i] ? 0.0 : kInf;
  const std::int64_t n_max = std::max({d.h, d.w, d.d});
  std::vector<double> in(static_cast<std::size_t>(n_max)), out(static_cast<std::size_t>(n_max));
  std::vector<std::int64_t> v(static_cast<std::size_t>(n_max));
  std::vector<double> z(static_cast<std::size_t>(n_max) + 1);
  const std::int64_t ext[3] = {d.h, d.w, d.d};
  const std::int64_t stride[3] = {d.w * d.d, d.d, 1};
  // Axis order k, j, i.
  for (int axis = 2; axis >= 0; --axis) {
    const std::int64_t n = ext[axis];
    const std::int64_t st = stride[axis];
    for (std::int64_t base = 0; base < d.count(); ++base) {
      if ((base / st) % n != 0) continue;  // visit each line once, from its first voxel
      for (std::int64_t q = 0; q < n; ++q) in[q] = g[base + q * st];
      dt_1d(in.data(), out.data(), n, spacing[axis], v, z);
      for (std::int64_t q = 0; q < n; ++q) g[base + q * st] = out[q];
    }
  }
  return g;
}

std::vector<double> surface_distances(const Mask3D& a, const Mask3D& b, const Spacing3& spacing) {
  if (!(a.dims() == b.dims())) throw PreconditionError("surface_distances: dims differ");
  if (a.empty() || b.empty()) throw DegenerateRegionError("surface distance undefined for an empty mask");
  const Mask3D sa = surface_voxels(a);
  const Mask3D sb = surface_voxels(b);
  const auto da = squared_distance_transform(sa, spacing);
  const auto db = squared_distance_transform(sb, spacing);
  std::vector<double> out;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (sa.data()[i]) out.push_back(std::sqrt(db[i]));
  }
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (sb.data()[i]) out.push_back(std::sqrt(da[i]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw DegenerateRegionError("percentile of an empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

SegmentationReport segmentation_report(const Mask3D& pred, const Mask3D& truth, const Spacing3& spacing) {
  SegmentationReport r;
  r.dice = dice(pred, truth);
  const auto dist = surface_distances(pred, truth, spacing);
  double s = 0;
  for (double x : dist) s += x;
  r.asd_mm = s / static_cast<double>(dist.size());
  r.hd95_mm = percentile(dist, 0.95);
  return r;
}

}  // namespace arhnet
