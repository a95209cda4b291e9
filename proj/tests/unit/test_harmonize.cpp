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

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "arhnet/error.hpp"
#include "arhnet/harmonize.hpp"
#include "arhnet/rng.hpp"

namespace arhnet {
namespace {

constexpr Dims3 kDims{12, 12, 12};

// Cube of half-width r around the centre.
Mask3D cube_mask(std::int64_t r) {
  Mask3D m(kDims);
  for (std::int64_t i = 6 - r; i < 6 + r; ++i)
    for (std::int64_t j = 6 - r; j < 6 + r; ++j)
      for (std::int64_t k = 6 - r; k < 6 + r; ++k) m.set(i, j, k, true);
  return m;
}

Volume3D random_volume(Rng& rng, double lo, double hi) {
  Volume3D v(kDims);
  for (float& x : v.mutable_data()) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

// Voxels within L1 distance r of the mask but outside it.
std::vector<float> shell_values(const Volume3D& v, const Mask3D& m, int r) {
  std::vector<float> out;
  const Dims3& d = v.dims();
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        if (m.at(i, j, k)) continue;
        bool near = false;
        for (std::int64_t a = 0; a < d.h && !near; ++a)
          for (std::int64_t b = 0; b < d.w && !near; ++b)
            for (std::int64_t c = 0; c < d.d && !near; ++c) {
              near = m.at(a, b, c) && std::abs(a - i) + std::abs(b - j) + std::abs(c - k) <= r;
            }
        if (near) out.push_back(v.at(i, j, k));
      }
  return out;
}

TEST(CompositeIdentity, SameBytes) {
  Rng rng(1);
  const Volume3D v = random_volume(rng, 0, 1);
  EXPECT_EQ(composite_identity(v), v);
  EXPECT_EQ(composite_identity(composite_identity(v)), v);
}

TEST(HistogramMatch, BackgroundBitIdentical) {
  Rng rng(2);
  Volume3D v = random_volume(rng, 0, 1);
  const Mask3D m = cube_mask(2);
  const Volume3D out = histogram_match(v, m, {.bins = 64, .context_radius = 2});
  for (std::int64_t n = 0; n < v.size(); ++n) {
    if (!m.data()[n]) EXPECT_EQ(out.data()[n], v.data()[n]);
  }
}

TEST(HistogramMatch, FixedPointWithinOneBin) {
  Rng rng(3);
  const Volume3D v = random_volume(rng, 0.2, 0.8);
  const Mask3D m = cube_mask(2);
  const HistogramMatchOptions opt{.bins = 256, .context_radius = 3};
  const auto ctx = shell_values(v, m, opt.context_radius);
  // Foreground carries context order statistics at evenly spaced levels.
  Volume3D w = v;
  auto fg_idx = std::vector<std::int64_t>{};
  for (std::int64_t n = 0; n < v.size(); ++n)
    if (m.data()[n]) fg_idx.push_back(n);
  std::vector<float> sorted_ctx = ctx;
  std::sort(sorted_ctx.begin(), sorted_ctx.end());
  for (std::size_t t = 0; t < fg_idx.size(); ++t) {
    const double level = (t + 0.5) / fg_idx.size();
    w.mutable_data()[fg_idx[t]] = sorted_ctx[static_cast<std::size_t>(level * sorted_ctx.size())];
  }
  const auto ctx_w = shell_values(w, m, opt.context_radius);
  const auto [lo_w, hi_w] = std::minmax_element(ctx_w.begin(), ctx_w.end());
  const double width_w = (*hi_w - *lo_w) / opt.bins;
  const Volume3D out_w = histogram_match(w, m, opt);
  for (auto n : fg_idx) EXPECT_NEAR(out_w.data()[n], w.data()[n], width_w + 2.0 / sorted_ctx.size()) << n;
}

TEST(HistogramMatch, ConstantForegroundMapsToContextMedian) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Volume3D v = random_volume(rng, 0, 1);
    const Mask3D m = cube_mask(2);
    for (std::int64_t n = 0; n < v.size(); ++n)
      if (m.data()[n]) v.mutable_data()[n] = 0.9f;
    const HistogramMatchOptions opt{.bins = 128, .context_radius = 2};
    const Volume3D out = histogram_match(v, m, opt);

    // Direct CDF oracle: level 1/2, histogram over [min, max] of the context,
    // first bin whose cumulative fraction reaches the level, linear inside.
    auto ctx = shell_values(v, m, opt.context_radius);
    std::sort(ctx.begin(), ctx.end());
    const double lo = ctx.front(), hi = ctx.back();
    const double width = (hi - lo) / opt.bins;
    std::vector<double> counts(opt.bins, 0.0);
    for (float x : ctx) counts[std::min(opt.bins - 1, static_cast<int>((x - lo) / width))] += 1;
    double below = 0;
    double expected = hi;
    for (int b = 0; b < opt.bins; ++b) {
      const double above = below + counts[b] / ctx.size();
      if (above >= 0.5) {
        expected = lo + (b + (0.5 - below) / (above - below)) * width;
        break;
      }
      below = above;
    }
    const double median = 0.5 * (ctx[(ctx.size() - 1) / 2] + ctx[ctx.size() / 2]);
    for (std::int64_t n = 0; n < v.size(); ++n) {
      if (!m.data()[n]) continue;
      EXPECT_NEAR(out.data()[n], expected, 1e-5);
      EXPECT_NEAR(out.data()[n], median, width);
    }
  }
}

TEST(HistogramMatch, MonotoneAndInsideContextRange) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Volume3D v = random_volume(rng, 0, 1);
    const Mask3D m = cube_mask(3);
    for (std::int64_t n = 0; n < v.size(); ++n)
      if (m.data()[n]) v.mutable_data()[n] = static_cast<float>(rng.uniform(0.5, 2.0));
    const HistogramMatchOptions opt{.bins = 32, .context_radius = 2};
    const Volume3D out = histogram_match(v, m, opt);
    const auto ctx = shell_values(v, m, opt.context_radius);
    const auto [lo, hi] = std::minmax_element(ctx.begin(), ctx.end());
    std::vector<std::pair<float, float>> pairs;
    for (std::int64_t n = 0; n < v.size(); ++n) {
      if (!m.data()[n]) continue;
      pairs.emplace_back(v.data()[n], out.data()[n]);
      EXPECT_GE(out.data()[n], *lo);
      EXPECT_LE(out.data()[n], *hi);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t t = 1; t < pairs.size(); ++t) EXPECT_LE(pairs[t - 1].second, pairs[t].second);
  }
}

TEST(HistogramMatch, BackgroundReferenceUsesAllNonMaskVoxels) {
  Rng rng(6);
  Volume3D v = random_volume(rng, 0, 1);
  const Mask3D m = cube_mask(2);
  for (std::int64_t n = 0; n < v.size(); ++n)
    if (m.data()[n]) v.mutable_data()[n] = 5.0f;
  v.at(0, 0, 0) = 3.0f;  // far from the mask, only in the global reference
  const Volume3D shell = histogram_match(v, m, {.bins = 64, .context_radius = 1});
  const Volume3D global = histogram_match(v, m, {.bins = 64, .context_radius = 1, .reference = HmReference::kBackground});
  EXPECT_NE(shell, global);
}

TEST(HistogramMatch, Errors) {
  Volume3D v(kDims);
  EXPECT_THROW(histogram_match(v, Mask3D(kDims)), PreconditionError);
  Mask3D all(kDims);
  for (auto& b : all.mutable_data()) b = 1;
  try {
    histogram_match(v, all);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("larger context radius"), std::string::npos);
  }
  EXPECT_THROW(histogram_match(v, Mask3D(Dims3{2, 2, 2})), PreconditionError);
}

}  // namespace
}  // namespace arhnet
