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

#include <cstdlib>

#include <gtest/gtest.h>

#include "arhnet/augment.hpp"
#include "arhnet/error.hpp"
#include "scalar_oracles.hpp"

namespace arhnet {
namespace {

bool in_box(const Dims3& d, std::int64_t i, std::int64_t j, std::int64_t k) {
  return i >= 0 && j >= 0 && k >= 0 && i < d.h && j < d.w && k < d.d;
}

// Every voxel within L1 distance r, including positions outside the grid.
template <typename Fn>
void for_ball(std::int64_t i, std::int64_t j, std::int64_t k, int r, Fn fn) {
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = -r; c <= r; ++c)
        if (std::abs(a) + std::abs(b) + std::abs(c) <= r) fn(i + a, j + b, k + c);
}

Mask3D brute_dilate(const Mask3D& m, int r) {
  const Dims3& d = m.dims();
  Mask3D out(d);
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        bool hit = false;
        for_ball(i, j, k, r, [&](std::int64_t a, std::int64_t b, std::int64_t c) {
          hit = hit || (in_box(d, a, b, c) && m.at(a, b, c));
        });
        out.set(i, j, k, hit);
      }
  return out;
}

Mask3D brute_erode(const Mask3D& m, int r) {
  const Dims3& d = m.dims();
  Mask3D out(d);
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        bool all = true;
        for_ball(i, j, k, r, [&](std::int64_t a, std::int64_t b, std::int64_t c) {
          all = all && in_box(d, a, b, c) && m.at(a, b, c);
        });
        out.set(i, j, k, all);
      }
  return out;
}

TEST(SamplePerturbation, DeterministicAndInRange) {
  Rng a(17), b(17);
  const Perturbation pa = sample_perturbation(a);
  const Perturbation pb = sample_perturbation(b);
  EXPECT_EQ(pa.alpha, pb.alpha);
  EXPECT_EQ(pa.lambda, pb.lambda);

  Rng rng(1);
  double sum = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Perturbation p = sample_perturbation(rng);
    EXPECT_GE(p.alpha, -0.3);
    EXPECT_LE(p.alpha, 0.3);
    EXPECT_GE(p.lambda, -0.3);
    EXPECT_LE(p.lambda, 0.3);
    sum += p.alpha;
  }
  EXPECT_NEAR(sum / 10000.0, 0.0, 0.02);
}

TEST(PerturbForeground, Examples) {
  Volume3D v(Dims3{1, 1, 3}, std::vector<float>{0.5f, 0.5f, 0.9f});
  Mask3D m(Dims3{1, 1, 3}, {1, 0, 1});
  const Volume3D a = perturb_foreground(v, m, {0.2, 0.1});
  EXPECT_NEAR(a.at(0, 0, 0), 0.7f, 1e-6);
  EXPECT_EQ(a.at(0, 0, 1), 0.5f);
  const Volume3D b = perturb_foreground(v, m, {0.3, 0.3});
  EXPECT_EQ(b.at(0, 0, 2), 1.0f);
}

TEST(PerturbForeground, ZeroIsIdentityAndBackgroundUntouched) {
  Rng rng(4);
  Volume3D v(Dims3{6, 5, 4});
  for (float& x : v.mutable_data()) x = static_cast<float>(rng.uniform());
  const Mask3D m = oracle::random_mask3(rng, v.dims(), 0.3);
  EXPECT_EQ(perturb_foreground(v, m, {0.0, 0.0}), v);
  const Volume3D p = perturb_foreground(v, m, {-0.25, 0.2});
  for (std::int64_t i = 0; i < v.size(); ++i) {
    if (!m.data()[i]) EXPECT_EQ(p.data()[i], v.data()[i]);
  }
}

TEST(PerturbForeground, DimsMismatchThrows) {
  EXPECT_THROW(perturb_foreground(Volume3D(Dims3{2, 2, 2}), Mask3D(Dims3{2, 2, 3}), {0.1, 0.1}), PreconditionError);
}

TEST(Boundary, SingleVoxelRadiusOne) {
  Mask3D m(Dims3{5, 5, 5});
  m.set(2, 2, 2, true);
  const Mask3D b = extract_boundary(m, 1);
  EXPECT_EQ(b.count(), 7);
  EXPECT_TRUE(b.at(2, 2, 2));
  EXPECT_TRUE(b.at(1, 2, 2));
  EXPECT_TRUE(b.at(2, 2, 3));
  EXPECT_FALSE(b.at(1, 1, 2));
}

TEST(Boundary, FullVolumeGivesOuterShell) {
  Mask3D m(Dims3{5, 5, 5});
  for (auto& x : m.mutable_data()) x = 1;
  const Mask3D b = extract_boundary(m, 1);
  EXPECT_EQ(b.count(), 125 - 27);
  EXPECT_FALSE(b.at(2, 2, 2));
  EXPECT_TRUE(b.at(0, 3, 3));
}

TEST(Boundary, EmptyMaskGivesEmptyBand) {
  EXPECT_TRUE(extract_boundary(Mask3D(Dims3{4, 4, 4}), 2).empty());
}

TEST(Boundary, MatchesBruteForceMorphology) {
  Rng rng(9);
  for (int trial = 0; trial < 12; ++trial) {
    const Dims3 d{static_cast<std::int64_t>(3 + rng.uniform_index(5)), static_cast<std::int64_t>(3 + rng.uniform_index(5)),
                  static_cast<std::int64_t>(3 + rng.uniform_index(5))};
    const Mask3D m = oracle::random_mask3(rng, d, rng.uniform(0.1, 0.8));
    for (int r = 1; r <= 3; ++r) {
      const Mask3D dil = brute_dilate(m, r);
      const Mask3D ero = brute_erode(m, r);
      EXPECT_EQ(dilate(m, r), dil);
      EXPECT_EQ(erode(m, r), ero);
      Mask3D band(d);
      for (std::int64_t i = 0; i < d.count(); ++i) band.mutable_data()[i] = dil.data()[i] && !ero.data()[i];
      EXPECT_EQ(extract_boundary(m, r), band);
    }
  }
}

TEST(CopyPaste, SingleVoxelDonor) {
  Volume3D host(Dims3{6, 6, 6});
  for (float& x : host.mutable_data()) x = 0.3f;
  Mask3D host_mask(Dims3{6, 6, 6});
  Volume3D donor(Dims3{4, 4, 4});
  Mask3D donor_mask(Dims3{4, 4, 4});
  donor.at(1, 2, 3) = 0.8f;
  donor_mask.set(1, 2, 3, true);
  Rng rng(2);
  const Composite c = copy_paste(host, host_mask, donor, donor_mask, PlacementPolicy{}, rng);
  int changed = 0;
  for (std::int64_t i = 0; i < host.size(); ++i) changed += c.image.data()[i] != host.data()[i];
  EXPECT_EQ(changed, 1);
  EXPECT_EQ(c.mask.count(), 1);
  EXPECT_EQ(c.image.at(c.offset[0], c.offset[1], c.offset[2]), 0.8f);
}

TEST(CopyPaste, FullHostMaskFailsWithoutOverlap) {
  Volume3D host(Dims3{4, 4, 4});
  Mask3D host_mask(Dims3{4, 4, 4});
  for (auto& x : host_mask.mutable_data()) x = 1;
  Mask3D donor_mask(Dims3{4, 4, 4});
  donor_mask.set(0, 0, 0, true);
  Rng rng(0);
  PlacementPolicy policy;
  policy.max_attempts = 20;
  EXPECT_THROW(copy_paste(host, host_mask, host, donor_mask, policy, rng), PlacementError);
  policy.allow_overlap = true;
  EXPECT_NO_THROW(copy_paste(host, host_mask, host, donor_mask, policy, rng));
}

TEST(CopyPaste, DeterministicAndRespectsRegion) {
  Rng init(3);
  Volume3D host(Dims3{10, 10, 10});
  for (float& x : host.mutable_data()) x = static_cast<float>(init.uniform());
  Mask3D host_mask(Dims3{10, 10, 10});
  host_mask.set(1, 1, 1, true);
  Volume3D donor(Dims3{8, 8, 8});
  for (float& x : donor.mutable_data()) x = static_cast<float>(init.uniform());
  Mask3D donor_mask(Dims3{8, 8, 8});
  donor_mask.set(3, 3, 3, true);
  donor_mask.set(4, 3, 3, true);
  donor_mask.set(4, 4, 3, true);
  Mask3D region(Dims3{10, 10, 10});
  for (std::int64_t i = 4; i < 10; ++i)
    for (std::int64_t j = 4; j < 10; ++j)
      for (std::int64_t k = 4; k < 10; ++k) region.set(i, j, k, true);
  PlacementPolicy policy;
  policy.host_region = region;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng a(seed), b(seed);
    const Composite ca = copy_paste(host, host_mask, donor, donor_mask, policy, a);
    const Composite cb = copy_paste(host, host_mask, donor, donor_mask, policy, b);
    EXPECT_EQ(ca.offset, cb.offset);
    EXPECT_EQ(ca.image, cb.image);
    EXPECT_EQ(ca.mask.count(), 4);
    EXPECT_TRUE(ca.mask.at(1, 1, 1));
    for (std::int64_t i = 0; i < 10; ++i)
      for (std::int64_t j = 0; j < 10; ++j)
        for (std::int64_t k = 0; k < 10; ++k) {
          const bool pasted = ca.mask.at(i, j, k) && !host_mask.at(i, j, k);
          if (pasted) {
            EXPECT_TRUE(region.at(i, j, k));
            EXPECT_EQ(ca.image.at(i, j, k), donor.at(i - ca.offset[0] + 3, j - ca.offset[1] + 3, k - ca.offset[2] + 3));
          } else {
            EXPECT_EQ(ca.image.at(i, j, k), host.at(i, j, k));
          }
        }
  }
}

}  // namespace
}  // namespace arhnet
