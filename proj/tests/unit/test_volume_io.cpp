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

#include <cstring>
#include <filesystem>

#include <gtest/gtest.h>

#include "arhnet/error.hpp"
#include "arhnet/rng.hpp"
#include "arhnet/volume_io.hpp"
#include "scratch.hpp"

namespace arhnet {
namespace {

namespace fs = std::filesystem;
using testing::read_bytes;
using testing::scratch_dir;
using testing::write_bytes;

const fs::path kData = ARHNET_TEST_DATA_DIR;

Volume3D random_volume(std::uint64_t seed, Dims3 dims) {
  Rng rng(seed);
  Volume3D v(dims, Spacing3{0.75, 1.25, 2.0});
  for (float& x : v.mutable_data()) x = static_cast<float>(rng.normal());
  return v;
}

TEST(Nifti, ReadsInt16FixtureWithScaling) {
  const Volume3D v = load_volume(kData / "int16_3x4x5.nii", VolumeFormat::kNifti1);
  ASSERT_EQ(v.dims(), (Dims3{3, 4, 5}));
  EXPECT_EQ(v.spacing(), (Spacing3{1.5, 2.0, 2.5}));
  for (std::int64_t x = 0; x < 3; ++x)
    for (std::int64_t y = 0; y < 4; ++y)
      for (std::int64_t z = 0; z < 5; ++z) EXPECT_EQ(v.at(x, y, z), 0.5f * static_cast<float>(x + 10 * y + 100 * z) + 1.0f);
  ASSERT_TRUE(v.affine().has_value());
  EXPECT_EQ((*v.affine())[0], 1.5);
  EXPECT_EQ((*v.affine())[3], -10.0);
  EXPECT_EQ((*v.affine())[11], -30.0);
  EXPECT_EQ((*v.affine())[15], 1.0);
}

TEST(Nifti, TruncatedPayloadIsFormatError) {
  EXPECT_THROW(load_volume(kData / "truncated.nii"), FormatError);
}

TEST(Nifti, BadMagicNamesField) {
  try {
    load_volume(kData / "bad_magic.nii");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(Nifti, UnsupportedDatatype) {
  const fs::path dir = scratch_dir("nifti_dtype");
  std::string bytes = read_bytes(kData / "int16_3x4x5.nii");
  const std::int16_t uint8_code = 2;
  std::memcpy(bytes.data() + 70, &uint8_code, 2);
  write_bytes(dir / "u8.nii", bytes);
  EXPECT_THROW(load_volume(dir / "u8.nii"), UnsupportedFormatError);
}

TEST(Nifti, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("nifti_rt");
  Volume3D v = random_volume(1, Dims3{8, 8, 8});
  v.set_affine(Affine{0.75, 0, 0, 1, 0, 1.25, 0, 2, 0, 0, 2, 3, 0, 0, 0, 1});
  save_volume(v, dir / "v.nii");
  EXPECT_EQ(load_volume(dir / "v.nii"), v);
}

TEST(Nifti, ZeroFloatVolumeFromSavedHeader) {
  const fs::path dir = scratch_dir("nifti_zero");
  save_volume(Volume3D(Dims3{4, 4, 4}), dir / "z.nii");
  const std::string bytes = read_bytes(dir / "z.nii");
  std::int32_t sizeof_hdr = 0;
  std::memcpy(&sizeof_hdr, bytes.data(), 4);
  EXPECT_EQ(sizeof_hdr, 348);
  EXPECT_EQ(std::memcmp(bytes.data() + 344, "n+1\0", 4), 0);
  const Volume3D v = load_volume(dir / "z.nii");
  EXPECT_EQ(v.size(), 64);
  for (float x : v.data()) EXPECT_EQ(x, 0.0f);
}

TEST(RawF32, ReadsSidecarAndBlob) {
  const fs::path dir = scratch_dir("raw_read");
  write_bytes(dir / "a.json", R"({"dims":[2,2,2],"spacing":[1,1,1]})");
  std::string blob(32, '\0');
  for (int i = 0; i < 8; ++i) {
    const float f = static_cast<float>(i) * 0.25f;
    std::memcpy(blob.data() + 4 * i, &f, 4);
  }
  write_bytes(dir / "a.bin", blob);
  const Volume3D v = load_volume(dir / "a.json");
  ASSERT_EQ(v.dims(), (Dims3{2, 2, 2}));
  for (int i = 0; i < 8; ++i) EXPECT_EQ(v.data()[i], static_cast<float>(i) * 0.25f);
}

TEST(RawF32, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("raw_rt");
  const Volume3D v = random_volume(2, Dims3{8, 8, 8});
  save_volume(v, dir / "v", VolumeFormat::kRawF32);
  EXPECT_EQ(load_volume(dir / "v.json", VolumeFormat::kRawF32), v);
}

TEST(RawF32, ShortBlobIsFormatError) {
  const fs::path dir = scratch_dir("raw_short");
  write_bytes(dir / "a.json", R"({"dims":[2,2,2],"spacing":[1,1,1]})");
  write_bytes(dir / "a.bin", std::string(12, '\0'));
  EXPECT_THROW(load_volume(dir / "a.json"), FormatError);
}

TEST(VolumeIo, UnwritablePathIsIoError) {
  EXPECT_THROW(save_volume(Volume3D(Dims3{2, 2, 2}), "/nonexistent_dir_arhnet/x.nii"), IoError);
  EXPECT_THROW(load_volume("/nonexistent_dir_arhnet/x.nii"), IoError);
}

TEST(VolumeIo, MaskRoundTrip) {
  const fs::path dir = scratch_dir("mask_rt");
  Mask3D m(Dims3{3, 4, 5});
  m.set(0, 1, 2, true);
  m.set(2, 3, 4, true);
  save_mask(m, dir / "m.nii");
  EXPECT_EQ(load_mask(dir / "m.nii"), m);
}

}  // namespace
}  // namespace arhnet
