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

#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "arhnet/cli.hpp"
#include "arhnet/error.hpp"
#include "arhnet/synth.hpp"
#include "arhnet/volume_io.hpp"
#include "scratch.hpp"

namespace arhnet {
namespace {

namespace fs = std::filesystem;
using testing::read_bytes;
using testing::scratch_dir;

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

Volume3D ramp(const Dims3& d) {
  Volume3D v(d);
  auto data = v.mutable_data();
  for (std::size_t n = 0; n < data.size(); ++n) data[n] = static_cast<float>(n) / static_cast<float>(data.size() - 1);
  return v;
}

Mask3D centre_mask(const Dims3& d) {
  Mask3D m(d);
  m.set(d.h / 2, d.w / 2, d.d / 2, true);
  m.set(d.h / 2 - 1, d.w / 2, d.d / 2, true);
  return m;
}

TEST(Cli, PerturbIdentityKeepsBytes) {
  const fs::path dir = scratch_dir("cli_perturb");
  const Dims3 d{6, 6, 6};
  save_volume(ramp(d), dir / "img.nii");
  save_mask(centre_mask(d), dir / "mask.nii");
  const auto r = run({"perturb", "--image", (dir / "img.nii").string(), "--mask", (dir / "mask.nii").string(),
                      "--out", (dir / "out.nii").string(), "--alpha", "0", "--lambda", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(load_volume(dir / "out.nii"), load_volume(dir / "img.nii"));
}

TEST(Cli, PerturbScalesForegroundOnly) {
  const fs::path dir = scratch_dir("cli_perturb_scale");
  const Dims3 d{6, 6, 6};
  const Volume3D img = ramp(d);
  const Mask3D m = centre_mask(d);
  save_volume(img, dir / "img.nii");
  save_mask(m, dir / "mask.nii");
  const auto r = run({"perturb", "--image", (dir / "img.nii").string(), "--mask", (dir / "mask.nii").string(),
                      "--out", (dir / "out.nii").string(), "--alpha", "-0.5", "--lambda", "0.1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Volume3D out = load_volume(dir / "out.nii");
  for (std::int64_t n = 0; n < img.size(); ++n) {
    const float want = m.data()[n] ? 0.5f * img.data()[n] + 0.1f : img.data()[n];
    EXPECT_FLOAT_EQ(out.data()[n], want);
  }
}

TEST(Cli, SliceExportWritesPgm) {
  const fs::path dir = scratch_dir("cli_slice");
  Volume3D v(Dims3{4, 4, 4});
  v.at(2, 1, 3) = 1.0f;
  v.at(2, 0, 0) = 0.5f;
  save_volume(v, dir / "v.nii");
  const auto r = run({"slice-export", "--image", (dir / "v.nii").string(), "--axis", "x", "--index", "2", "--out",
                      (dir / "s.pgm").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string pgm = read_bytes(dir / "s.pgm");
  const std::string header = "P5\n4 4\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 16);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  const auto px = [&](int row, int col) { return static_cast<unsigned char>(pgm[header.size() + row * 4 + col]); };
  EXPECT_EQ(px(1, 3), 255);
  EXPECT_EQ(px(0, 0), 128);
  EXPECT_EQ(px(3, 3), 0);
  EXPECT_EQ(pgm, slice_pgm(v, 'x', 2));
}

TEST(Cli, SlicePgmRejectsBadIndex) {
  Volume3D v(Dims3{4, 4, 4});
  EXPECT_THROW(slice_pgm(v, 'z', 4), PreconditionError);
  EXPECT_THROW(slice_pgm(v, 'q', 0), PreconditionError);
}

TEST(Cli, EvalOnIdenticalDirectories) {
  const fs::path dir = scratch_dir("cli_eval");
  const Dims3 d{6, 6, 6};
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "masks");
  save_volume(ramp(d), dir / "gt" / "a.nii");
  save_mask(centre_mask(d), dir / "masks" / "a.nii");
  const auto r = run({"eval", "--pred-dir", (dir / "gt").string(), "--gt-dir", (dir / "gt").string(), "--mask-dir",
                      (dir / "masks").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out,
            "case,mae,fmae,psnr,fpsnr\n"
            "a.nii,0.000000,0.000000,99.000000,99.000000\n"
            "mean,0.000000,0.000000,99.000000,99.000000\n");
}

TEST(Cli, HarmonizeIdentityAndHm) {
  const fs::path dir = scratch_dir("cli_harmonize");
  const Dims3 d{8, 8, 8};
  save_volume(ramp(d), dir / "img.nii");
  save_mask(centre_mask(d), dir / "mask.nii");
  for (const std::string method : {"identity", "hm"}) {
    const auto r = run({"harmonize", "--method", method, "--image", (dir / "img.nii").string(), "--mask",
                        (dir / "mask.nii").string(), "--out", (dir / (method + ".nii")).string(), "--context-radius",
                        "2"});
    ASSERT_EQ(r.code, kExitOk) << method << ": " << r.err;
  }
  EXPECT_EQ(load_volume(dir / "identity.nii"), load_volume(dir / "img.nii"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli_exit");
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"no-such-command"}).code, kExitUsage);
  EXPECT_EQ(run({"perturb", "--image", "x"}).code, kExitUsage);
  EXPECT_EQ(run({"harmonize", "--method", "model", "--image", "a", "--mask", "b", "--out", "c"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);

  const auto missing = run({"slice-export", "--image", (dir / "missing.nii").string(), "--index", "0", "--out",
                            (dir / "s.pgm").string()});
  EXPECT_EQ(missing.code, kExitData);
  EXPECT_FALSE(missing.err.empty());

  const Dims3 d{6, 6, 6};
  save_volume(ramp(d), dir / "img.nii");
  save_mask(Mask3D(Dims3{5, 5, 5}), dir / "small.nii");
  EXPECT_EQ(run({"harmonize", "--method", "hm", "--image", (dir / "img.nii").string(), "--mask",
                 (dir / "small.nii").string(), "--out", (dir / "o.nii").string()})
                .code,
            kExitData);
}

TEST(Cli, NonFiniteTrainingExitsNumeric) {
  const fs::path dir = scratch_dir("cli_numeric");
  write_synth_dataset(dir / "data", SynthOptions{2, 0, 16, 3});
  for (const auto& p : fs::directory_iterator(dir / "data" / "train" / "images")) {
    Volume3D v = load_volume(p.path());
    for (float& x : v.mutable_data()) x = std::numeric_limits<float>::quiet_NaN();
    save_volume(v, p.path());
  }
  const auto r = run({"train", "--override", "data_dir=" + (dir / "data" / "train").string(), "--override",
                      "out_dir=" + (dir / "run").string(), "--override", "normalize=false", "--override",
                      "iterations=2", "--override", "patch_size=8", "--override", "base_channels=4", "--override",
                      "d_base_channels=4", "--override", "d_layers=2", "--override", "batch_size=1"});
  EXPECT_EQ(r.code, kExitNumeric) << r.err;
  EXPECT_NE(r.err.find("non-finite"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace arhnet
