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

#include <gtest/gtest.h>

#include "arhnet/checkpoint.hpp"
#include "arhnet/error.hpp"
#include "arhnet/training.hpp"
#include "scratch.hpp"

namespace arhnet {
namespace {

using testing::read_bytes;
using testing::scratch_dir;
using testing::write_bytes;

TrainConfig tiny_config() {
  TrainConfig c = preset("desk");
  c.base_channels = 4;
  c.d_base_channels = 4;
  c.d_layers = 2;
  return c;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const auto dir = scratch_dir("ckpt_rt");
  Model model(tiny_config());
  model.init(3);
  model.iteration = 17;
  save_checkpoint(to_checkpoint(model), dir / "a.arhf");
  const CheckpointData loaded = load_checkpoint(dir / "a.arhf");
  save_checkpoint(loaded, dir / "b.arhf");
  EXPECT_EQ(read_bytes(dir / "a.arhf"), read_bytes(dir / "b.arhf"));

  const auto restored = model_from_checkpoint(loaded);
  EXPECT_EQ(restored->iteration, 17);
  const auto& a = model.g.params().entries();
  const auto& b = restored->g.params().entries();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(std::memcmp(a[i].tensor.values().data(), b[i].tensor.values().data(), a[i].tensor.values().size_bytes()), 0);
  }
}

TEST(Checkpoint, HeaderLayout) {
  const auto dir = scratch_dir("ckpt_layout");
  CheckpointData data;
  data.metadata = "{}";
  data.buffers.push_back({"x", {1.0f, 2.0f}});
  save_checkpoint(data, dir / "c.arhf");
  const std::string bytes = read_bytes(dir / "c.arhf");
  EXPECT_EQ(bytes.substr(0, 4), "ARHF");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  EXPECT_EQ(version, kCheckpointVersion);
  // magic, version, meta length, meta, count, name length, name, value count, values
  EXPECT_EQ(bytes.size(), 4u + 4 + 8 + 2 + 4 + 4 + 1 + 8 + 8);
  EXPECT_EQ(load_checkpoint(dir / "c.arhf").find("x").values, (std::vector<float>{1.0f, 2.0f}));
  EXPECT_THROW(load_checkpoint(dir / "c.arhf").find("y"), FormatError);
}

TEST(Checkpoint, CorruptMagicVersionAndTruncation) {
  const auto dir = scratch_dir("ckpt_bad");
  CheckpointData data;
  data.metadata = "{}";
  data.buffers.push_back({"x", {1.0f, 2.0f, 3.0f}});
  save_checkpoint(data, dir / "ok.arhf");
  const std::string good = read_bytes(dir / "ok.arhf");

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_bytes(dir / "magic.arhf", bad_magic);
  EXPECT_THROW(load_checkpoint(dir / "magic.arhf"), FormatError);

  std::string bad_version = good;
  const std::uint32_t v = kCheckpointVersion + 1;
  std::memcpy(bad_version.data() + 4, &v, 4);
  write_bytes(dir / "version.arhf", bad_version);
  EXPECT_THROW(load_checkpoint(dir / "version.arhf"), UnsupportedFormatError);

  write_bytes(dir / "short.arhf", good.substr(0, good.size() - 3));
  EXPECT_THROW(load_checkpoint(dir / "short.arhf"), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.arhf"), IoError);
}

}  // namespace
}  // namespace arhnet
