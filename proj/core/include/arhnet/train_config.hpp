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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arhnet/arh_norm.hpp"
#include "arhnet/losses.hpp"
#include "arhnet/networks.hpp"
#include "arhnet/optim.hpp"

namespace arhnet {

struct TrainConfig {
  std::string data_dir;
  std::string out_dir = "run";
  /// Optional held-out set scored by fPSNR in the log.
  std::string probe_dir;
  /// Checkpoint to continue from.
  std::string resume;
  bool normalize = false;

  std::uint64_t seed = 0;
  /// Total iterations; 0 derives the count from `epochs`.
  std::int64_t iterations = 0;
  std::int64_t epochs = 100;
  std::int64_t batch_size = 2;
  std::int64_t patch_size = 16;

  double lr_g = 1e-4;
  double lr_d = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  LossWeights weights;
  LossReduction loss_reduction = LossReduction::kMean;
  HingeConvention hinge_convention = HingeConvention::kStandard;
  int boundary_radius = 2;

  NormKind norm_kind = NormKind::kArh;
  StatsMode stats_mode = StatsMode::kMasked;
  int levels = 3;
  int base_channels = 8;
  bool mask_input = true;
  int d_layers = 4;
  int d_base_channels = 16;

  std::int64_t checkpoint_every = 100;
  std::int64_t probe_every = 100;

  GeneratorConfig generator() const;
  DiscriminatorConfig discriminator() const;
  AdamWConfig optimizer_g() const;
  AdamWConfig optimizer_d() const;
};

/// "desk" (patch 16, base 8, batch 2) or "full" (patch 64, base 16,
/// batch 16, 200 epochs).
TrainConfig preset(std::string_view name);

/// Sets one field from its text form. Throws PreconditionError on unknown
/// keys or malformed values. The key "preset" resets every field.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment.
TrainConfig parse_train_config(std::string_view text, const TrainConfig& base = preset("desk"));
TrainConfig load_train_config(const std::filesystem::path& path, const TrainConfig& base = preset("desk"));

/// All fields as (key, value) pairs in declaration order.
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config);
std::string to_text(const TrainConfig& config);

/// Throws PreconditionError when a field is out of range.
void validate(const TrainConfig& config);

}  // namespace arhnet
