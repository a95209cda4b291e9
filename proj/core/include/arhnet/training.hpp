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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arhnet/augment.hpp"
#include "arhnet/checkpoint.hpp"
#include "arhnet/dataset.hpp"
#include "arhnet/networks.hpp"
#include "arhnet/optim.hpp"
#include "arhnet/train_config.hpp"

namespace arhnet {

/// Generator, discriminator and their optimizers. Not movable: the
/// optimizers refer to the networks' parameter stores.
struct Model {
  explicit Model(const TrainConfig& config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  /// Initializes both networks from `seed`.
  void init(std::uint64_t seed);

  TrainConfig config;
  Generator g;
  Discriminator d;
  AdamW opt_g;
  AdamW opt_d;
  std::int64_t iteration = 0;
};

/// One clean training sample and the perturbation applied to it.
struct TrainingPair {
  Volume3D image;
  Mask3D mask;
  Perturbation perturbation;
};

struct StepReport {
  std::int64_t iteration = 0;
  double l_rec = 0;
  double l_btv = 0;
  double l_adv_g = 0;
  double l_adv_d = 0;
  double l_total = 0;
  double grad_norm_g = 0;
  double grad_norm_d = 0;
};

/// Perturbs the batch, runs G once, updates D on the detached output, then
/// updates G on the weighted total loss. Throws NumericError on a
/// non-finite loss.
StepReport train_step(Model& model, const std::vector<TrainingPair>& batch);

/// The samples of iteration `it` (0-based): image order is shuffled per
/// epoch, and each sample's patch and perturbation come from a stream
/// derived from (seed, epoch, image index).
std::vector<TrainingPair> make_batch(const std::vector<Case>& cases, const TrainConfig& config, std::int64_t it);

std::int64_t steps_per_epoch(std::int64_t cases, const TrainConfig& config);
std::int64_t total_iterations(std::int64_t cases, const TrainConfig& config);

/// Fixed perturbation for evaluation sample `index`.
Perturbation evaluation_perturbation(std::uint64_t seed, std::int64_t index);

/// Mean foreground PSNR of model harmonization over perturbed cases.
double probe_fpsnr(const Generator& g, const std::vector<Case>& cases, std::uint64_t seed, std::int64_t patch_size);

CheckpointData to_checkpoint(const Model& model);
/// Builds a model from a checkpoint, restoring parameters, optimizer
/// moments and the iteration counter.
std::unique_ptr<Model> model_from_checkpoint(const CheckpointData& data);
void restore_checkpoint(Model& model, const CheckpointData& data);

struct TrainResult {
  std::unique_ptr<Model> model;
  std::vector<StepReport> reports;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path log_path;
};

/// Full training loop writing `<out_dir>/log.csv` and
/// `<out_dir>/checkpoints/ckpt_<iteration>.arhf`. `on_step`, when set, is
/// called after every iteration.
TrainResult train(const TrainConfig& config, const std::function<void(const StepReport&)>& on_step = {});

inline constexpr const char* kLogHeader = "iter,l_rec,l_btv,l_adv_g,l_adv_d,probe_fpsnr";

}  // namespace arhnet
