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

#include <string_view>

#include "arhnet/ops.hpp"

namespace arhnet {

struct LossWeights {
  double rec = 100.0;
  double btv = 10.0;
  double adv = 1.0;
};

/// kMean divides the reconstruction term by the voxel count and the boundary
/// term by the boundary voxel count; kSum keeps plain sums. Both average
/// over the batch.
enum class LossReduction { kMean, kSum };

/// kVerbatim: D minimizes relu(1 - D(fake)) + relu(1 + D(real)).
/// kStandard: D minimizes relu(1 - D(real)) + relu(1 + D(fake)).
enum class HingeConvention { kVerbatim, kStandard };

std::string_view to_string(LossReduction r);
LossReduction parse_loss_reduction(std::string_view name);
std::string_view to_string(HingeConvention c);
HingeConvention parse_hinge_convention(std::string_view name);

/// |I - I^| reduced per sample, averaged over the batch.
template <typename T>
Tensor<T> loss_rec(const Tensor<T>& target, const Tensor<T>& output, LossReduction reduction = LossReduction::kMean);

/// Forward-difference L1 over the boundary band (N, 1, H, W, D); neighbours
/// outside the volume contribute 0 and an empty band gives 0.
template <typename T>
Tensor<T> loss_btv(const Tensor<T>& output, const Tensor<T>& boundary, LossReduction reduction = LossReduction::kMean);

/// Scores are (N, 1, 1, 1, 1); each hinge is averaged over the batch.
template <typename T>
Tensor<T> loss_adv_d(const Tensor<T>& score_fake, const Tensor<T>& score_real,
                     HingeConvention convention = HingeConvention::kVerbatim);

/// -mean(score_fake).
template <typename T>
Tensor<T> loss_adv_g(const Tensor<T>& score_fake);

template <typename T>
Tensor<T> loss_total(const Tensor<T>& rec, const Tensor<T>& btv, const Tensor<T>& adv, const LossWeights& w);

}  // namespace arhnet
