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
#include "arhnet/volume.hpp"

namespace arhnet {

// Masks enter the tensor code as (N, 1, H, W, D) tensors holding 0 or 1.

enum class NormKind { kArh, kBatch, kInstance, kRain };

std::string_view to_string(NormKind kind);
/// Accepts "arh", "batch", "instance", "rain".
NormKind parse_norm_kind(std::string_view name);

/// Background standard deviation convention. kMasked subtracts the mean only
/// at background voxels; kLiteral subtracts it at every voxel.
enum class StatsMode { kMasked, kLiteral };

struct ArhOptions {
  double eps = 1e-5;
  StatsMode stats = StatsMode::kMasked;
};

template <typename T>
struct ConvParams {
  Tensor<T> w;  // (Cout, Cin, 3, 3, 3)
  Tensor<T> b;  // (1, Cout, 1, 1, 1)
};

template <typename T>
struct ArhParams {
  ConvParams<T> attn_reduce;  // C -> 1
  ConvParams<T> attn_fuse;    // 3 -> 1
  ConvParams<T> gamma;        // 1 -> C
  ConvParams<T> beta;         // 1 -> C
  ConvParams<T> gamma_f;      // C -> C
  ConvParams<T> beta_f;       // C -> C

  /// All weights and biases zero, for a feature width of `channels`.
  static ArhParams zeros(std::int64_t channels);
  std::int64_t channels() const { return gamma.w.shape()[0]; }
};

/// Per-channel statistics, each shaped (N, C, 1, 1, 1).
template <typename T>
struct RegionStats {
  Tensor<T> mu;
  Tensor<T> sigma;
};

/// F_f = F * M, F_b = F * (1 - M).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_regions(const Tensor<T>& f, const Tensor<T>& m);

/// Nearest downsampling by a power-of-two factor per axis, keeping the voxel
/// with the smallest index of each block.
Mask3D mask_resize(const Mask3D& m, const Dims3& target);
template <typename T>
Tensor<T> mask_resize(const Tensor<T>& m, std::int64_t h, std::int64_t w, std::int64_t d);

/// Instance normalization with statistics over the voxels where region = 1;
/// zero outside the region (and everywhere when the region is empty).
template <typename T>
Tensor<T> region_instance_norm(const Tensor<T>& f, const Tensor<T>& region, double eps);

/// Population mean and standard deviation of F over background voxels.
/// Throws DegenerateRegionError when a sample has no background voxel.
template <typename T>
RegionStats<T> background_stats(const Tensor<T>& f, const Tensor<T>& m, StatsMode mode = StatsMode::kMasked);

template <typename T>
Tensor<T> attention_map(const Tensor<T>& f, const ArhParams<T>& p);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> scaling_params(const Tensor<T>& fa, const ArhParams<T>& p);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> foreground_scaling(const Tensor<T>& gamma, const Tensor<T>& beta,
                                                   const RegionStats<T>& stats, const ArhParams<T>& p);

/// F^ = IN_fg(F) * (1 + gamma_f) + beta_f + IN_bg(F).
/// Per sample, an empty foreground gives IN(F) and an empty background takes
/// all statistics over the whole map with a zero background term.
template <typename T>
Tensor<T> arh_forward(const Tensor<T>& f, const Tensor<T>& m, const ArhParams<T>& p, const ArhOptions& options = {});

/// Ablation normalizations. kRain gives (IN_fg(F) * sigma + mu) * M + F_b.
/// kArh requires `p`.
template <typename T>
Tensor<T> baseline_norm(NormKind kind, const Tensor<T>& f, const Tensor<T>& m, const ArhOptions& options = {});

template <typename T>
Tensor<T> apply_norm(NormKind kind, const Tensor<T>& f, const Tensor<T>& m, const ArhParams<T>* p,
                     const ArhOptions& options = {});

/// 3x3x3 convolution with padding 1.
template <typename T>
Tensor<T> conv_same(const Tensor<T>& x, const ConvParams<T>& p) {
  return conv3d(x, p.w, p.b, Conv3dOptions{1, static_cast<int>(p.w.shape()[2] / 2)});
}

}  // namespace arhnet
