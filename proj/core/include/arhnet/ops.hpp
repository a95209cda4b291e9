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

#include <initializer_list>
#include <vector>

#include "arhnet/tensor.hpp"

namespace arhnet {

/// Set of tensor axes (0 = N, 1 = C, 2..4 = spatial).
class Axes {
 public:
  constexpr Axes() = default;
  constexpr Axes(std::initializer_list<int> axes) {
    for (int a : axes) bits_ |= 1u << a;
  }
  constexpr bool contains(int axis) const { return (bits_ >> axis) & 1u; }
  constexpr unsigned bits() const { return bits_; }

 private:
  unsigned bits_ = 0;
};

inline constexpr Axes kSpatialAxes{2, 3, 4};
inline constexpr Axes kAllAxes{0, 1, 2, 3, 4};

// Binary element-wise ops. Shapes must match axis by axis or be 1 on one
// side, in which case that operand is repeated along the axis.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

// Unary element-wise ops.
template <typename T> Tensor<T> scale(const Tensor<T>& x, double c);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, double c);
/// Subgradient at 0 is `slope`.
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& x, double slope);
template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
/// Subgradient at 0 is 0.
template <typename T> Tensor<T> abs(const Tensor<T>& x);
template <typename T> Tensor<T> square(const Tensor<T>& x);
/// sqrt(x); the gradient at x = 0 is defined as 0.
template <typename T> Tensor<T> sqrt(const Tensor<T>& x);
/// 1 / sqrt(x + eps).
template <typename T> Tensor<T> rsqrt(const Tensor<T>& x, double eps);
/// Gradient passes where lo < x < hi.
template <typename T> Tensor<T> clamp(const Tensor<T>& x, double lo, double hi);

enum class ReduceOp { kSum, kMean, kMax };

/// Reduces over `axes`, keeping them as size-1 axes. Max routes the gradient
/// to the first maximum in storage order.
template <typename T> Tensor<T> reduce(ReduceOp op, const Tensor<T>& x, Axes axes);
template <typename T> Tensor<T> sum(const Tensor<T>& x, Axes axes = kAllAxes) { return reduce(ReduceOp::kSum, x, axes); }
template <typename T> Tensor<T> mean(const Tensor<T>& x, Axes axes = kAllAxes) { return reduce(ReduceOp::kMean, x, axes); }
template <typename T> Tensor<T> max(const Tensor<T>& x, Axes axes = kAllAxes) { return reduce(ReduceOp::kMax, x, axes); }

/// Stacks tensors along the channel axis in argument order.
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& xs);
/// Channels [begin, begin + count).
template <typename T> Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count);

/// Replicates every voxel 2x along each spatial axis.
template <typename T> Tensor<T> upsample_nearest2(const Tensor<T>& x);
/// Non-overlapping 2x2x2 window mean; spatial dims must be even.
template <typename T> Tensor<T> avg_pool2(const Tensor<T>& x);

/// y[.., i, ..] = x[.., i + 1, ..] - x[.., i, ..] along a spatial axis, 0 on
/// the last slice.
template <typename T> Tensor<T> forward_diff(const Tensor<T>& x, int axis);

/// Zero-mean unit-variance standardization with statistics taken over
/// `axes` (population variance): instance norm uses the spatial axes, batch
/// norm adds axis 0.
template <typename T> Tensor<T> standardize(const Tensor<T>& x, Axes axes, double eps);
template <typename T> Tensor<T> instance_norm(const Tensor<T>& x, double eps) { return standardize(x, kSpatialAxes, eps); }
template <typename T> Tensor<T> batch_norm(const Tensor<T>& x, double eps) { return standardize(x, Axes{0, 2, 3, 4}, eps); }

struct Conv3dOptions {
  int stride = 1;
  int padding = 0;
};

/// 3D cross-correlation with zero padding. x: (N, Cin, H, W, D),
/// w: (Cout, Cin, k, k, k), b: (1, Cout, 1, 1, 1) or undefined.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Conv3dOptions options = {});

/// Output spatial extent of conv3d along one axis.
inline std::int64_t conv_out_extent(std::int64_t in, std::int64_t k, int stride, int padding) {
  return (in + 2 * padding - k) / stride + 1;
}

}  // namespace arhnet
