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

#include "arhnet/losses.hpp"

#include "arhnet/error.hpp"

namespace arhnet {

std::string_view to_string(LossReduction r) { return r == LossReduction::kMean ? "mean" : "sum"; }

LossReduction parse_loss_reduction(std::string_view name) {
  if (name == "mean") return LossReduction::kMean;
  if (name == "sum") return LossReduction::kSum;
  throw PreconditionError("unknown loss reduction '" + std::string(name) + "' (expected mean or sum)");
}

std::string_view to_string(HingeConvention c) { return c == HingeConvention::kVerbatim ? "verbatim" : "standard"; }

HingeConvention parse_hinge_convention(std::string_view name) {
  if (name == "verbatim") return HingeConvention::kVerbatim;
  if (name == "standard") return HingeConvention::kStandard;
  throw PreconditionError("unknown hinge convention '" + std::string(name) + "' (expected verbatim or standard)");
}

template <typename T>
Tensor<T> loss_rec(const Tensor<T>& target, const Tensor<T>& output, LossReduction reduction) {
  if (!(target.shape() == output.shape())) {
    throw ShapeError("loss_rec: " + target.shape().str() + " vs " + output.shape().str());
  }
  const Tensor<T> err = abs(sub(target, output));
  if (reduction == LossReduction::kMean) return mean(err);
  return scale(sum(err), 1.0 / static_cast<double>(target.shape()[0]));
}

template <typename T>
Tensor<T> loss_btv(const Tensor<T>& output, const Tensor<T>& boundary, LossReduction reduction) {
  const Shape& s = output.shape();
  if (!(boundary.shape() == s) || s[1] != 1) {
    throw ShapeError("loss_btv: output " + s.str() + " vs boundary " + boundary.shape().str());
  }
  const Tensor<T> tv = add(add(abs(forward_diff(output, 2)), abs(forward_diff(output, 3))), abs(forward_diff(output, 4)));
  const Tensor<T> per_sample = sum(mul(tv, boundary), kSpatialAxes);
  if (reduction == LossReduction::kSum) return mean(per_sample);
  const std::int64_t sp = s.spatial();
  auto b = boundary.values();
  std::vector<T> inv(static_cast<std::size_t>(s[0]));
  for (std::int64_t n = 0; n < s[0]; ++n) {
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < sp; ++i) count += b[n * sp + i] != T(0);
    inv[n] = count > 0 ? T(1) / static_cast<T>(count) : T(0);
  }
  return mean(mul(per_sample, Tensor<T>(Shape(s[0], 1, 1, 1, 1), std::move(inv))));
}

template <typename T>
Tensor<T> loss_adv_d(const Tensor<T>& score_fake, const Tensor<T>& score_real, HingeConvention convention) {
  if (!(score_fake.shape() == score_real.shape())) {
    throw ShapeError("loss_adv_d: " + score_fake.shape().str() + " vs " + score_real.shape().str());
  }
  const Tensor<T>& up = convention == HingeConvention::kVerbatim ? score_fake : score_real;
  const Tensor<T>& down = convention == HingeConvention::kVerbatim ? score_real : score_fake;
  return add(mean(relu(add_scalar(scale(up, -1.0), 1.0))), mean(relu(add_scalar(down, 1.0))));
}

template <typename T>
Tensor<T> loss_adv_g(const Tensor<T>& score_fake) {
  return scale(mean(score_fake), -1.0);
}

template <typename T>
Tensor<T> loss_total(const Tensor<T>& rec, const Tensor<T>& btv, const Tensor<T>& adv, const LossWeights& w) {
  return add(add(scale(rec, w.rec), scale(btv, w.btv)), scale(adv, w.adv));
}

#define ARHNET_INSTANTIATE_LOSSES(T)                                                        \
  template Tensor<T> loss_rec(const Tensor<T>&, const Tensor<T>&, LossReduction);           \
  template Tensor<T> loss_btv(const Tensor<T>&, const Tensor<T>&, LossReduction);           \
  template Tensor<T> loss_adv_d(const Tensor<T>&, const Tensor<T>&, HingeConvention);       \
  template Tensor<T> loss_adv_g(const Tensor<T>&);                                          \
  template Tensor<T> loss_total(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LossWeights&);

ARHNET_INSTANTIATE_LOSSES(float)
ARHNET_INSTANTIATE_LOSSES(double)

#undef ARHNET_INSTANTIATE_LOSSES

}  // namespace arhnet
