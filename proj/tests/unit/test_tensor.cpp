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

#include <cmath>

#include <gtest/gtest.h>

#include "arhnet/error.hpp"
#include "arhnet/ops.hpp"
#include "arhnet/parallel.hpp"

namespace arhnet {
namespace {

TEST(Tensor, ShapeAndValueCount) {
  const TensorF t = TensorF::zeros(Shape(2, 3, 4, 5, 6));
  EXPECT_EQ(t.numel(), 720);
  EXPECT_EQ(t.values().size(), 720u);
  EXPECT_THROW(TensorF(Shape(1, 1, 1, 1, 2), {1.0f}), ShapeError);
}

TEST(Backward, SumGivesOnes) {
  TensorD x(Shape(1, 1, 2, 2, 2), {1, 2, 3, 4, 5, 6, 7, 8}, true);
  backward(sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquareGivesTwiceX) {
  TensorD x(Shape(1, 1, 1, 1, 2), {1, 2}, true);
  backward(sum(mul(x, x)));
  EXPECT_EQ(x.grad()[0], 2.0);
  EXPECT_EQ(x.grad()[1], 4.0);
}

TEST(Backward, SharedInputAccumulates) {
  // f(x) = sum(x) + sum(x * x): df/dx = 1 + 2x.
  TensorD x(Shape(1, 1, 1, 1, 3), {-1.5, 0.0, 2.0}, true);
  backward(add(sum(x), sum(mul(x, x))));
  EXPECT_EQ(x.grad()[0], -2.0);
  EXPECT_EQ(x.grad()[1], 1.0);
  EXPECT_EQ(x.grad()[2], 5.0);
}

TEST(Backward, DiamondVisitsEachNodeOnce) {
  TensorD x(Shape(1, 1, 1, 1, 1), {3.0}, true);
  const TensorD y = scale(x, 2.0);
  backward(mul(y, y));  // 4 x^2 -> 8 x
  EXPECT_EQ(x.grad()[0], 24.0);
}

TEST(Backward, NonScalarLossThrows) {
  TensorD x(Shape(1, 1, 1, 1, 2), {1, 2}, true);
  EXPECT_THROW(backward(scale(x, 2.0)), ShapeError);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  TensorD x(Shape(1, 1, 1, 1, 2), {1, 2}, true);
  NoGradGuard guard;
  const TensorD y = scale(x, 2.0);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_FALSE(grad_enabled());
}

TEST(Backward, DetachCutsGraph) {
  TensorD x(Shape(1, 1, 1, 1, 1), {2.0}, true);
  backward(add(mul(x.detach(), x), sum(x)));  // d/dx = 2 + 1
  EXPECT_EQ(x.grad()[0], 3.0);
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  std::vector<float> v(2 * 3 * 6 * 6 * 6);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(std::sin(0.37 * static_cast<double>(i)));
  const TensorF x(Shape(2, 3, 6, 6, 6), v);
  std::vector<float> wv(4 * 3 * 27);
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = static_cast<float>(std::cos(0.11 * static_cast<double>(i)));
  const TensorF w(Shape(4, 3, 3, 3, 3), wv);
  set_num_threads(1);
  const TensorF a = instance_norm(conv3d(x, w, TensorF{}, Conv3dOptions{1, 1}), 1e-5);
  set_num_threads(3);
  const TensorF b = instance_norm(conv3d(x, w, TensorF{}, Conv3dOptions{1, 1}), 1e-5);
  set_num_threads(1);
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

}  // namespace
}  // namespace arhnet
