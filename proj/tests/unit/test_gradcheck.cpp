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

#include <set>

#include <gtest/gtest.h>

#include "arhnet/error.hpp"
#include "arhnet/gradcheck.hpp"
#include "arhnet/ops.hpp"
#include "scalar_oracles.hpp"

namespace arhnet {
namespace {

// x^3 with a backward rule that returns 2x instead of 3x^2.
TensorD broken_cube(const TensorD& x) {
  std::vector<double> v(x.values().begin(), x.values().end());
  for (double& e : v) e = e * e * e;
  const TensorD keep = x;
  return detail::make_result<double>(x.shape(), std::move(v), {&x}, "broken_cube", [keep](detail::Node<double>& self) {
    auto& g = keep.node()->ensure_grad();
    auto xv = keep.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * 2.0 * xv[i];
  });
}

TEST(FiniteDifference, SumOfSquaresIsTight) {
  Rng rng(0);
  TensorD x = oracle::random_tensor<double>(rng, Shape(1, 2, 3, 3, 3));
  x.set_requires_grad(true);
  EXPECT_LT(finite_difference_check<double>([&] { return sum(square(x)); }, x, 1e-4), 1e-6);
}

TEST(FiniteDifference, BrokenBackwardIsCaught) {
  Rng rng(1);
  TensorD x = oracle::random_tensor<double>(rng, Shape(1, 1, 2, 2, 2), 0.5, 2.0);
  x.set_requires_grad(true);
  EXPECT_GT(finite_difference_check<double>([&] { return sum(broken_cube(x)); }, x, 1e-4), 1e-1);
}

TEST(FiniteDifference, ProbesRestrictCoordinates) {
  // 2x = 3x^2 at x = 2/3, so only coordinate 1 has a correct gradient.
  TensorD x(Shape(1, 1, 1, 1, 3), {1.5, 2.0 / 3.0, 3.0}, true);
  auto f = [&] { return sum(broken_cube(x)); };
  EXPECT_LT(finite_difference_check<double>(f, x, 1e-4, {1}), 1e-6);
  EXPECT_GT(finite_difference_check<double>(f, x, 1e-4, {0, 1}), 1e-1);
}

TEST(Gradcheck, SuiteNamesAreUniqueAndIncludeEndToEnd) {
  const auto& names = gradcheck_names();
  std::set<std::string> seen(names.begin(), names.end());
  EXPECT_EQ(seen.size(), names.size());
  EXPECT_TRUE(seen.count("conv3d"));
  EXPECT_TRUE(seen.count("arh_forward"));
  EXPECT_TRUE(seen.count("end_to_end"));
  EXPECT_THROW(run_gradcheck("no_such_op"), PreconditionError);
}

class GradcheckSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(GradcheckSuite, PassesWithSweepReported) {
  const GradcheckReport r = run_gradcheck(GetParam(), 0, true);
  EXPECT_TRUE(r.passed()) << r.name << " max rel error " << r.max_rel_error << " tol " << r.tolerance;
  ASSERT_EQ(r.sweep.size(), 3u);
  EXPECT_EQ(r.sweep[0].first, 1e-2);
  EXPECT_EQ(r.sweep[1].first, 1e-3);
  EXPECT_EQ(r.sweep[2].first, 1e-4);
  EXPECT_LE(r.tolerance, r.name == "end_to_end" ? 1e-2 : 1e-3);
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradcheckSuite, ::testing::ValuesIn(gradcheck_names()),
                         [](const ::testing::TestParamInfo<std::string>& info) { return info.param; });

}  // namespace
}  // namespace arhnet
