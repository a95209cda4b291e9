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

#include <benchmark/benchmark.h>

#include "arhnet/ops.hpp"
#include "arhnet/rng.hpp"

namespace arhnet {
namespace {

TensorF random_tensor(Rng& rng, const Shape& s, bool requires_grad) {
  std::vector<float> v(static_cast<std::size_t>(s.numel()));
  for (float& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  return TensorF(s, std::move(v), requires_grad);
}

void BM_Conv3dForward(benchmark::State& state) {
  const std::int64_t size = state.range(0), channels = state.range(1);
  Rng rng(1);
  const TensorF x = random_tensor(rng, Shape(2, channels, size, size, size), false);
  const TensorF w = random_tensor(rng, Shape(channels, channels, 3, 3, 3), false);
  const TensorF b = random_tensor(rng, Shape(1, channels, 1, 1, 1), false);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, w, b, Conv3dOptions{1, 1}));
  state.SetItemsProcessed(state.iterations() * 2 * channels * channels * 27 * size * size * size);
}
BENCHMARK(BM_Conv3dForward)->Args({16, 8})->Args({16, 16})->Args({32, 8})->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const std::int64_t size = state.range(0), channels = state.range(1);
  Rng rng(2);
  const TensorF x = random_tensor(rng, Shape(2, channels, size, size, size), true);
  const TensorF w = random_tensor(rng, Shape(channels, channels, 3, 3, 3), true);
  const TensorF b = random_tensor(rng, Shape(1, channels, 1, 1, 1), true);
  for (auto _ : state) backward(sum(conv3d(x, w, b, Conv3dOptions{1, 1}), kAllAxes));
}
BENCHMARK(BM_Conv3dBackward)->Args({16, 8})->Args({16, 16})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace arhnet
