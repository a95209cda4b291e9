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

#include "arhnet/convert.hpp"
#include "arhnet/training.hpp"

namespace arhnet {
namespace {

std::vector<Case> ball_cases(std::int64_t n, std::int64_t size) {
  std::vector<Case> cases;
  Rng rng(3);
  const Dims3 d{size, size, size};
  for (std::int64_t c = 0; c < n; ++c) {
    Volume3D v(d);
    Mask3D m(d);
    const double r = size / 5.0, mid = size / 2.0;
    for (std::int64_t i = 0; i < size; ++i)
      for (std::int64_t j = 0; j < size; ++j)
        for (std::int64_t k = 0; k < size; ++k) {
          v.at(i, j, k) = static_cast<float>(0.3 + 0.01 * i + rng.uniform(0, 0.05));
          const double di = i - mid, dj = j - mid, dk = k - mid;
          m.set(i, j, k, di * di + dj * dj + dk * dk <= r * r);
        }
    cases.push_back({"case_" + std::to_string(c), std::move(v), std::move(m)});
  }
  return cases;
}

void BM_TrainStep(benchmark::State& state) {
  TrainConfig config = preset("desk");
  config.norm_kind = static_cast<NormKind>(state.range(0));
  Model model(config);
  model.init(0);
  const auto cases = ball_cases(4, 24);
  std::int64_t it = 0;
  for (auto _ : state) train_step(model, make_batch(cases, config, it++));
  state.SetLabel(std::string(to_string(config.norm_kind)));
}
BENCHMARK(BM_TrainStep)
    ->Arg(static_cast<int>(NormKind::kArh))
    ->Arg(static_cast<int>(NormKind::kInstance))
    ->Unit(benchmark::kMillisecond);

void BM_GeneratorForward(benchmark::State& state) {
  TrainConfig config = preset("desk");
  Model model(config);
  model.init(0);
  const auto batch = make_batch(ball_cases(2, 24), config, 0);
  std::vector<Volume3D> images;
  std::vector<Mask3D> masks;
  for (const auto& p : batch) {
    images.push_back(p.image);
    masks.push_back(p.mask);
  }
  const TensorF x = stack_volumes(images), m = stack_masks(masks);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.g.forward(x, m));
}
BENCHMARK(BM_GeneratorForward)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace arhnet

BENCHMARK_MAIN();
