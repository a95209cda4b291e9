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

#include "arhnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "arhnet/error.hpp"
#include "arhnet/rng.hpp"
#include "arhnet/volume_io.hpp"

namespace arhnet {

namespace fs = std::filesystem;

namespace {

struct Wave {
  std::array<double, 3> freq;
  double phase;
  double amplitude;
};

}  // namespace

Case synth_case(std::int64_t size, std::uint64_t seed, std::uint64_t split, std::int64_t index) {
  if (size < 8) throw PreconditionError("synth-data: size must be >= 8");
  Rng rng = Rng::derive(seed, split, static_cast<std::uint64_t>(index));
  const double two_pi = 2.0 * std::numbers::pi;

  std::array<Wave, 4> waves;
  for (auto& w : waves) {
    for (auto& f : w.freq) f = rng.uniform(0.3, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    w.phase = rng.uniform(0.0, two_pi);
    w.amplitude = rng.uniform(0.03, 0.07);
  }
  const double base = rng.uniform(0.5, 0.6);

  std::array<double, 3> radii, center;
  for (int a = 0; a < 3; ++a) radii[a] = rng.uniform(2.5, 5.0);
  for (int a = 0; a < 3; ++a) {
    const double margin = radii[a] + 1.5;
    center[a] = rng.uniform(margin, static_cast<double>(size - 1) - margin);
  }
  const double offset = rng.uniform(-0.15, -0.1);

  const Dims3 dims{size, size, size};
  Volume3D image(dims);
  Mask3D mask(dims);
  const double n = static_cast<double>(size);
  for (std::int64_t i = 0; i < size; ++i) {
    for (std::int64_t j = 0; j < size; ++j) {
      for (std::int64_t k = 0; k < size; ++k) {
        double v = base;
        for (const auto& w : waves) {
          v += w.amplitude * std::cos(two_pi * (w.freq[0] * i + w.freq[1] * j + w.freq[2] * k) / n + w.phase);
        }
        const double di = (i - center[0]) / radii[0];
        const double dj = (j - center[1]) / radii[1];
        const double dk = (k - center[2]) / radii[2];
        const bool lesion = di * di + dj * dj + dk * dk <= 1.0;
        if (lesion) v += offset;
        v += 0.01 * rng.normal();
        image.at(i, j, k) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        mask.set(i, j, k, lesion);
      }
    }
  }
  char name[32];
  std::snprintf(name, sizeof name, "case_%03lld.nii", static_cast<long long>(index));
  return {name, std::move(image), std::move(mask)};
}

void write_synth_dataset(const fs::path& out, const SynthOptions& options) {
  if (options.train < 1 || options.test < 0) throw PreconditionError("synth-data: need at least one training case");
  const std::array<std::pair<const char*, std::int64_t>, 2> splits = {{{"train", options.train}, {"test", options.test}}};
  for (std::uint64_t s = 0; s < splits.size(); ++s) {
    const auto& [split, count] = splits[s];
    if (count == 0) continue;
    const fs::path dir = out / split;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    for (std::int64_t i = 0; i < count; ++i) {
      const Case c = synth_case(options.size, options.seed, s + 1, i);
      save_volume(c.image, dir / "images" / c.name);
      save_mask(c.mask, dir / "masks" / c.name);
    }
  }
}

}  // namespace arhnet
