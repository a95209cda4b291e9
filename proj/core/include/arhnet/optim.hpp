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

#include <span>
#include <vector>

#include "arhnet/networks.hpp"

namespace arhnet {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

/// One decoupled-weight-decay Adam update of a flat buffer at step `step`
/// (1-based): theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta).
void adamw_update(std::span<float> theta, std::span<const float> grad, std::span<float> m, std::span<float> v,
                  std::int64_t step, const AdamWConfig& config);

/// AdamW over every tensor of a ParamStore. Tensors without a gradient are
/// updated with a zero gradient.
class AdamW {
 public:
  AdamW(ParamStore& params, const AdamWConfig& config);

  void step();
  std::int64_t steps() const { return steps_; }
  const AdamWConfig& config() const { return config_; }

  // Moment buffers in parameter order, for checkpointing.
  std::vector<std::vector<float>>& first_moments() { return m_; }
  std::vector<std::vector<float>>& second_moments() { return v_; }
  const std::vector<std::vector<float>>& first_moments() const { return m_; }
  const std::vector<std::vector<float>>& second_moments() const { return v_; }
  void set_steps(std::int64_t steps) { steps_ = steps; }

 private:
  ParamStore* params_;
  AdamWConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace arhnet
