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

#include "arhnet/optim.hpp"

#include <cmath>

#include "arhnet/error.hpp"

namespace arhnet {

void adamw_update(std::span<float> theta, std::span<const float> grad, std::span<float> m, std::span<float> v,
                  std::int64_t step, const AdamWConfig& c) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw ShapeError("adamw_update: buffer sizes differ (" + std::to_string(theta.size()) + " parameters, " +
                     std::to_string(grad.size()) + " gradients)");
  }
  if (step < 1) throw PreconditionError("adamw_update: step must be >= 1");
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    const double t = theta[i];
    const double update = (mi / bc1) / (std::sqrt(vi / bc2) + c.eps) + c.weight_decay * t;
    theta[i] = static_cast<float>(t - c.lr * update);
  }
}

AdamW::AdamW(ParamStore& params, const AdamWConfig& config) : params_(&params), config_(config) {
  for (const auto& e : params.entries()) {
    m_.emplace_back(static_cast<std::size_t>(e.tensor.numel()), 0.0f);
    v_.emplace_back(static_cast<std::size_t>(e.tensor.numel()), 0.0f);
  }
}

void AdamW::step() {
  ++steps_;
  const auto& entries = params_->entries();
  std::vector<float> zeros;
  for (std::size_t p = 0; p < entries.size(); ++p) {
    TensorF t = entries[p].tensor;
    std::span<const float> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(static_cast<std::size_t>(t.numel()), 0.0f);
      g = zeros;
    }
    adamw_update(t.mutable_values(), g, m_[p], v_[p], steps_, config_);
  }
}

}  // namespace arhnet
