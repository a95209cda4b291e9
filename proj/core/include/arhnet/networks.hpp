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

#include <string>
#include <vector>

#include "arhnet/arh_norm.hpp"
#include "arhnet/rng.hpp"

namespace arhnet {

template <typename T>
struct NamedTensorT {
  std::string name;
  Tensor<T> tensor;
};

/// Ordered collection of trainable tensors with stable names.
template <typename T>
class ParamStoreT {
 public:
  /// Registers a zero tensor that requires grad and returns its handle.
  Tensor<T> add(const std::string& name, const Shape& shape);

  const std::vector<NamedTensorT<T>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::int64_t numel() const;
  /// Throws PreconditionError for unknown names.
  const Tensor<T>& find(const std::string& name) const;
  void zero_grad();

 private:
  std::vector<NamedTensorT<T>> entries_;
};

struct GeneratorConfig {
  int levels = 3;
  int base_channels = 16;
  NormKind norm = NormKind::kArh;
  /// Feed the mask as a second input channel next to the image.
  bool mask_input = true;
  ArhOptions arh;
};

struct DiscriminatorConfig {
  int layers = 4;
  int base_channels = 16;
};

/// Encoder-decoder predicting an intensity difference map that is applied
/// inside the mask only. Training runs at float; double is a test mode.
template <typename T>
class GeneratorT {
 public:
  explicit GeneratorT(const GeneratorConfig& config);

  struct Output {
    Tensor<T> diff;        // raw difference map
    Tensor<T> harmonized;  // image + diff inside the mask, clamped to [0, 1]
  };

  /// image, mask: (N, 1, S, S, S) with S divisible by 2^(levels - 1).
  Output forward(const Tensor<T>& image, const Tensor<T>& mask) const;

  /// Uniform(-a, a) weights with a = sqrt(1 / fan_in), zero biases, and an
  /// all-zero output convolution.
  void init(Rng& rng);

  const GeneratorConfig& config() const { return config_; }
  ParamStoreT<T>& params() { return params_; }
  const ParamStoreT<T>& params() const { return params_; }
  std::int64_t channels(int level) const { return static_cast<std::int64_t>(config_.base_channels) << level; }

 private:
  struct Level {
    ConvParams<T> conv0, conv1;
    ArhParams<T> norm0, norm1;
  };

  ConvParams<T> add_conv(const std::string& name, std::int64_t cin, std::int64_t cout);
  ArhParams<T> add_arh(const std::string& name, std::int64_t channels);
  Tensor<T> norm(const Tensor<T>& x, const Tensor<T>& mask, const ArhParams<T>& p) const;

  GeneratorConfig config_;
  ParamStoreT<T> params_;
  std::vector<Level> encoder_;
  std::vector<Level> decoder_;  // index l holds decoder level l (l < levels - 1)
  ConvParams<T> out_;
};

/// Patch critic over concat(candidate, image, mask); one score per sample.
template <typename T>
class DiscriminatorT {
 public:
  explicit DiscriminatorT(const DiscriminatorConfig& config);

  /// Returns (N, 1, 1, 1, 1) spatial-mean scores.
  Tensor<T> forward(const Tensor<T>& candidate, const Tensor<T>& image, const Tensor<T>& mask) const;

  void init(Rng& rng);

  const DiscriminatorConfig& config() const { return config_; }
  ParamStoreT<T>& params() { return params_; }
  const ParamStoreT<T>& params() const { return params_; }

 private:
  DiscriminatorConfig config_;
  ParamStoreT<T> params_;
  std::vector<ConvParams<T>> stages_;
  ConvParams<T> head_;
};

/// out = mask ? clamp(base + diff, 0, 1) : base. The clamp passes gradient
/// on the closed interval [0, 1].
template <typename T>
Tensor<T> masked_residual(const Tensor<T>& base, const Tensor<T>& diff, const Tensor<T>& mask);

/// Fills every weight named "*.w" with uniform(-a, a), a = sqrt(1 / fan_in),
/// in store order, and zeroes every bias.
template <typename T>
void init_uniform(ParamStoreT<T>& store, Rng& rng);

using NamedTensor = NamedTensorT<float>;
using ParamStore = ParamStoreT<float>;
using Generator = GeneratorT<float>;
using Discriminator = DiscriminatorT<float>;

}  // namespace arhnet
