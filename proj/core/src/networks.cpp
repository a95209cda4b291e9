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

#include "arhnet/networks.hpp"

#include <algorithm>
#include <cmath>

#include "arhnet/error.hpp"

namespace arhnet {

namespace {

constexpr double kLeakySlope = 0.2;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

template <typename T>
Tensor<T> ParamStoreT<T>::add(const std::string& name, const Shape& shape) {
  for (const auto& e : entries_) {
    if (e.name == name) throw PreconditionError("ParamStore: duplicate parameter '" + name + "'");
  }
  Tensor<T> t = Tensor<T>::zeros(shape, true);
  entries_.push_back({name, t});
  return t;
}

template <typename T>
std::int64_t ParamStoreT<T>::numel() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename T>
const Tensor<T>& ParamStoreT<T>::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw PreconditionError("ParamStore: no parameter named '" + name + "'");
}

template <typename T>
void ParamStoreT<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <typename T>
void init_uniform(ParamStoreT<T>& store, Rng& rng) {
  for (const auto& e : store.entries()) {
    Tensor<T> t = e.tensor;
    auto v = t.mutable_values();
    if (ends_with(e.name, ".w")) {
      const Shape& s = t.shape();
      const double fan_in = static_cast<double>(s[1] * s[2] * s[3] * s[4]);
      const double a = std::sqrt(1.0 / fan_in);
      for (auto& x : v) x = static_cast<T>(rng.uniform(-a, a));
    } else {
      std::fill(v.begin(), v.end(), T(0));
    }
  }
}

template <typename T>
Tensor<T> masked_residual(const Tensor<T>& base, const Tensor<T>& diff, const Tensor<T>& mask) {
  const Shape& s = base.shape();
  if (!(diff.shape() == s) || !(mask.shape() == s)) {
    throw ShapeError("masked_residual: shapes " + s.str() + ", " + diff.shape().str() + ", " + mask.shape().str());
  }
  auto b = base.values();
  auto d = diff.values();
  auto m = mask.values();
  std::vector<T> out(b.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] != T(0) ? std::clamp(b[i] + d[i], T(0), T(1)) : b[i];
  auto* nb = base.node().get();
  auto* nd = diff.node().get();
  auto* nm = mask.node().get();
  return detail::make_result<T>(s, std::move(out), {&base, &diff}, "masked_residual",
                                    [nb, nd, nm](detail::Node<T>& self) {
                                      T* gb = nb->requires_grad ? nb->ensure_grad().data() : nullptr;
                                      T* gd = nd->requires_grad ? nd->ensure_grad().data() : nullptr;
                                      const T* g = self.grad.data();
                                      const T* b = nb->values.data();
                                      const T* d = nd->values.data();
                                      const T* m = nm->values.data();
                                      for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                        if (m[i] == T(0)) {
                                          if (gb) gb[i] += g[i];
                                          continue;
                                        }
                                        const T v = b[i] + d[i];
                                        if (v < T(0) || v > T(1)) continue;
                                        if (gb) gb[i] += g[i];
                                        if (gd) gd[i] += g[i];
                                      }
                                    });
}

template <typename T>
GeneratorT<T>::GeneratorT(const GeneratorConfig& config) : config_(config) {
  if (config.levels < 1) throw PreconditionError("generator: levels must be >= 1");
  if (config.base_channels < 1) throw PreconditionError("generator: base_channels must be >= 1");
  const std::int64_t in_ch = config.mask_input ? 2 : 1;
  const bool arh = config.norm == NormKind::kArh;
  for (int l = 0; l < config.levels; ++l) {
    const std::string p = "g.enc" + std::to_string(l);
    Level level;
    level.conv0 = add_conv(p + ".conv0", l == 0 ? in_ch : channels(l - 1), channels(l));
    level.conv1 = add_conv(p + ".conv1", channels(l), channels(l));
    encoder_.push_back(std::move(level));
  }
  decoder_.resize(static_cast<std::size_t>(config.levels - 1));
  for (int l = config.levels - 2; l >= 0; --l) {
    const std::string p = "g.dec" + std::to_string(l);
    Level& level = decoder_[static_cast<std::size_t>(l)];
    level.conv0 = add_conv(p + ".conv0", channels(l + 1) + channels(l), channels(l));
    if (arh) level.norm0 = add_arh(p + ".norm0", channels(l));
    level.conv1 = add_conv(p + ".conv1", channels(l), channels(l));
    if (arh) level.norm1 = add_arh(p + ".norm1", channels(l));
  }
  out_ = add_conv("g.out", channels(0), 1);
}

template <typename T>
ConvParams<T> GeneratorT<T>::add_conv(const std::string& name, std::int64_t cin, std::int64_t cout) {
  return {params_.add(name + ".w", Shape(cout, cin, 3, 3, 3)), params_.add(name + ".b", Shape(1, cout, 1, 1, 1))};
}

template <typename T>
ArhParams<T> GeneratorT<T>::add_arh(const std::string& name, std::int64_t c) {
  ArhParams<T> p;
  p.attn_reduce = add_conv(name + ".attn_reduce", c, 1);
  p.attn_fuse = add_conv(name + ".attn_fuse", 3, 1);
  p.gamma = add_conv(name + ".gamma", 1, c);
  p.beta = add_conv(name + ".beta", 1, c);
  p.gamma_f = add_conv(name + ".gamma_f", c, c);
  p.beta_f = add_conv(name + ".beta_f", c, c);
  return p;
}

template <typename T>
void GeneratorT<T>::init(Rng& rng) {
  init_uniform(params_, rng);
  for (Tensor<T> t : {out_.w, out_.b}) {
    auto v = t.mutable_values();
    std::fill(v.begin(), v.end(), T(0));
  }
}

template <typename T>
Tensor<T> GeneratorT<T>::norm(const Tensor<T>& x, const Tensor<T>& mask, const ArhParams<T>& p) const {
  const Shape& s = x.shape();
  const Tensor<T> m = mask_resize(mask, s[2], s[3], s[4]);
  return apply_norm(config_.norm, x, m, config_.norm == NormKind::kArh ? &p : nullptr, config_.arh);
}

template <typename T>
typename GeneratorT<T>::Output GeneratorT<T>::forward(const Tensor<T>& image, const Tensor<T>& mask) const {
  const Shape& s = image.shape();
  if (s[1] != 1 || !(mask.shape() == s)) {
    throw ShapeError("generator: image " + s.str() + " and mask " + mask.shape().str() + " must be equal single-channel");
  }
  const std::int64_t div = std::int64_t{1} << (config_.levels - 1);
  if (s[2] % div || s[3] % div || s[4] % div) {
    throw ShapeError("generator: patch " + s.str() + " not divisible by " + std::to_string(div));
  }
  Tensor<T> x = config_.mask_input ? concat<T>({image, mask}) : image;
  std::vector<Tensor<T>> skips;
  for (int l = 0; l < config_.levels; ++l) {
    if (l > 0) x = avg_pool2(x);
    const Level& e = encoder_[static_cast<std::size_t>(l)];
    x = leaky_relu(conv_same(x, e.conv0), kLeakySlope);
    x = leaky_relu(conv_same(x, e.conv1), kLeakySlope);
    skips.push_back(x);
  }
  for (int l = config_.levels - 2; l >= 0; --l) {
    const Level& d = decoder_[static_cast<std::size_t>(l)];
    x = concat<T>({upsample_nearest2(x), skips[static_cast<std::size_t>(l)]});
    x = leaky_relu(norm(conv_same(x, d.conv0), mask, d.norm0), kLeakySlope);
    x = leaky_relu(norm(conv_same(x, d.conv1), mask, d.norm1), kLeakySlope);
  }
  Output out;
  out.diff = conv_same(x, out_);
  out.harmonized = masked_residual(image, out.diff, mask);
  return out;
}

template <typename T>
DiscriminatorT<T>::DiscriminatorT(const DiscriminatorConfig& config) : config_(config) {
  if (config.layers < 1) throw PreconditionError("discriminator: layers must be >= 1");
  if (config.base_channels < 1) throw PreconditionError("discriminator: base_channels must be >= 1");
  std::int64_t cin = 3;
  for (int l = 0; l < config.layers; ++l) {
    const std::int64_t cout = static_cast<std::int64_t>(config.base_channels) << l;
    const std::string p = "d.stage" + std::to_string(l);
    stages_.push_back({params_.add(p + ".w", Shape(cout, cin, 3, 3, 3)), params_.add(p + ".b", Shape(1, cout, 1, 1, 1))});
    cin = cout;
  }
  head_ = {params_.add("d.head.w", Shape(1, cin, 3, 3, 3)), params_.add("d.head.b", Shape(1, 1, 1, 1, 1))};
}

template <typename T>
void DiscriminatorT<T>::init(Rng& rng) { init_uniform(params_, rng); }

template <typename T>
Tensor<T> DiscriminatorT<T>::forward(const Tensor<T>& candidate, const Tensor<T>& image, const Tensor<T>& mask) const {
  const Shape& s = candidate.shape();
  if (s[1] != 1 || !(image.shape() == s) || !(mask.shape() == s)) {
    throw ShapeError("discriminator: candidate " + s.str() + ", image " + image.shape().str() + ", mask " +
                     mask.shape().str() + " must be equal single-channel");
  }
  Tensor<T> x = concat<T>({candidate, image, mask});
  for (const auto& stage : stages_) x = leaky_relu(conv3d(x, stage.w, stage.b, Conv3dOptions{2, 1}), kLeakySlope);
  return mean(conv_same(x, head_), kSpatialAxes);
}

#define ARHNET_INSTANTIATE(T)                                                                      \
  template class ParamStoreT<T>;                                                                   \
  template class GeneratorT<T>;                                                                    \
  template class DiscriminatorT<T>;                                                                \
  template Tensor<T> masked_residual(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);         \
  template void init_uniform(ParamStoreT<T>&, Rng&);

ARHNET_INSTANTIATE(float)
ARHNET_INSTANTIATE(double)
#undef ARHNET_INSTANTIATE

}  // namespace arhnet
