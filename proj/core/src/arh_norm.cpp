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

#include "arhnet/arh_norm.hpp"

#include <algorithm>

#include "arhnet/error.hpp"

namespace arhnet {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kArh:
      return "arh";
    case NormKind::kBatch:
      return "batch";
    case NormKind::kInstance:
      return "instance";
    case NormKind::kRain:
      return "rain";
  }
  return "arh";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "arh") return NormKind::kArh;
  if (name == "batch") return NormKind::kBatch;
  if (name == "instance") return NormKind::kInstance;
  if (name == "rain") return NormKind::kRain;
  throw PreconditionError("unknown norm kind '" + std::string(name) + "' (expected arh, batch, instance or rain)");
}

namespace {

template <typename T>
ConvParams<T> zero_conv(std::int64_t cin, std::int64_t cout) {
  return {Tensor<T>::zeros(Shape(cout, cin, 3, 3, 3)), Tensor<T>::zeros(Shape(1, cout, 1, 1, 1))};
}

template <typename T>
void check_mask(const Tensor<T>& f, const Tensor<T>& m, const char* op) {
  const Shape& fs = f.shape();
  const Shape& ms = m.shape();
  if (ms[0] != fs[0] || ms[1] != 1 || ms[2] != fs[2] || ms[3] != fs[3] || ms[4] != fs[4]) {
    throw ShapeError(std::string(op) + ": mask " + ms.str() + " does not match features " + fs.str());
  }
}

// Per-sample region voxel counts.
template <typename T>
std::vector<std::int64_t> region_counts(const Tensor<T>& region) {
  const Shape& s = region.shape();
  const std::int64_t sp = s.spatial();
  auto v = region.values();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(s[0]), 0);
  for (std::int64_t n = 0; n < s[0]; ++n)
    for (std::int64_t i = 0; i < sp; ++i) counts[n] += v[n * sp + i] != T(0);
  return counts;
}

// (N, 1, 1, 1, 1) tensor of 1 / max(count, 1).
template <typename T>
Tensor<T> inverse_counts(const std::vector<std::int64_t>& counts) {
  std::vector<T> v(counts.size());
  for (std::size_t n = 0; n < counts.size(); ++n) v[n] = T(1) / static_cast<T>(std::max<std::int64_t>(counts[n], 1));
  return Tensor<T>(Shape(static_cast<std::int64_t>(counts.size()), 1, 1, 1, 1), std::move(v));
}

template <typename T>
Tensor<T> complement(const Tensor<T>& m) {
  std::vector<T> v(m.values().begin(), m.values().end());
  for (auto& x : v) x = T(1) - x;
  return Tensor<T>(m.shape(), std::move(v));
}

// Statistics over `region` without the emptiness check.
template <typename T>
RegionStats<T> masked_stats(const Tensor<T>& f, const Tensor<T>& region, StatsMode mode) {
  const Tensor<T> inv = inverse_counts<T>(region_counts(region));
  const Tensor<T> masked = mul(f, region);
  const Tensor<T> mu = mul(sum(masked, kSpatialAxes), inv);
  const Tensor<T> centered = mode == StatsMode::kMasked ? mul(sub(f, mu), region) : sub(masked, mu);
  const Tensor<T> var = mul(sum(square(centered), kSpatialAxes), inv);
  return {mu, sqrt(var)};
}

template <typename T>
struct Regions {
  Tensor<T> fg;     // foreground normalization region
  Tensor<T> bg;     // background normalization region
  Tensor<T> stats;  // region for mu / sigma
  Tensor<T> gate;   // (N, 1, 1, 1, 1), 0 where the foreground is empty
  bool gated = false;
};

template <typename T>
Regions<T> resolve_regions(const Tensor<T>& m) {
  const Shape& s = m.shape();
  const std::int64_t sp = s.spatial();
  const auto fg_counts = region_counts(m);
  std::vector<T> fg(m.values().begin(), m.values().end());
  std::vector<T> bg(fg.size()), st(fg.size());
  std::vector<T> gate(static_cast<std::size_t>(s[0]), T(1));
  Regions<T> r;
  for (std::int64_t n = 0; n < s[0]; ++n) {
    T* f = fg.data() + n * sp;
    T* b = bg.data() + n * sp;
    T* t = st.data() + n * sp;
    const bool fg_empty = fg_counts[n] == 0;
    const bool bg_empty = fg_counts[n] == sp;
    for (std::int64_t i = 0; i < sp; ++i) {
      b[i] = T(1) - f[i];
      t[i] = b[i];
    }
    if (fg_empty) {
      gate[n] = T(0);
      r.gated = true;
    }
    if (bg_empty) {
      std::fill_n(b, sp, T(0));
      std::fill_n(t, sp, T(1));
    }
  }
  r.fg = Tensor<T>(s, std::move(fg));
  r.bg = Tensor<T>(s, std::move(bg));
  r.stats = Tensor<T>(s, std::move(st));
  r.gate = Tensor<T>(Shape(s[0], 1, 1, 1, 1), std::move(gate));
  return r;
}

}  // namespace

template <typename T>
ArhParams<T> ArhParams<T>::zeros(std::int64_t channels) {
  ArhParams p;
  p.attn_reduce = zero_conv<T>(channels, 1);
  p.attn_fuse = zero_conv<T>(3, 1);
  p.gamma = zero_conv<T>(1, channels);
  p.beta = zero_conv<T>(1, channels);
  p.gamma_f = zero_conv<T>(channels, channels);
  p.beta_f = zero_conv<T>(channels, channels);
  return p;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_regions(const Tensor<T>& f, const Tensor<T>& m) {
  check_mask(f, m, "split_regions");
  return {mul(f, m), mul(f, complement(m))};
}

namespace {

int downsample_factor(std::int64_t from, std::int64_t to, const std::string& what) {
  if (to <= 0 || from % to != 0) throw ShapeError("mask_resize: " + what + " is not a power-of-two reduction");
  const std::int64_t f = from / to;
  if ((f & (f - 1)) != 0) throw ShapeError("mask_resize: " + what + " is not a power-of-two reduction");
  return static_cast<int>(f);
}

}  // namespace

Mask3D mask_resize(const Mask3D& m, const Dims3& target) {
  const Dims3& d = m.dims();
  const std::string what = d.str() + " -> " + target.str();
  const int fh = downsample_factor(d.h, target.h, what);
  const int fw = downsample_factor(d.w, target.w, what);
  const int fd = downsample_factor(d.d, target.d, what);
  Mask3D out(target);
  for (std::int64_t i = 0; i < target.h; ++i)
    for (std::int64_t j = 0; j < target.w; ++j)
      for (std::int64_t k = 0; k < target.d; ++k) out.set(i, j, k, m.at(i * fh, j * fw, k * fd));
  return out;
}

template <typename T>
Tensor<T> mask_resize(const Tensor<T>& m, std::int64_t h, std::int64_t w, std::int64_t d) {
  const Shape& s = m.shape();
  const std::string what = s.str() + " -> (" + std::to_string(h) + ", " + std::to_string(w) + ", " + std::to_string(d) + ")";
  const int fh = downsample_factor(s[2], h, what);
  const int fw = downsample_factor(s[3], w, what);
  const int fd = downsample_factor(s[4], d, what);
  const Shape o(s[0], s[1], h, w, d);
  std::vector<T> out(static_cast<std::size_t>(o.numel()));
  auto v = m.values();
  std::size_t q = 0;
  for (std::int64_t p = 0; p < s[0] * s[1]; ++p)
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j)
        for (std::int64_t k = 0; k < d; ++k) out[q++] = v[((p * s[2] + i * fh) * s[3] + j * fw) * s[4] + k * fd];
  return Tensor<T>(o, std::move(out));
}

template <typename T>
Tensor<T> region_instance_norm(const Tensor<T>& f, const Tensor<T>& region, double eps) {
  check_mask(f, region, "region_instance_norm");
  const Tensor<T> inv = inverse_counts<T>(region_counts(region));
  const Tensor<T> mu = mul(sum(mul(f, region), kSpatialAxes), inv);
  const Tensor<T> centered = mul(sub(f, mu), region);
  const Tensor<T> var = mul(sum(square(centered), kSpatialAxes), inv);
  return mul(centered, rsqrt(var, eps));
}

template <typename T>
RegionStats<T> background_stats(const Tensor<T>& f, const Tensor<T>& m, StatsMode mode) {
  check_mask(f, m, "background_stats");
  const Tensor<T> bg = complement(m);
  const auto counts = region_counts(bg);
  for (std::size_t n = 0; n < counts.size(); ++n) {
    if (counts[n] == 0) throw DegenerateRegionError("background_stats: sample " + std::to_string(n) + " has no background voxel");
  }
  return masked_stats(f, bg, mode);
}

template <typename T>
Tensor<T> attention_map(const Tensor<T>& f, const ArhParams<T>& p) {
  const Axes channel{1};
  const Tensor<T> stacked = concat<T>({max(f, channel), mean(f, channel), conv_same(f, p.attn_reduce)});
  return sigmoid(conv_same(stacked, p.attn_fuse));
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> scaling_params(const Tensor<T>& fa, const ArhParams<T>& p) {
  if (fa.shape()[1] != 1) throw ShapeError("scaling_params: attention map must have one channel, got " + fa.shape().str());
  return {conv_same(fa, p.gamma), conv_same(fa, p.beta)};
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> foreground_scaling(const Tensor<T>& gamma, const Tensor<T>& beta,
                                                   const RegionStats<T>& stats, const ArhParams<T>& p) {
  if (stats.mu.shape()[1] != gamma.shape()[1]) {
    throw ShapeError("foreground_scaling: stats " + stats.mu.shape().str() + " vs gamma " + gamma.shape().str());
  }
  return {conv_same(add(gamma, stats.sigma), p.gamma_f), conv_same(add(beta, stats.mu), p.beta_f)};
}

template <typename T>
Tensor<T> arh_forward(const Tensor<T>& f, const Tensor<T>& m, const ArhParams<T>& p, const ArhOptions& options) {
  check_mask(f, m, "arh_forward");
  if (p.channels() != f.shape()[1]) {
    throw ShapeError("arh_forward: parameters for " + std::to_string(p.channels()) + " channels, features " + f.shape().str());
  }
  const Regions<T> r = resolve_regions(m);
  const Tensor<T> f_norm = region_instance_norm(f, r.fg, options.eps);
  const Tensor<T> b_norm = region_instance_norm(f, r.bg, options.eps);
  const RegionStats<T> stats = masked_stats(f, r.stats, options.stats);
  const Tensor<T> fa = attention_map(f, p);
  const auto [gamma, beta] = scaling_params(fa, p);
  const auto [gamma_f, beta_f] = foreground_scaling(gamma, beta, stats, p);
  const Tensor<T> shift = r.gated ? mul(beta_f, r.gate) : beta_f;
  return add(add(mul(f_norm, add_scalar(gamma_f, 1.0)), shift), b_norm);
}

template <typename T>
Tensor<T> baseline_norm(NormKind kind, const Tensor<T>& f, const Tensor<T>& m, const ArhOptions& options) {
  switch (kind) {
    case NormKind::kBatch:
      return batch_norm(f, options.eps);
    case NormKind::kInstance:
      return instance_norm(f, options.eps);
    case NormKind::kRain: {
      check_mask(f, m, "baseline_norm");
      const Regions<T> r = resolve_regions(m);
      const Tensor<T> f_norm = region_instance_norm(f, r.fg, options.eps);
      const RegionStats<T> stats = masked_stats(f, r.stats, options.stats);
      const Tensor<T> fg = mul(add(mul(f_norm, stats.sigma), stats.mu), r.fg);
      return add(fg, mul(f, complement(r.fg)));
    }
    case NormKind::kArh:
      break;
  }
  throw PreconditionError("baseline_norm: arh needs parameters, use arh_forward");
}

template <typename T>
Tensor<T> apply_norm(NormKind kind, const Tensor<T>& f, const Tensor<T>& m, const ArhParams<T>* p,
                     const ArhOptions& options) {
  if (kind == NormKind::kArh) {
    if (!p) throw PreconditionError("apply_norm: arh needs parameters");
    return arh_forward(f, m, *p, options);
  }
  return baseline_norm(kind, f, m, options);
}

#define ARHNET_INSTANTIATE_ARH(T)                                                                                   \
  template struct ArhParams<T>;                                                                                     \
  template std::pair<Tensor<T>, Tensor<T>> split_regions(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> mask_resize(const Tensor<T>&, std::int64_t, std::int64_t, std::int64_t);                       \
  template Tensor<T> region_instance_norm(const Tensor<T>&, const Tensor<T>&, double);                              \
  template RegionStats<T> background_stats(const Tensor<T>&, const Tensor<T>&, StatsMode);                          \
  template Tensor<T> attention_map(const Tensor<T>&, const ArhParams<T>&);                                          \
  template std::pair<Tensor<T>, Tensor<T>> scaling_params(const Tensor<T>&, const ArhParams<T>&);                   \
  template std::pair<Tensor<T>, Tensor<T>> foreground_scaling(const Tensor<T>&, const Tensor<T>&,                   \
                                                              const RegionStats<T>&, const ArhParams<T>&);          \
  template Tensor<T> arh_forward(const Tensor<T>&, const Tensor<T>&, const ArhParams<T>&, const ArhOptions&);       \
  template Tensor<T> baseline_norm(NormKind, const Tensor<T>&, const Tensor<T>&, const ArhOptions&);                \
  template Tensor<T> apply_norm(NormKind, const Tensor<T>&, const Tensor<T>&, const ArhParams<T>*, const ArhOptions&);

ARHNET_INSTANTIATE_ARH(float)
ARHNET_INSTANTIATE_ARH(double)

#undef ARHNET_INSTANTIATE_ARH

}  // namespace arhnet
