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

// Straight-line scalar reimplementations used as independent references.
// They read raw value buffers and never call the tensor operations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "arhnet/arh_norm.hpp"
#include "arhnet/metrics.hpp"
#include "arhnet/rng.hpp"
#include "arhnet/volume.hpp"

namespace arhnet::oracle {

/// Dense (N, C, H, W, D) array in double with explicit indexing.
struct Grid {
  std::int64_t n = 1, c = 1, h = 1, w = 1, d = 1;
  std::vector<double> v;

  Grid() = default;
  Grid(std::int64_t n_, std::int64_t c_, std::int64_t h_, std::int64_t w_, std::int64_t d_)
      : n(n_), c(c_), h(h_), w(w_), d(d_), v(static_cast<std::size_t>(n_ * c_ * h_ * w_ * d_), 0.0) {}

  template <typename T>
  static Grid of(const Tensor<T>& t) {
    const Shape& s = t.shape();
    Grid g(s[0], s[1], s[2], s[3], s[4]);
    auto src = t.values();
    for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = static_cast<double>(src[i]);
    return g;
  }

  double& at(std::int64_t a, std::int64_t b, std::int64_t i, std::int64_t j, std::int64_t k) {
    return v[static_cast<std::size_t>((((a * c + b) * h + i) * w + j) * d + k)];
  }
  double at(std::int64_t a, std::int64_t b, std::int64_t i, std::int64_t j, std::int64_t k) const {
    return v[static_cast<std::size_t>((((a * c + b) * h + i) * w + j) * d + k)];
  }
};

/// Cross-correlation with zero padding: bias first, then taps in
/// (ci, a, b, e) order.
inline Grid conv(const Grid& x, const Grid& w, const Grid* bias, int stride, int pad) {
  const std::int64_t k = w.h;
  const std::int64_t oh = (x.h + 2 * pad - k) / stride + 1;
  const std::int64_t ow = (x.w + 2 * pad - k) / stride + 1;
  const std::int64_t od = (x.d + 2 * pad - k) / stride + 1;
  Grid y(x.n, w.n, oh, ow, od);
  for (std::int64_t n = 0; n < x.n; ++n)
    for (std::int64_t co = 0; co < w.n; ++co)
      for (std::int64_t i = 0; i < oh; ++i)
        for (std::int64_t j = 0; j < ow; ++j)
          for (std::int64_t l = 0; l < od; ++l) {
            double acc = bias ? bias->at(0, co, 0, 0, 0) : 0.0;
            for (std::int64_t ci = 0; ci < x.c; ++ci)
              for (std::int64_t a = 0; a < k; ++a)
                for (std::int64_t b = 0; b < k; ++b)
                  for (std::int64_t e = 0; e < k; ++e) {
                    const std::int64_t xi = i * stride + a - pad;
                    const std::int64_t xj = j * stride + b - pad;
                    const std::int64_t xk = l * stride + e - pad;
                    if (xi < 0 || xj < 0 || xk < 0 || xi >= x.h || xj >= x.w || xk >= x.d) continue;
                    acc += x.at(n, ci, xi, xj, xk) * w.at(co, ci, a, b, e);
                  }
            y.at(n, co, i, j, l) = acc;
          }
  return y;
}

template <typename T>
Grid conv_same(const Grid& x, const ConvParams<T>& p) {
  const Grid w = Grid::of(p.w);
  const Grid b = Grid::of(p.b);
  return conv(x, w, &b, 1, static_cast<int>(w.h / 2));
}

struct Stats {
  std::vector<double> mu;     // [n * C + c]
  std::vector<double> sigma;  // [n * C + c]
};

/// Population mean and standard deviation over voxels where in_region(n, i, j, k).
template <typename Pred>
Stats region_stats(const Grid& f, Pred in_region) {
  Stats s;
  s.mu.assign(static_cast<std::size_t>(f.n * f.c), 0.0);
  s.sigma.assign(s.mu.size(), 0.0);
  for (std::int64_t n = 0; n < f.n; ++n)
    for (std::int64_t c = 0; c < f.c; ++c) {
      double total = 0.0;
      std::int64_t count = 0;
      for (std::int64_t i = 0; i < f.h; ++i)
        for (std::int64_t j = 0; j < f.w; ++j)
          for (std::int64_t k = 0; k < f.d; ++k)
            if (in_region(n, i, j, k)) {
              total += f.at(n, c, i, j, k);
              ++count;
            }
      const double mu = count ? total / static_cast<double>(count) : 0.0;
      double sq = 0.0;
      for (std::int64_t i = 0; i < f.h; ++i)
        for (std::int64_t j = 0; j < f.w; ++j)
          for (std::int64_t k = 0; k < f.d; ++k)
            if (in_region(n, i, j, k)) sq += (f.at(n, c, i, j, k) - mu) * (f.at(n, c, i, j, k) - mu);
      s.mu[n * f.c + c] = mu;
      s.sigma[n * f.c + c] = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
    }
  return s;
}

/// Background statistics of F under mask M (M shaped (N, 1, ...)).
inline Stats background_stats(const Grid& f, const Grid& m) {
  return region_stats(f, [&](std::int64_t n, std::int64_t i, std::int64_t j, std::int64_t k) {
    return m.at(n, 0, i, j, k) == 0.0;
  });
}

/// Region instance normalization: (F - mu) / sqrt(var + eps) inside, 0 outside.
template <typename Pred>
Grid region_norm(const Grid& f, Pred in_region, double eps) {
  const Stats s = region_stats(f, in_region);
  Grid out(f.n, f.c, f.h, f.w, f.d);
  for (std::int64_t n = 0; n < f.n; ++n)
    for (std::int64_t c = 0; c < f.c; ++c) {
      const double mu = s.mu[n * f.c + c];
      const double sd = std::sqrt(s.sigma[n * f.c + c] * s.sigma[n * f.c + c] + eps);
      for (std::int64_t i = 0; i < f.h; ++i)
        for (std::int64_t j = 0; j < f.w; ++j)
          for (std::int64_t k = 0; k < f.d; ++k)
            if (in_region(n, i, j, k)) out.at(n, c, i, j, k) = (f.at(n, c, i, j, k) - mu) / sd;
    }
  return out;
}

/// Full ARH forward pass for masks with at least one foreground and one
/// background voxel per sample.
template <typename T>
Grid arh_forward(const Grid& f, const Grid& m, const ArhParams<T>& p, double eps) {
  auto fg = [&](std::int64_t n, std::int64_t i, std::int64_t j, std::int64_t k) { return m.at(n, 0, i, j, k) != 0.0; };
  auto bg = [&](std::int64_t n, std::int64_t i, std::int64_t j, std::int64_t k) { return m.at(n, 0, i, j, k) == 0.0; };
  const Grid f_norm = region_norm(f, fg, eps);
  const Grid b_norm = region_norm(f, bg, eps);
  const Stats st = region_stats(f, bg);

  Grid pooled(f.n, 2, f.h, f.w, f.d);
  for (std::int64_t n = 0; n < f.n; ++n)
    for (std::int64_t i = 0; i < f.h; ++i)
      for (std::int64_t j = 0; j < f.w; ++j)
        for (std::int64_t k = 0; k < f.d; ++k) {
          double mx = -std::numeric_limits<double>::infinity();
          double total = 0.0;
          for (std::int64_t c = 0; c < f.c; ++c) {
            mx = std::max(mx, f.at(n, c, i, j, k));
            total += f.at(n, c, i, j, k);
          }
          pooled.at(n, 0, i, j, k) = mx;
          pooled.at(n, 1, i, j, k) = total / static_cast<double>(f.c);
        }
  const Grid reduced = conv_same(f, p.attn_reduce);
  Grid stacked(f.n, 3, f.h, f.w, f.d);
  for (std::int64_t n = 0; n < f.n; ++n)
    for (std::int64_t i = 0; i < f.h; ++i)
      for (std::int64_t j = 0; j < f.w; ++j)
        for (std::int64_t k = 0; k < f.d; ++k) {
          stacked.at(n, 0, i, j, k) = pooled.at(n, 0, i, j, k);
          stacked.at(n, 1, i, j, k) = pooled.at(n, 1, i, j, k);
          stacked.at(n, 2, i, j, k) = reduced.at(n, 0, i, j, k);
        }
  Grid fa = conv_same(stacked, p.attn_fuse);
  for (double& x : fa.v) x = 1.0 / (1.0 + std::exp(-x));

  Grid gamma = conv_same(fa, p.gamma);
  Grid beta = conv_same(fa, p.beta);
  for (std::int64_t n = 0; n < f.n; ++n)
    for (std::int64_t c = 0; c < f.c; ++c)
      for (std::int64_t i = 0; i < f.h; ++i)
        for (std::int64_t j = 0; j < f.w; ++j)
          for (std::int64_t k = 0; k < f.d; ++k) {
            gamma.at(n, c, i, j, k) += st.sigma[n * f.c + c];
            beta.at(n, c, i, j, k) += st.mu[n * f.c + c];
          }
  const Grid gamma_f = conv_same(gamma, p.gamma_f);
  const Grid beta_f = conv_same(beta, p.beta_f);

  Grid out(f.n, f.c, f.h, f.w, f.d);
  for (std::size_t q = 0; q < out.v.size(); ++q)
    out.v[q] = f_norm.v[q] * (1.0 + gamma_f.v[q]) + beta_f.v[q] + b_norm.v[q];
  return out;
}

/// Per-sample boundary-band mean of |dx| + |dy| + |dz| with forward
/// differences, averaged over the batch.
inline double loss_btv(const Grid& x, const Grid& band) {
  double total = 0.0;
  for (std::int64_t n = 0; n < x.n; ++n) {
    double s = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < x.h; ++i)
      for (std::int64_t j = 0; j < x.w; ++j)
        for (std::int64_t k = 0; k < x.d; ++k) {
          if (band.at(n, 0, i, j, k) == 0.0) continue;
          ++count;
          const double v = x.at(n, 0, i, j, k);
          if (i + 1 < x.h) s += std::abs(x.at(n, 0, i + 1, j, k) - v);
          if (j + 1 < x.w) s += std::abs(x.at(n, 0, i, j + 1, k) - v);
          if (k + 1 < x.d) s += std::abs(x.at(n, 0, i, j, k + 1) - v);
        }
    if (count) total += s / static_cast<double>(count);
  }
  return total / static_cast<double>(x.n);
}

/// Foreground voxels with a 6-neighbour that is background or outside.
inline std::vector<Index3> surface(const Mask3D& m) {
  const Dims3& d = m.dims();
  auto on = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return i >= 0 && j >= 0 && k >= 0 && i < d.h && j < d.w && k < d.d && m.at(i, j, k);
  };
  std::vector<Index3> out;
  for (std::int64_t i = 0; i < d.h; ++i)
    for (std::int64_t j = 0; j < d.w; ++j)
      for (std::int64_t k = 0; k < d.d; ++k) {
        if (!m.at(i, j, k)) continue;
        if (!on(i - 1, j, k) || !on(i + 1, j, k) || !on(i, j - 1, k) || !on(i, j + 1, k) || !on(i, j, k - 1) ||
            !on(i, j, k + 1)) {
          out.push_back({i, j, k});
        }
      }
  return out;
}

/// Every surface-to-surface pair is measured; A-to-B then B-to-A, sorted.
inline std::vector<double> surface_distances(const Mask3D& a, const Mask3D& b, const Spacing3& sp) {
  const auto sa = surface(a);
  const auto sb = surface(b);
  auto nearest = [&](const Index3& p, const std::vector<Index3>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Index3& q : set) {
      const double di = static_cast<double>(p[0] - q[0]) * sp.x;
      const double dj = static_cast<double>(p[1] - q[1]) * sp.y;
      const double dk = static_cast<double>(p[2] - q[2]) * sp.z;
      best = std::min(best, di * di + dj * dj + dk * dk);
    }
    return std::sqrt(best);
  };
  std::vector<double> out;
  for (const Index3& p : sa) out.push_back(nearest(p, sb));
  for (const Index3& p : sb) out.push_back(nearest(p, sa));
  std::sort(out.begin(), out.end());
  return out;
}

// Random instance helpers.

template <typename T>
Tensor<T> random_tensor(Rng& rng, const Shape& s, double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(static_cast<std::size_t>(s.numel()));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return Tensor<T>(s, std::move(v));
}

/// (N, 1, H, W, D) mask with at least one foreground and one background
/// voxel per sample.
template <typename T>
Tensor<T> random_mask(Rng& rng, std::int64_t n, std::int64_t h, std::int64_t w, std::int64_t d) {
  const Shape s(n, 1, h, w, d);
  std::vector<T> v(static_cast<std::size_t>(s.numel()));
  const std::int64_t sp = s.spatial();
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t i = 0; i < sp; ++i) v[b * sp + i] = rng.uniform() < 0.4 ? T(1) : T(0);
    const auto on = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(sp)));
    auto off = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(sp - 1)));
    if (off >= on) ++off;
    v[b * sp + on] = T(1);
    v[b * sp + off] = T(0);
  }
  return Tensor<T>(s, std::move(v));
}

template <typename T>
ConvParams<T> random_conv(Rng& rng, std::int64_t cin, std::int64_t cout, std::int64_t k = 3, double scale = 0.3) {
  return {random_tensor<T>(rng, Shape(cout, cin, k, k, k), -scale, scale),
          random_tensor<T>(rng, Shape(1, cout, 1, 1, 1), -scale, scale)};
}

template <typename T>
ArhParams<T> random_arh(Rng& rng, std::int64_t c) {
  ArhParams<T> p;
  p.attn_reduce = random_conv<T>(rng, c, 1);
  p.attn_fuse = random_conv<T>(rng, 3, 1);
  p.gamma = random_conv<T>(rng, 1, c);
  p.beta = random_conv<T>(rng, 1, c);
  p.gamma_f = random_conv<T>(rng, c, c);
  p.beta_f = random_conv<T>(rng, c, c);
  return p;
}

inline Mask3D random_mask3(Rng& rng, const Dims3& d, double p) {
  Mask3D m(d);
  for (auto& x : m.mutable_data()) x = rng.uniform() < p ? 1 : 0;
  if (m.empty()) m.mutable_data()[rng.uniform_index(static_cast<std::uint64_t>(d.count()))] = 1;
  return m;
}

/// Largest |a - b| over two equally sized buffers.
template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return worst;
}

}  // namespace arhnet::oracle
