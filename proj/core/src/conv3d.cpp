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

#include <algorithm>
#include <memory>

#include "arhnet/error.hpp"
#include "arhnet/ops.hpp"
#include "arhnet/parallel.hpp"

namespace arhnet {

namespace {

struct ConvGeom {
  std::int64_t n, cin, cout, h, w, d, k;
  int stride, pad;
  std::int64_t hp, wp, dp;  // padded input
  std::int64_t oh, ow, od;  // output
  std::int64_t plane() const { return hp * wp * dp; }
  std::int64_t out_plane() const { return oh * ow * od; }
  // Padded-input offset of output voxel (i, j, k) at kernel tap (0, 0, 0).
  std::int64_t base(std::int64_t i, std::int64_t j, std::int64_t kk) const {
    return (i * stride * wp + j * stride) * dp + kk * stride;
  }
  std::int64_t tap(std::int64_t a, std::int64_t b, std::int64_t c) const { return (a * wp + b) * dp + c; }
  // Length of the stride-1 "extended grid" spanning all valid outputs.
  std::int64_t ext() const { return ((oh - 1) * wp + (ow - 1)) * dp + od; }
};

ConvGeom make_geom(const Shape& xs, const Shape& ws, Conv3dOptions opt) {
  if (opt.stride < 1 || opt.padding < 0) throw ShapeError("conv3d: stride must be >= 1 and padding >= 0");
  if (ws[2] != ws[3] || ws[2] != ws[4]) throw ShapeError("conv3d: kernel " + ws.str() + " must be cubic");
  if (ws[1] != xs[1]) {
    throw ShapeError("conv3d: weight " + ws.str() + " expects " + std::to_string(ws[1]) + " input channels, input is " +
                     xs.str());
  }
  ConvGeom g{};
  g.n = xs[0];
  g.cin = xs[1];
  g.cout = ws[0];
  g.h = xs[2];
  g.w = xs[3];
  g.d = xs[4];
  g.k = ws[2];
  g.stride = opt.stride;
  g.pad = opt.padding;
  g.hp = g.h + 2 * g.pad;
  g.wp = g.w + 2 * g.pad;
  g.dp = g.d + 2 * g.pad;
  if (g.hp < g.k || g.wp < g.k || g.dp < g.k) {
    throw ShapeError("conv3d: kernel " + ws.str() + " larger than padded input " + xs.str());
  }
  g.oh = conv_out_extent(g.h, g.k, g.stride, g.pad);
  g.ow = conv_out_extent(g.w, g.k, g.stride, g.pad);
  g.od = conv_out_extent(g.d, g.k, g.stride, g.pad);
  return g;
}

// Zero-padded copy of sample n: (cin, hp, wp, dp).
template <typename T>
std::vector<T> pad_sample(const T* x, const ConvGeom& g, std::int64_t n) {
  std::vector<T> xp(static_cast<std::size_t>(g.cin * g.plane()), T(0));
  for (std::int64_t c = 0; c < g.cin; ++c)
    for (std::int64_t i = 0; i < g.h; ++i)
      for (std::int64_t j = 0; j < g.w; ++j) {
        const T* src = x + (((n * g.cin + c) * g.h + i) * g.w + j) * g.d;
        T* dst = xp.data() + c * g.plane() + ((i + g.pad) * g.wp + j + g.pad) * g.dp + g.pad;
        std::copy_n(src, g.d, dst);
      }
  return xp;
}

template <typename T>
T dot(const T* a, const T* b, std::int64_t len) {
  constexpr int kLanes = 16;
  T lane[kLanes] = {};
  std::int64_t q = 0;
  for (; q + kLanes <= len; q += kLanes)
    for (int l = 0; l < kLanes; ++l) lane[l] += a[q + l] * b[q + l];
  T acc = T(0);
  for (; q < len; ++q) acc += a[q] * b[q];
  for (int l = 0; l < kLanes; ++l) acc += lane[l];
  return acc;
}

template <typename T>
void forward_sample(const ConvGeom& g, const std::vector<T>& xp, const T* w, const T* b, T* out, std::int64_t n) {
  const std::int64_t taps = g.k * g.k * g.k;
  parallel_for(0, g.cout, [&](std::int64_t co) {
    T* y = out + (n * g.cout + co) * g.out_plane();
    const T bias = b ? b[co] : T(0);
    if (g.stride == 1) {
      const std::int64_t len = g.ext();
      std::vector<T> acc(static_cast<std::size_t>(len), bias);
      for (std::int64_t ci = 0; ci < g.cin; ++ci) {
        const T* wc = w + (co * g.cin + ci) * taps;
        const T* xc = xp.data() + ci * g.plane();
        for (std::int64_t a = 0; a < g.k; ++a)
          for (std::int64_t bb = 0; bb < g.k; ++bb)
            for (std::int64_t c = 0; c < g.k; ++c) {
              const T wv = wc[(a * g.k + bb) * g.k + c];
              const T* src = xc + g.tap(a, bb, c);
              for (std::int64_t q = 0; q < len; ++q) acc[q] += wv * src[q];
            }
      }
      for (std::int64_t i = 0; i < g.oh; ++i)
        for (std::int64_t j = 0; j < g.ow; ++j)
          std::copy_n(acc.data() + (i * g.wp + j) * g.dp, g.od, y + (i * g.ow + j) * g.od);
      return;
    }
    std::fill_n(y, g.out_plane(), bias);
    for (std::int64_t ci = 0; ci < g.cin; ++ci) {
      const T* wc = w + (co * g.cin + ci) * taps;
      const T* xc = xp.data() + ci * g.plane();
      for (std::int64_t a = 0; a < g.k; ++a)
        for (std::int64_t bb = 0; bb < g.k; ++bb)
          for (std::int64_t c = 0; c < g.k; ++c) {
            const T wv = wc[(a * g.k + bb) * g.k + c];
            const T* src = xc + g.tap(a, bb, c);
            std::int64_t o = 0;
            for (std::int64_t i = 0; i < g.oh; ++i)
              for (std::int64_t j = 0; j < g.ow; ++j)
                for (std::int64_t kk = 0; kk < g.od; ++kk, ++o) y[o] += wv * src[g.base(i, j, kk)];
          }
    }
  });
}

// Output gradient of sample n laid out on the padded grid as
// (cout, hp, wp, dp) with zeros off the sampled positions.
template <typename T>
std::vector<T> spread_grad(const ConvGeom& g, const T* gy, std::int64_t n) {
  std::vector<T> ge(static_cast<std::size_t>(g.cout * g.plane()), T(0));
  for (std::int64_t co = 0; co < g.cout; ++co) {
    const T* src = gy + (n * g.cout + co) * g.out_plane();
    T* dst = ge.data() + co * g.plane();
    std::int64_t o = 0;
    for (std::int64_t i = 0; i < g.oh; ++i)
      for (std::int64_t j = 0; j < g.ow; ++j)
        for (std::int64_t kk = 0; kk < g.od; ++kk, ++o) dst[g.base(i, j, kk)] = src[o];
  }
  return ge;
}

template <typename T>
void backward_sample(const ConvGeom& g, const std::vector<T>& xp, const T* w, const T* gy, T* gx, T* gw, T* gb,
                     std::int64_t n) {
  const std::int64_t taps = g.k * g.k * g.k;
  const std::vector<T> ge = spread_grad(g, gy, n);
  if (gb) {
    for (std::int64_t co = 0; co < g.cout; ++co) {
      const T* src = gy + (n * g.cout + co) * g.out_plane();
      T acc = T(0);
      for (std::int64_t o = 0; o < g.out_plane(); ++o) acc += src[o];
      gb[co] += acc;
    }
  }
  if (gw) {
    if (g.stride == 1) {
      const std::int64_t len = g.ext();
      parallel_for(0, g.cout, [&](std::int64_t co) {
        const T* gc = ge.data() + co * g.plane();
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          T* wc = gw + (co * g.cin + ci) * taps;
          const T* xc = xp.data() + ci * g.plane();
          for (std::int64_t a = 0; a < g.k; ++a)
            for (std::int64_t bb = 0; bb < g.k; ++bb)
              for (std::int64_t c = 0; c < g.k; ++c) wc[(a * g.k + bb) * g.k + c] += dot(gc, xc + g.tap(a, bb, c), len);
        }
      });
    } else {
      parallel_for(0, g.cout, [&](std::int64_t co) {
        const T* src = gy + (n * g.cout + co) * g.out_plane();
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          T* wc = gw + (co * g.cin + ci) * taps;
          const T* xc = xp.data() + ci * g.plane();
          for (std::int64_t a = 0; a < g.k; ++a)
            for (std::int64_t bb = 0; bb < g.k; ++bb)
              for (std::int64_t c = 0; c < g.k; ++c) {
                const T* xs = xc + g.tap(a, bb, c);
                T acc = T(0);
                std::int64_t o = 0;
                for (std::int64_t i = 0; i < g.oh; ++i)
                  for (std::int64_t j = 0; j < g.ow; ++j)
                    for (std::int64_t kk = 0; kk < g.od; ++kk, ++o) acc += src[o] * xs[g.base(i, j, kk)];
                wc[(a * g.k + bb) * g.k + c] += acc;
              }
        }
      });
    }
  }
  if (gx) {
    // Scatter into a padded buffer, then crop.
    const std::int64_t len = g.stride == 1 ? g.ext() : g.plane();
    parallel_for(0, g.cin, [&](std::int64_t ci) {
      std::vector<T> acc(static_cast<std::size_t>(g.plane()), T(0));
      for (std::int64_t co = 0; co < g.cout; ++co) {
        const T* wc = w + (co * g.cin + ci) * taps;
        const T* gc = ge.data() + co * g.plane();
        for (std::int64_t a = 0; a < g.k; ++a)
          for (std::int64_t bb = 0; bb < g.k; ++bb)
            for (std::int64_t c = 0; c < g.k; ++c) {
              const T wv = wc[(a * g.k + bb) * g.k + c];
              const std::int64_t off = g.tap(a, bb, c);
              T* dst = acc.data() + off;
              const std::int64_t m = std::min(len, g.plane() - off);
              for (std::int64_t q = 0; q < m; ++q) dst[q] += wv * gc[q];
            }
      }
      for (std::int64_t i = 0; i < g.h; ++i)
        for (std::int64_t j = 0; j < g.w; ++j) {
          const T* src = acc.data() + ((i + g.pad) * g.wp + j + g.pad) * g.dp + g.pad;
          T* dst = gx + (((n * g.cin + ci) * g.h + i) * g.w + j) * g.d;
          for (std::int64_t kk = 0; kk < g.d; ++kk) dst[kk] += src[kk];
        }
    });
  }
}

}  // namespace

template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Conv3dOptions options) {
  const ConvGeom g = make_geom(x.shape(), w.shape(), options);
  if (b.defined() && !(b.shape() == Shape(1, g.cout, 1, 1, 1))) {
    throw ShapeError("conv3d: bias " + b.shape().str() + " must be (1, " + std::to_string(g.cout) + ", 1, 1, 1)");
  }
  const Shape out_shape(g.n, g.cout, g.oh, g.ow, g.od);
  std::vector<T> out(static_cast<std::size_t>(out_shape.numel()));
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  const T* bv = b.defined() ? b.values().data() : nullptr;
  for (std::int64_t n = 0; n < g.n; ++n) {
    const std::vector<T> xp = pad_sample(xv, g, n);
    forward_sample(g, xp, wv, bv, out.data(), n);
  }
  auto* nx = x.node().get();
  auto* nw = w.node().get();
  auto* nb = b.defined() ? b.node().get() : nullptr;
  return detail::make_result<T>(out_shape, std::move(out), {&x, &w, &b}, "conv3d", [g, nx, nw, nb](detail::Node<T>& self) {
    T* gx = nx->requires_grad ? nx->ensure_grad().data() : nullptr;
    T* gw = nw->requires_grad ? nw->ensure_grad().data() : nullptr;
    T* gb = (nb && nb->requires_grad) ? nb->ensure_grad().data() : nullptr;
    for (std::int64_t n = 0; n < g.n; ++n) {
      const std::vector<T> xp = gw ? pad_sample(nx->values.data(), g, n) : std::vector<T>{};
      backward_sample(g, xp, nw->values.data(), self.grad.data(), gx, gw, gb, n);
    }
  });
}

template Tensor<float> conv3d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, Conv3dOptions);
template Tensor<double> conv3d(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, Conv3dOptions);

}  // namespace arhnet
