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

#include "arhnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arhnet/error.hpp"

namespace arhnet {

namespace {

using Strides = std::array<std::int64_t, 5>;

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  Shape out;
  for (int ax = 0; ax < 5; ++ax) {
    if (a[ax] == b[ax]) {
      out[ax] = a[ax];
    } else if (a[ax] == 1) {
      out[ax] = b[ax];
    } else if (b[ax] == 1) {
      out[ax] = a[ax];
    } else {
      throw ShapeError(std::string(op) + ": shapes " + a.str() + " and " + b.str() + " are not broadcastable");
    }
  }
  return out;
}

// Strides of `x` inside the (larger) shape `out`; zero on repeated axes.
Strides broadcast_strides(const Shape& x, const Shape& out) {
  Strides s = x.strides();
  for (int ax = 0; ax < 5; ++ax) {
    if (x[ax] == 1 && out[ax] != 1) s[ax] = 0;
  }
  return s;
}

// Visits every element of `out` in storage order as f(o, ia, ib).
template <typename F>
void for_each_pair(const Shape& out, const Strides& sa, const Strides& sb, F&& f) {
  std::int64_t o = 0;
  for (std::int64_t n = 0; n < out[0]; ++n)
    for (std::int64_t c = 0; c < out[1]; ++c)
      for (std::int64_t i = 0; i < out[2]; ++i)
        for (std::int64_t j = 0; j < out[3]; ++j) {
          const std::int64_t ba = n * sa[0] + c * sa[1] + i * sa[2] + j * sa[3];
          const std::int64_t bb = n * sb[0] + c * sb[1] + i * sb[2] + j * sb[3];
          for (std::int64_t k = 0; k < out[4]; ++k) f(o++, ba + k * sa[4], bb + k * sb[4]);
        }
}

template <typename T, typename Fwd, typename DA, typename DB>
Tensor<T> binary_op(const char* name, const Tensor<T>& a, const Tensor<T>& b, Fwd fwd, DA da, DB db) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape(), name);
  const Strides sa = broadcast_strides(a.shape(), out_shape);
  const Strides sb = broadcast_strides(b.shape(), out_shape);
  std::vector<T> out(static_cast<std::size_t>(out_shape.numel()));
  const T* av = a.values().data();
  const T* bv = b.values().data();
  if (a.shape() == b.shape()) {
    for (std::size_t o = 0; o < out.size(); ++o) out[o] = fwd(av[o], bv[o]);
  } else {
    for_each_pair(out_shape, sa, sb, [&](std::int64_t o, std::int64_t ia, std::int64_t ib) { out[o] = fwd(av[ia], bv[ib]); });
  }
  auto* na = a.node().get();
  auto* nb = b.node().get();
  return detail::make_result<T>(out_shape, std::move(out), {&a, &b}, name,
                                [na, nb, out_shape, sa, sb, da, db](detail::Node<T>& self) {
                                  const T* g = self.grad.data();
                                  const T* av = na->values.data();
                                  const T* bv = nb->values.data();
                                  T* ga = na->requires_grad ? na->ensure_grad().data() : nullptr;
                                  T* gb = nb->requires_grad ? nb->ensure_grad().data() : nullptr;
                                  for_each_pair(out_shape, sa, sb, [&](std::int64_t o, std::int64_t ia, std::int64_t ib) {
                                    if (ga) ga[ia] += g[o] * da(av[ia], bv[ib]);
                                    if (gb) gb[ib] += g[o] * db(av[ia], bv[ib]);
                                  });
                                });
}

// dfdx receives (x, y) with y = f(x).
template <typename T, typename Fwd, typename Dfdx>
Tensor<T> unary_op(const char* name, const Tensor<T>& x, Fwd fwd, Dfdx dfdx) {
  auto xv = x.values();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  auto* nx = x.node().get();
  return detail::make_result<T>(x.shape(), std::move(out), {&x}, name, [nx, dfdx](detail::Node<T>& self) {
    if (!nx->requires_grad) return;
    T* gx = nx->ensure_grad().data();
    const T* g = self.grad.data();
    const T* xv = nx->values.data();
    const T* yv = self.values.data();
    const std::size_t n = self.values.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * dfdx(xv[i], yv[i]);
  });
}

// Shape after reducing `axes` to size 1.
Shape reduced_shape(const Shape& s, Axes axes) {
  Shape out = s;
  for (int ax = 0; ax < 5; ++ax) {
    if (axes.contains(ax)) out[ax] = 1;
  }
  return out;
}

// Visits every element of `s` in storage order as f(i, group) where group is
// the offset of the element's reduction group in reduced_shape(s, axes).
template <typename F>
void for_each_grouped(const Shape& s, Axes axes, F&& f) {
  const Shape r = reduced_shape(s, axes);
  const Strides gs = broadcast_strides(r, s);
  for_each_pair(s, s.strides(), gs, [&](std::int64_t, std::int64_t i, std::int64_t g) { f(i, g); });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op<T>(
      "add", a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op<T>(
      "sub", a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); }, [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op<T>(
      "mul", a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; }, [](T x, T) { return x; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double c) {
  const T k = static_cast<T>(c);
  return unary_op<T>("scale", x, [k](T v) { return k * v; }, [k](T, T) { return k; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, double c) {
  const T k = static_cast<T>(c);
  return unary_op<T>("add_scalar", x, [k](T v) { return v + k; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double slope) {
  const T s = static_cast<T>(slope);
  return unary_op<T>(
      "leaky_relu", x, [s](T v) { return v > T(0) ? v : s * v; }, [s](T v, T) { return v > T(0) ? T(1) : s; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary_op<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary_op<T>(
      "sigmoid", x,
      [](T v) {
        // Split by sign.
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return unary_op<T>(
      "abs", x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return unary_op<T>("square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return unary_op<T>(
      "sqrt", x, [](T v) { return std::sqrt(v); }, [](T, T y) { return y > T(0) ? T(0.5) / y : T(0); });
}

template <typename T>
Tensor<T> rsqrt(const Tensor<T>& x, double eps) {
  const T e = static_cast<T>(eps);
  return unary_op<T>(
      "rsqrt", x, [e](T v) { return T(1) / std::sqrt(v + e); }, [](T, T y) { return T(-0.5) * y * y * y; });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, double lo, double hi) {
  const T l = static_cast<T>(lo), h = static_cast<T>(hi);
  return unary_op<T>(
      "clamp", x, [l, h](T v) { return std::clamp(v, l, h); },
      [l, h](T v, T) { return (v > l && v < h) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> reduce(ReduceOp op, const Tensor<T>& x, Axes axes) {
  for (int ax = 5; ax < 32; ++ax) {
    if (axes.contains(ax)) throw ShapeError("reduce: invalid axis " + std::to_string(ax));
  }
  const Shape& s = x.shape();
  const Shape r = reduced_shape(s, axes);
  const std::size_t groups = static_cast<std::size_t>(r.numel());
  const std::int64_t count = s.numel() / r.numel();
  const T* xv = x.values().data();
  std::vector<T> out(groups);
  std::vector<std::int64_t> argmax;
  if (op == ReduceOp::kMax) {
    argmax.assign(groups, -1);
    for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t g) {
      if (argmax[g] < 0 || xv[i] > xv[argmax[g]]) argmax[g] = i;
    });
    for (std::size_t g = 0; g < groups; ++g) out[g] = xv[argmax[g]];
  } else {
    std::vector<double> acc(groups, 0.0);
    for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t g) { acc[g] += static_cast<double>(xv[i]); });
    for (std::size_t g = 0; g < groups; ++g) {
      out[g] = static_cast<T>(op == ReduceOp::kMean ? acc[g] / static_cast<double>(count) : acc[g]);
    }
  }
  auto* nx = x.node().get();
  const char* name = op == ReduceOp::kSum ? "sum" : op == ReduceOp::kMean ? "mean" : "max";
  return detail::make_result<T>(r, std::move(out), {&x}, name,
                                [nx, op, s, axes, count, argmax = std::move(argmax)](detail::Node<T>& self) {
                                  if (!nx->requires_grad) return;
                                  T* gx = nx->ensure_grad().data();
                                  const T* g = self.grad.data();
                                  if (op == ReduceOp::kMax) {
                                    for (std::size_t k = 0; k < argmax.size(); ++k) gx[argmax[k]] += g[k];
                                    return;
                                  }
                                  const T scale = op == ReduceOp::kMean ? T(1) / static_cast<T>(count) : T(1);
                                  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t k) { gx[i] += g[k] * scale; });
                                });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  Shape out_shape = xs[0].shape();
  out_shape[1] = 0;
  for (const auto& x : xs) {
    const Shape& s = x.shape();
    if (s[0] != xs[0].shape()[0] || s[2] != xs[0].shape()[2] || s[3] != xs[0].shape()[3] || s[4] != xs[0].shape()[4]) {
      throw ShapeError("concat: shape " + s.str() + " does not match " + xs[0].shape().str() + " outside the channel axis");
    }
    out_shape[1] += s[1];
  }
  const std::int64_t n = out_shape[0], sp = out_shape.spatial(), ctot = out_shape[1];
  std::vector<T> out(static_cast<std::size_t>(out_shape.numel()));
  std::vector<detail::Node<T>*> nodes;
  std::vector<const Tensor<T>*> inputs;
  std::int64_t c0 = 0;
  for (const auto& x : xs) {
    const std::int64_t c = x.shape()[1];
    const T* xv = x.values().data();
    for (std::int64_t b = 0; b < n; ++b) {
      std::copy_n(xv + b * c * sp, c * sp, out.data() + (b * ctot + c0) * sp);
    }
    c0 += c;
    nodes.push_back(x.node().get());
    inputs.push_back(&x);
  }
  return detail::make_result<T>(out_shape, std::move(out), inputs, "concat", [nodes, n, sp, ctot](detail::Node<T>& self) {
    std::int64_t c0 = 0;
    for (auto* node : nodes) {
      const std::int64_t c = node->shape[1];
      if (node->requires_grad) {
        T* gx = node->ensure_grad().data();
        for (std::int64_t b = 0; b < n; ++b) {
          const T* g = self.grad.data() + (b * ctot + c0) * sp;
          T* dst = gx + b * c * sp;
          for (std::int64_t i = 0; i < c * sp; ++i) dst[i] += g[i];
        }
      }
      c0 += c;
    }
  });
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count) {
  const Shape& s = x.shape();
  if (begin < 0 || count <= 0 || begin + count > s[1]) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for " + s.str());
  }
  Shape out_shape = s;
  out_shape[1] = count;
  const std::int64_t n = s[0], sp = s.spatial(), c = s[1];
  std::vector<T> out(static_cast<std::size_t>(out_shape.numel()));
  const T* xv = x.values().data();
  for (std::int64_t b = 0; b < n; ++b) std::copy_n(xv + (b * c + begin) * sp, count * sp, out.data() + b * count * sp);
  auto* nx = x.node().get();
  return detail::make_result<T>(out_shape, std::move(out), {&x}, "slice_channels",
                                [nx, n, sp, c, begin, count](detail::Node<T>& self) {
                                  if (!nx->requires_grad) return;
                                  T* gx = nx->ensure_grad().data();
                                  for (std::int64_t b = 0; b < n; ++b) {
                                    const T* g = self.grad.data() + b * count * sp;
                                    T* dst = gx + (b * c + begin) * sp;
                                    for (std::int64_t i = 0; i < count * sp; ++i) dst[i] += g[i];
                                  }
                                });
}

template <typename T>
Tensor<T> upsample_nearest2(const Tensor<T>& x) {
  const Shape& s = x.shape();
  const Shape o(s[0], s[1], 2 * s[2], 2 * s[3], 2 * s[4]);
  const std::int64_t planes = s[0] * s[1];
  std::vector<T> out(static_cast<std::size_t>(o.numel()));
  const T* xv = x.values().data();
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < o[2]; ++i)
      for (std::int64_t j = 0; j < o[3]; ++j) {
        T* dst = out.data() + ((p * o[2] + i) * o[3] + j) * o[4];
        const T* src = xv + ((p * s[2] + i / 2) * s[3] + j / 2) * s[4];
        for (std::int64_t k = 0; k < o[4]; ++k) dst[k] = src[k / 2];
      }
  auto* nx = x.node().get();
  return detail::make_result<T>(o, std::move(out), {&x}, "upsample_nearest2", [nx, s, o, planes](detail::Node<T>& self) {
    if (!nx->requires_grad) return;
    T* gx = nx->ensure_grad().data();
    for (std::int64_t p = 0; p < planes; ++p)
      for (std::int64_t i = 0; i < o[2]; ++i)
        for (std::int64_t j = 0; j < o[3]; ++j) {
          const T* g = self.grad.data() + ((p * o[2] + i) * o[3] + j) * o[4];
          T* dst = gx + ((p * s[2] + i / 2) * s[3] + j / 2) * s[4];
          for (std::int64_t k = 0; k < o[4]; ++k) dst[k / 2] += g[k];
        }
  });
}

template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
  const Shape& s = x.shape();
  if (s[2] % 2 || s[3] % 2 || s[4] % 2) throw ShapeError("avg_pool2: spatial dims of " + s.str() + " must be even");
  const Shape o(s[0], s[1], s[2] / 2, s[3] / 2, s[4] / 2);
  const std::int64_t planes = s[0] * s[1];
  std::vector<T> out(static_cast<std::size_t>(o.numel()), T(0));
  const T* xv = x.values().data();
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < o[2]; ++i)
      for (std::int64_t j = 0; j < o[3]; ++j)
        for (std::int64_t k = 0; k < o[4]; ++k) {
          T acc = T(0);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c) acc += xv[((p * s[2] + 2 * i + a) * s[3] + 2 * j + b) * s[4] + 2 * k + c];
          out[static_cast<std::size_t>(((p * o[2] + i) * o[3] + j) * o[4] + k)] = acc / T(8);
        }
  auto* nx = x.node().get();
  return detail::make_result<T>(o, std::move(out), {&x}, "avg_pool2", [nx, s, o, planes](detail::Node<T>& self) {
    if (!nx->requires_grad) return;
    T* gx = nx->ensure_grad().data();
    for (std::int64_t p = 0; p < planes; ++p)
      for (std::int64_t i = 0; i < o[2]; ++i)
        for (std::int64_t j = 0; j < o[3]; ++j)
          for (std::int64_t k = 0; k < o[4]; ++k) {
            const T g = self.grad[static_cast<std::size_t>(((p * o[2] + i) * o[3] + j) * o[4] + k)] / T(8);
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) gx[((p * s[2] + 2 * i + a) * s[3] + 2 * j + b) * s[4] + 2 * k + c] += g;
          }
  });
}

template <typename T>
Tensor<T> forward_diff(const Tensor<T>& x, int axis) {
  if (axis < 2 || axis > 4) throw ShapeError("forward_diff: axis must be spatial (2, 3 or 4)");
  const Shape& s = x.shape();
  const Strides st = s.strides();
  const std::int64_t step = st[axis];
  const std::int64_t extent = s[axis];
  std::vector<T> out(static_cast<std::size_t>(s.numel()), T(0));
  const T* xv = x.values().data();
  // Element e sits at position (e / step) % extent along the axis.
  auto has_next = [step, extent](std::int64_t e) { return (e / step) % extent + 1 < extent; };
  for (std::int64_t e = 0; e < s.numel(); ++e) {
    if (has_next(e)) out[static_cast<std::size_t>(e)] = xv[e + step] - xv[e];
  }
  auto* nx = x.node().get();
  return detail::make_result<T>(s, std::move(out), {&x}, "forward_diff", [nx, step, has_next](detail::Node<T>& self) {
    if (!nx->requires_grad) return;
    T* gx = nx->ensure_grad().data();
    const T* g = self.grad.data();
    const std::int64_t n = static_cast<std::int64_t>(self.grad.size());
    for (std::int64_t e = 0; e < n; ++e) {
      if (!has_next(e)) continue;
      gx[e + step] += g[e];
      gx[e] -= g[e];
    }
  });
}

template <typename T>
Tensor<T> standardize(const Tensor<T>& x, Axes axes, double eps) {
  const Shape& s = x.shape();
  const Shape r = reduced_shape(s, axes);
  const std::size_t groups = static_cast<std::size_t>(r.numel());
  const double count = static_cast<double>(s.numel() / r.numel());
  const T* xv = x.values().data();
  std::vector<double> mu(groups, 0.0), var(groups, 0.0);
  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t g) { mu[g] += static_cast<double>(xv[i]); });
  for (auto& m : mu) m /= count;
  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t g) {
    const double d = static_cast<double>(xv[i]) - mu[g];
    var[g] += d * d;
  });
  std::vector<double> inv_std(groups);
  for (std::size_t g = 0; g < groups; ++g) inv_std[g] = 1.0 / std::sqrt(var[g] / count + eps);
  std::vector<T> out(static_cast<std::size_t>(s.numel()));
  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t g) {
    out[static_cast<std::size_t>(i)] = static_cast<T>((static_cast<double>(xv[i]) - mu[g]) * inv_std[g]);
  });
  auto* nx = x.node().get();
  return detail::make_result<T>(s, std::move(out), {&x}, "standardize",
                                [nx, s, axes, groups, count, inv_std = std::move(inv_std)](detail::Node<T>& self) {
                                  if (!nx->requires_grad) return;
                                  T* gx = nx->ensure_grad().data();
                                  const T* g = self.grad.data();
                                  const T* y = self.values.data();
                                  std::vector<double> mean_g(groups, 0.0), mean_gy(groups, 0.0);
                                  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t k) {
                                    mean_g[k] += static_cast<double>(g[i]);
                                    mean_gy[k] += static_cast<double>(g[i]) * static_cast<double>(y[i]);
                                  });
                                  for (std::size_t k = 0; k < groups; ++k) {
                                    mean_g[k] /= count;
                                    mean_gy[k] /= count;
                                  }
                                  for_each_grouped(s, axes, [&](std::int64_t i, std::int64_t k) {
                                    const double d = inv_std[k] * (static_cast<double>(g[i]) - mean_g[k] -
                                                                   static_cast<double>(y[i]) * mean_gy[k]);
                                    gx[i] += static_cast<T>(d);
                                  });
                                });
}

#define ARHNET_INSTANTIATE_OPS(T)                                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, double);                                      \
  template Tensor<T> add_scalar(const Tensor<T>&, double);                                 \
  template Tensor<T> leaky_relu(const Tensor<T>&, double);                                 \
  template Tensor<T> relu(const Tensor<T>&);                                               \
  template Tensor<T> sigmoid(const Tensor<T>&);                                            \
  template Tensor<T> abs(const Tensor<T>&);                                                \
  template Tensor<T> square(const Tensor<T>&);                                             \
  template Tensor<T> sqrt(const Tensor<T>&);                                               \
  template Tensor<T> rsqrt(const Tensor<T>&, double);                                      \
  template Tensor<T> clamp(const Tensor<T>&, double, double);                              \
  template Tensor<T> reduce(ReduceOp, const Tensor<T>&, Axes);                             \
  template Tensor<T> concat(const std::vector<Tensor<T>>&);                                \
  template Tensor<T> slice_channels(const Tensor<T>&, std::int64_t, std::int64_t);         \
  template Tensor<T> upsample_nearest2(const Tensor<T>&);                                  \
  template Tensor<T> avg_pool2(const Tensor<T>&);                                          \
  template Tensor<T> forward_diff(const Tensor<T>&, int);                                  \
  template Tensor<T> standardize(const Tensor<T>&, Axes, double);

ARHNET_INSTANTIATE_OPS(float)
ARHNET_INSTANTIATE_OPS(double)

#undef ARHNET_INSTANTIATE_OPS

}  // namespace arhnet
