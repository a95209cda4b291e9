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

#include "arhnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "arhnet/arh_norm.hpp"
#include "arhnet/augment.hpp"
#include "arhnet/error.hpp"
#include "arhnet/losses.hpp"
#include "arhnet/networks.hpp"

namespace arhnet {

template <typename T>
double finite_difference_check(const std::function<Tensor<T>()>& f, Tensor<T> theta, double eps,
                               const std::vector<std::int64_t>& probes) {
  theta.zero_grad();
  backward(f());
  std::vector<double> analytic(static_cast<std::size_t>(theta.numel()), 0.0);
  if (theta.has_grad()) std::copy(theta.grad().begin(), theta.grad().end(), analytic.begin());
  theta.zero_grad();

  std::vector<std::int64_t> idx = probes;
  if (idx.empty()) {
    idx.resize(analytic.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  NoGradGuard no_grad;
  auto v = theta.mutable_values();
  double worst = 0;
  for (std::int64_t p : idx) {
    const T orig = v[p];
    const T up = static_cast<T>(orig + eps);
    const T down = static_cast<T>(orig - eps);
    v[p] = up;
    const double fp = static_cast<double>(f().item());
    v[p] = down;
    const double fm = static_cast<double>(f().item());
    v[p] = orig;
    const double numeric = (fp - fm) / (static_cast<double>(up) - static_cast<double>(down));
    const double a = analytic[static_cast<std::size_t>(p)];
    worst = std::max(worst, std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric)));
  }
  return worst;
}

template double finite_difference_check(const std::function<Tensor<float>()>&, Tensor<float>, double,
                                        const std::vector<std::int64_t>&);
template double finite_difference_check(const std::function<Tensor<double>()>&, Tensor<double>, double,
                                        const std::vector<std::int64_t>&);

namespace {

using TD = TensorD;

struct Check {
  double tolerance = 1e-3;
  double eps = 1e-6;
  std::function<double(double)> run;  // eps -> max relative error
};

TD uniform(const Shape& s, Rng& rng, double lo, double hi, bool grad = true) {
  std::vector<double> v(static_cast<std::size_t>(s.numel()));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return TD(s, std::move(v), grad);
}

// Values with |x| in [0.1, 1] and random sign, away from kinks at 0.
TD away_from_zero(const Shape& s, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(s.numel()));
  for (auto& x : v) x = rng.uniform(0.1, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  return TD(s, std::move(v), true);
}

// Values in [lo, hi] at least `gap` away from each of `kinks`.
TD avoiding(const Shape& s, Rng& rng, double lo, double hi, std::vector<double> kinks, double gap) {
  std::vector<double> v(static_cast<std::size_t>(s.numel()));
  for (auto& x : v) {
    do {
      x = rng.uniform(lo, hi);
    } while (std::any_of(kinks.begin(), kinks.end(), [&](double k) { return std::abs(x - k) < gap; }));
  }
  return TD(s, std::move(v), true);
}

// A random permutation of k / n: neighbour differences stay >= 1 / n.
TD ranked(const Shape& s, Rng& rng) {
  const std::int64_t n = s.numel();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n);
  for (std::int64_t i = n - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);
  return TD(s, std::move(v), true);
}

TD random_mask(const Shape& s, Rng& rng) {
  const std::int64_t sp = s.spatial();
  std::vector<double> v(static_cast<std::size_t>(s.numel()));
  for (std::int64_t n = 0; n < s[0]; ++n) {
    double* m = v.data() + n * sp;
    for (std::int64_t i = 0; i < sp; ++i) m[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
    m[0] = 1.0;
    m[sp - 1] = 0.0;
  }
  return TD(s, std::move(v));
}

ConvParams<double> random_conv(std::int64_t cin, std::int64_t cout, Rng& rng) {
  return {uniform(Shape(cout, cin, 3, 3, 3), rng, -0.3, 0.3), uniform(Shape(1, cout, 1, 1, 1), rng, -0.3, 0.3)};
}

ArhParams<double> random_arh(std::int64_t c, Rng& rng) {
  ArhParams<double> p;
  p.attn_reduce = random_conv(c, 1, rng);
  p.attn_fuse = random_conv(3, 1, rng);
  p.gamma = random_conv(1, c, rng);
  p.beta = random_conv(1, c, rng);
  p.gamma_f = random_conv(c, c, rng);
  p.beta_f = random_conv(c, c, rng);
  return p;
}

std::vector<TD> arh_tensors(const ArhParams<double>& p) {
  return {p.attn_reduce.w, p.attn_reduce.b, p.attn_fuse.w, p.attn_fuse.b, p.gamma.w, p.gamma.b,
          p.beta.w,        p.beta.b,        p.gamma_f.w,   p.gamma_f.b,   p.beta_f.w, p.beta_f.b};
}

// Checks sum(op() * R) for a fixed random R against every input.
Check op_check(std::function<TD()> op, std::vector<TD> inputs, Rng& rng) {
  Shape out_shape;
  {
    NoGradGuard no_grad;
    out_shape = op().shape();
  }
  const TD weights = uniform(out_shape, rng, -1.0, 1.0, false);
  std::function<TD()> f = [op, weights] { return sum(mul(op(), weights)); };
  Check c;
  c.run = [f, inputs](double eps) {
    double worst = 0;
    for (const auto& x : inputs) worst = std::max(worst, finite_difference_check<double>(f, x, eps));
    return worst;
  };
  return c;
}

// G and D of the desk architecture at 8^3, two samples with a ramp image.
template <typename T>
struct EndToEnd {
  std::shared_ptr<GeneratorT<T>> g;
  std::shared_ptr<DiscriminatorT<T>> d;
  std::function<Tensor<T>()> loss;
};

template <typename T>
EndToEnd<T> end_to_end_setup(std::uint64_t seed) {
  GeneratorConfig gc;
  gc.levels = 3;
  gc.base_channels = 4;
  auto g = std::make_shared<GeneratorT<T>>(gc);
  auto d = std::make_shared<DiscriminatorT<T>>(DiscriminatorConfig{3, 4});
  Rng rng_g = Rng::derive(seed, 0x47);
  Rng rng_d = Rng::derive(seed, 0x44);
  g->init(rng_g);
  d->init(rng_d);
  // Non-zero biases and output layer.
  Rng rng = Rng::derive(seed, 0xE2E);
  for (const auto& e : g->params().entries()) {
    if (!e.name.ends_with(".b") && e.name != "g.out.w") continue;
    Tensor<T> t = e.tensor;
    for (auto& x : t.mutable_values()) x = static_cast<T>(rng.uniform(-0.1, 0.1));
  }

  const Dims3 dims{8, 8, 8};
  const Shape shape(2, 1, 8, 8, 8);
  std::vector<T> target, input, mask, band;
  for (int n = 0; n < 2; ++n) {
    Volume3D v(dims);
    Mask3D m(dims);
    for (std::int64_t i = 0; i < 8; ++i)
      for (std::int64_t j = 0; j < 8; ++j)
        for (std::int64_t k = 0; k < 8; ++k) {
          v.at(i, j, k) = static_cast<float>(0.1 + 0.03 * i + 0.02 * j + 0.025 * k + rng.uniform(-0.003, 0.003));
          m.set(i, j, k, i >= 1 + n && i < 7 && j >= 1 && j < 7 - n && k >= 1 && k < 7);
        }
    const Volume3D pv = perturb_foreground(v, m, Perturbation{0.2, 0.15});
    const Mask3D b = extract_boundary(m, 2);
    for (std::int64_t q = 0; q < v.size(); ++q) {
      target.push_back(static_cast<T>(v.data()[q]));
      input.push_back(static_cast<T>(pv.data()[q]));
      mask.push_back(m.data()[q] ? T(1) : T(0));
      band.push_back(b.data()[q] ? T(1) : T(0));
    }
  }
  const Tensor<T> t_target(shape, std::move(target));
  const Tensor<T> t_input(shape, std::move(input));
  const Tensor<T> t_mask(shape, std::move(mask));
  const Tensor<T> t_band(shape, std::move(band));
  EndToEnd<T> e{g, d, {}};
  e.loss = [g, d, t_target, t_input, t_mask, t_band] {
    const auto out = g->forward(t_input, t_mask);
    const Tensor<T> adv = loss_adv_g(d->forward(out.harmonized, t_input, t_mask));
    return loss_total(loss_rec(t_target, out.harmonized), loss_btv(out.harmonized, t_band), adv, LossWeights{});
  };
  return e;
}

template <typename T>
struct Probe {
  Tensor<T> tensor;
  std::int64_t index;
  double magnitude;
};

// Analytic gradient of the total loss with respect to every G parameter;
// one candidate per tensor (its largest entry) or every entry.
template <typename T>
std::vector<Probe<T>> gradient_probes(EndToEnd<T>& e, bool per_tensor) {
  e.g->params().zero_grad();
  backward(e.loss());
  std::vector<Probe<T>> probes;
  for (const auto& entry : e.g->params().entries()) {
    if (!entry.tensor.has_grad()) continue;
    const auto g = entry.tensor.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      Probe<T> p{entry.tensor, static_cast<std::int64_t>(i), std::abs(static_cast<double>(g[i]))};
      if (!per_tensor) {
        probes.push_back(p);
      } else if (i == 0 || p.magnitude > probes.back().magnitude) {
        if (i > 0) probes.pop_back();
        probes.push_back(p);
      }
    }
  }
  e.g->params().zero_grad();
  e.d->params().zero_grad();
  return probes;
}

template <typename T>
Check probe_check(EndToEnd<T> e, std::vector<Probe<T>> probes, double eps, double tolerance) {
  Check c;
  c.eps = eps;
  c.tolerance = tolerance;
  c.run = [e, probes](double h) {
    double worst = 0;
    for (const auto& p : probes) worst = std::max(worst, finite_difference_check<T>(e.loss, p.tensor, h, {p.index}));
    return worst;
  };
  return c;
}

// Float32: the five output-convolution entries with the largest gradient.
Check end_to_end_check(std::uint64_t seed) {
  auto e = end_to_end_setup<float>(seed);
  auto probes = gradient_probes(e, false);
  std::erase_if(probes, [&](const auto& p) {
    return p.tensor.node() != e.g->params().find("g.out.w").node() && p.tensor.node() != e.g->params().find("g.out.b").node();
  });
  const std::size_t keep = std::min<std::size_t>(5, probes.size());
  std::partial_sort(probes.begin(), probes.begin() + static_cast<std::ptrdiff_t>(keep), probes.end(),
                    [](const auto& a, const auto& b) { return a.magnitude > b.magnitude; });
  probes.resize(keep);
  return probe_check(e, probes, 1e-3, 1e-2);
}

// Float64 test mode: the largest-gradient entry of every G tensor.
Check end_to_end_f64_check(std::uint64_t seed) {
  auto e = end_to_end_setup<double>(seed);
  return probe_check(e, gradient_probes(e, true), 1e-6, 1e-3);
}

using Builder = std::function<Check(Rng&)>;

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> checks = {
      {"add", [](Rng& r) {
         TD a = uniform(Shape(2, 3, 2, 2, 2), r, -1, 1), b = uniform(Shape(1, 3, 1, 1, 1), r, -1, 1);
         return op_check([a, b] { return add(a, b); }, {a, b}, r);
       }},
      {"sub", [](Rng& r) {
         TD a = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1), b = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1);
         return op_check([a, b] { return sub(a, b); }, {a, b}, r);
       }},
      {"mul", [](Rng& r) {
         TD a = uniform(Shape(2, 3, 2, 2, 2), r, -1, 1), b = uniform(Shape(2, 1, 2, 2, 2), r, -1, 1);
         return op_check([a, b] { return mul(a, b); }, {a, b}, r);
       }},
      {"scale", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return scale(a, 1.7); }, {a}, r);
       }},
      {"add_scalar", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return add_scalar(a, -0.3); }, {a}, r);
       }},
      {"leaky_relu", [](Rng& r) {
         TD a = away_from_zero(Shape(1, 2, 2, 2, 2), r);
         return op_check([a] { return leaky_relu(a, 0.2); }, {a}, r);
       }},
      {"relu", [](Rng& r) {
         TD a = away_from_zero(Shape(1, 2, 2, 2, 2), r);
         return op_check([a] { return relu(a); }, {a}, r);
       }},
      {"sigmoid", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, -3, 3);
         return op_check([a] { return sigmoid(a); }, {a}, r);
       }},
      {"abs", [](Rng& r) {
         TD a = away_from_zero(Shape(1, 2, 2, 2, 2), r);
         return op_check([a] { return abs(a); }, {a}, r);
       }},
      {"square", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return square(a); }, {a}, r);
       }},
      {"sqrt", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, 0.5, 2);
         return op_check([a] { return sqrt(a); }, {a}, r);
       }},
      {"rsqrt", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, 0.5, 2);
         return op_check([a] { return rsqrt(a, 1e-5); }, {a}, r);
       }},
      {"clamp", [](Rng& r) {
         TD a = avoiding(Shape(1, 2, 2, 2, 2), r, -1, 1, {-0.5, 0.5}, 0.05);
         return op_check([a] { return clamp(a, -0.5, 0.5); }, {a}, r);
       }},
      {"sum", [](Rng& r) {
         TD a = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return sum(a, kSpatialAxes); }, {a}, r);
       }},
      {"mean", [](Rng& r) {
         TD a = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return mean(a, Axes{0, 2}); }, {a}, r);
       }},
      {"max", [](Rng& r) {
         TD a = uniform(Shape(2, 3, 2, 2, 2), r, -1, 1);
         return op_check([a] { return max(a, Axes{1}); }, {a}, r);
       }},
      {"concat", [](Rng& r) {
         TD a = uniform(Shape(2, 1, 2, 2, 2), r, -1, 1), b = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1);
         return op_check([a, b] { return concat<double>({a, b}); }, {a, b}, r);
       }},
      {"slice_channels", [](Rng& r) {
         TD a = uniform(Shape(2, 3, 2, 2, 2), r, -1, 1);
         return op_check([a] { return slice_channels(a, 1, 2); }, {a}, r);
       }},
      {"upsample_nearest2", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return upsample_nearest2(a); }, {a}, r);
       }},
      {"avg_pool2", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1);
         return op_check([a] { return avg_pool2(a); }, {a}, r);
       }},
      {"forward_diff", [](Rng& r) {
         TD a = uniform(Shape(1, 2, 3, 3, 3), r, -1, 1);
         return op_check([a] { return add(add(forward_diff(a, 2), forward_diff(a, 3)), forward_diff(a, 4)); }, {a}, r);
       }},
      {"instance_norm", [](Rng& r) {
         TD a = uniform(Shape(2, 2, 3, 3, 3), r, -1, 1);
         return op_check([a] { return instance_norm(a, 1e-5); }, {a}, r);
       }},
      {"batch_norm", [](Rng& r) {
         TD a = uniform(Shape(2, 2, 2, 2, 2), r, -1, 1);
         return op_check([a] { return batch_norm(a, 1e-5); }, {a}, r);
       }},
      {"conv3d", [](Rng& r) {
         TD x = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1), w = uniform(Shape(3, 2, 3, 3, 3), r, -0.5, 0.5);
         TD b = uniform(Shape(1, 3, 1, 1, 1), r, -0.5, 0.5);
         return op_check([x, w, b] { return conv3d(x, w, b, Conv3dOptions{1, 1}); }, {x, w, b}, r);
       }},
      {"conv3d_strided", [](Rng& r) {
         TD x = uniform(Shape(2, 2, 4, 4, 4), r, -1, 1), w = uniform(Shape(2, 2, 3, 3, 3), r, -0.5, 0.5);
         TD b = uniform(Shape(1, 2, 1, 1, 1), r, -0.5, 0.5);
         return op_check([x, w, b] { return conv3d(x, w, b, Conv3dOptions{2, 1}); }, {x, w, b}, r);
       }},
      {"region_instance_norm", [](Rng& r) {
         TD f = uniform(Shape(2, 2, 4, 4, 4), r, -1, 1);
         TD m = random_mask(Shape(2, 1, 4, 4, 4), r);
         return op_check([f, m] { return region_instance_norm(f, m, 1e-5); }, {f}, r);
       }},
      {"background_stats", [](Rng& r) {
         TD f = uniform(Shape(2, 2, 4, 4, 4), r, -1, 1);
         TD m = random_mask(Shape(2, 1, 4, 4, 4), r);
         return op_check(
             [f, m] {
               const auto s = background_stats(f, m);
               return concat<double>({s.mu, s.sigma});
             },
             {f}, r);
       }},
      {"attention_map", [](Rng& r) {
         TD f = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1);
         const auto p = random_arh(2, r);
         auto inputs = arh_tensors(p);
         inputs.push_back(f);
         return op_check([f, p] { return attention_map(f, p); }, inputs, r);
       }},
      {"scaling_params", [](Rng& r) {
         TD fa = uniform(Shape(1, 1, 4, 4, 4), r, 0, 1);
         const auto p = random_arh(2, r);
         return op_check(
             [fa, p] {
               const auto [g, b] = scaling_params(fa, p);
               return concat<double>({g, b});
             },
             {fa, p.gamma.w, p.gamma.b, p.beta.w, p.beta.b}, r);
       }},
      {"foreground_scaling", [](Rng& r) {
         TD f = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1);
         TD m = random_mask(Shape(1, 1, 4, 4, 4), r);
         TD g = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1), b = uniform(Shape(1, 2, 4, 4, 4), r, -1, 1);
         const auto p = random_arh(2, r);
         return op_check(
             [f, m, g, b, p] {
               const auto [gf, bf] = foreground_scaling(g, b, background_stats(f, m), p);
               return concat<double>({gf, bf});
             },
             {f, g, b, p.gamma_f.w, p.gamma_f.b, p.beta_f.w, p.beta_f.b}, r);
       }},
      {"arh_forward", [](Rng& r) {
         TD f = uniform(Shape(2, 2, 4, 4, 4), r, -1, 1);
         TD m = random_mask(Shape(2, 1, 4, 4, 4), r);
         const auto p = random_arh(2, r);
         auto inputs = arh_tensors(p);
         inputs.push_back(f);
         return op_check([f, m, p] { return arh_forward(f, m, p); }, inputs, r);
       }},
      {"rain_norm", [](Rng& r) {
         TD f = uniform(Shape(2, 2, 4, 4, 4), r, -1, 1);
         TD m = random_mask(Shape(2, 1, 4, 4, 4), r);
         return op_check([f, m] { return baseline_norm(NormKind::kRain, f, m); }, {f}, r);
       }},
      {"loss_rec", [](Rng& r) {
         TD a = uniform(Shape(2, 1, 3, 3, 3), r, 0, 1), b = uniform(Shape(2, 1, 3, 3, 3), r, 0, 1);
         return op_check([a, b] { return loss_rec(a, b); }, {a, b}, r);
       }},
      {"loss_btv", [](Rng& r) {
         TD a = ranked(Shape(2, 1, 4, 4, 4), r);
         TD m = random_mask(Shape(2, 1, 4, 4, 4), r);
         Check c = op_check([a, m] { return loss_btv(a, m); }, {a}, r);
         c.eps = 1e-3;
         return c;
       }},
      {"loss_adv_d", [](Rng& r) {
         TD fake = avoiding(Shape(3, 1, 1, 1, 1), r, -2, 2, {-1, 1}, 0.1);
         TD real = avoiding(Shape(3, 1, 1, 1, 1), r, -2, 2, {-1, 1}, 0.1);
         return op_check([fake, real] { return loss_adv_d(fake, real); }, {fake, real}, r);
       }},
      {"loss_adv_g", [](Rng& r) {
         TD fake = uniform(Shape(3, 1, 1, 1, 1), r, -2, 2);
         return op_check([fake] { return loss_adv_g(fake); }, {fake}, r);
       }},
      {"loss_total", [](Rng& r) {
         TD a = uniform(Shape(), r, 0, 1), b = uniform(Shape(), r, 0, 1), c = uniform(Shape(), r, -1, 1);
         return op_check([a, b, c] { return loss_total(a, b, c, LossWeights{}); }, {a, b, c}, r);
       }},
  };
  return checks;
}

}  // namespace

const std::vector<std::string>& gradcheck_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    out.push_back("end_to_end_f64");
    out.push_back("end_to_end");
    return out;
  }();
  return names;
}

GradcheckReport run_gradcheck(const std::string& name, std::uint64_t seed, bool sweep) {
  Check check;
  if (name == "end_to_end") {
    check = end_to_end_check(seed);
  } else if (name == "end_to_end_f64") {
    check = end_to_end_f64_check(seed);
  } else {
    const auto& reg = registry();
    const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == name; });
    if (it == reg.end()) throw PreconditionError("unknown gradcheck op '" + name + "'");
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(it - reg.begin()));
    check = it->second(rng);
  }
  GradcheckReport report;
  report.name = name;
  report.eps = check.eps;
  report.tolerance = check.tolerance;
  report.max_rel_error = check.run(check.eps);
  if (sweep) {
    for (double eps : {1e-2, 1e-3, 1e-4}) report.sweep.emplace_back(eps, check.run(eps));
  }
  return report;
}

}  // namespace arhnet
