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

#include "arhnet/convert.hpp"

#include <algorithm>

#include "arhnet/error.hpp"

namespace arhnet {

TensorF volume_to_tensor(const Volume3D& v) { return stack_volumes({v}); }

TensorF mask_to_tensor(const Mask3D& m) { return stack_masks({m}); }

TensorF stack_volumes(const std::vector<Volume3D>& vs) {
  if (vs.empty()) throw PreconditionError("stack_volumes: no volumes");
  const Dims3 d = vs[0].dims();
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(d.count()) * vs.size());
  for (const auto& v : vs) {
    if (!(v.dims() == d)) throw ShapeError("stack_volumes: " + v.dims().str() + " vs " + d.str());
    values.insert(values.end(), v.data().begin(), v.data().end());
  }
  return TensorF(Shape(static_cast<std::int64_t>(vs.size()), 1, d.h, d.w, d.d), std::move(values));
}

TensorF stack_masks(const std::vector<Mask3D>& ms) {
  if (ms.empty()) throw PreconditionError("stack_masks: no masks");
  const Dims3 d = ms[0].dims();
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(d.count()) * ms.size());
  for (const auto& m : ms) {
    if (!(m.dims() == d)) throw ShapeError("stack_masks: " + m.dims().str() + " vs " + d.str());
    for (auto b : m.data()) values.push_back(b ? 1.0f : 0.0f);
  }
  return TensorF(Shape(static_cast<std::int64_t>(ms.size()), 1, d.h, d.w, d.d), std::move(values));
}

Volume3D tensor_to_volume(const TensorF& t, std::int64_t n, std::int64_t c, Spacing3 spacing) {
  const Shape& s = t.shape();
  if (n < 0 || n >= s[0] || c < 0 || c >= s[1]) throw ShapeError("tensor_to_volume: index out of range for " + s.str());
  const std::int64_t sp = s.spatial();
  auto v = t.values().subspan(static_cast<std::size_t>((n * s[1] + c) * sp), static_cast<std::size_t>(sp));
  return Volume3D(Dims3{s[2], s[3], s[4]}, std::vector<float>(v.begin(), v.end()), spacing);
}

}  // namespace arhnet
