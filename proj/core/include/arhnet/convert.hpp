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

#include <vector>

#include "arhnet/tensor.hpp"
#include "arhnet/volume.hpp"

namespace arhnet {

/// (1, 1, H, W, D) tensor of the volume's values.
TensorF volume_to_tensor(const Volume3D& v);
/// (1, 1, H, W, D) tensor holding 0 or 1.
TensorF mask_to_tensor(const Mask3D& m);

/// Stacks equally sized volumes (masks) along the batch axis.
TensorF stack_volumes(const std::vector<Volume3D>& vs);
TensorF stack_masks(const std::vector<Mask3D>& ms);

/// Sample n, channel c of a tensor as a volume.
Volume3D tensor_to_volume(const TensorF& t, std::int64_t n = 0, std::int64_t c = 0, Spacing3 spacing = {});

}  // namespace arhnet
