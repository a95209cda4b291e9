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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "arhnet/tensor.hpp"

namespace arhnet {

/// Compares the analytic gradient of the scalar f() with respect to `theta`
/// against central differences (f(x + eps) - f(x - eps)) / 2 eps at the
/// probed coordinates (all of them when `probes` is empty). Returns the
/// maximum over probes of |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
template <typename T>
double finite_difference_check(const std::function<Tensor<T>()>& f, Tensor<T> theta, double eps,
                               const std::vector<std::int64_t>& probes = {});

struct GradcheckReport {
  std::string name;
  double eps = 0;
  double max_rel_error = 0;
  double tolerance = 0;
  /// (eps, max relative error) for eps in {1e-2, 1e-3, 1e-4}.
  std::vector<std::pair<double, double>> sweep;

  bool passed() const { return max_rel_error < tolerance; }
};

/// Names accepted by run_gradcheck, in suite order.
const std::vector<std::string>& gradcheck_names();

/// Runs one named check. Operator checks use float64 and tolerance 1e-3;
/// "end_to_end" differentiates the total training loss through both
/// networks at float32 with tolerance 1e-2. Throws PreconditionError for
/// unknown names.
GradcheckReport run_gradcheck(const std::string& name, std::uint64_t seed = 0, bool sweep = true);

}  // namespace arhnet
