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

#include "arhnet/parallel.hpp"

#include <algorithm>
#include <atomic>

#ifdef ARHNET_HAVE_OPENMP
#include <omp.h>
#endif

namespace arhnet {
namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads = std::max(1, n); }

int num_threads() { return g_threads; }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn) {
  const int threads = g_threads;
  if (threads <= 1 || end - begin <= 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }
#ifdef ARHNET_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t i = begin; i < end; ++i) fn(i);
#else
  for (std::int64_t i = begin; i < end; ++i) fn(i);
#endif
}

}  // namespace arhnet
