// Copyright 2026 The TeNCA Authors. All Rights Reserved.
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

#ifndef TENCA_PARALLEL_HPP_
#define TENCA_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace tenca {

// Worker cap: 1 in reproducible mode, else TENCA_THREADS if set, else the
// hardware concurrency.
std::size_t worker_count(bool reproducible);

// Calls fn(i) for i in [0, n) on up to `workers` threads. Work items must
// write to disjoint outputs; the first exception thrown is rethrown.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace tenca

#endif  // TENCA_PARALLEL_HPP_
