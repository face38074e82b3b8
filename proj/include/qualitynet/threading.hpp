// Copyright 2026 The QualityNet Authors. All Rights Reserved.
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

#ifndef QUALITYNET_THREADING_HPP_
#define QUALITYNET_THREADING_HPP_

#include <cstddef>
#include <functional>

namespace qnet {

// Worker cap: QNET_THREADS if set (>= 1), otherwise hardware concurrency.
int thread_budget();

// Runs fn(i) for i in [0, n). Work items must be independent; callers are
// responsible for writing results into per-index slots so the outcome does
// not depend on scheduling. The first exception thrown by any item is
// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int max_threads = 0);

}  // namespace qnet

#endif  // QUALITYNET_THREADING_HPP_
