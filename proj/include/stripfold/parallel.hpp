// Copyright 2026 The stripfold Authors
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

#ifndef STRIPFOLD_PARALLEL_HPP_
#define STRIPFOLD_PARALLEL_HPP_

#include <functional>

namespace stripfold {

// Number of worker threads for requested = 0 (hardware concurrency) or the
// requested count.
int resolve_threads(int requested);

// Calls fn(i) for i in [0, n) on up to threads workers. The first exception
// thrown by any call is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace stripfold

#endif  // STRIPFOLD_PARALLEL_HPP_
