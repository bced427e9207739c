/*
 * Copyright 2026 The GatesBand Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GATESBAND_PARALLEL_H_
#define GATESBAND_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace gatesband {

// Resolves a worker request: 0 means one per hardware thread.
int ResolveWorkers(int requested);

// Runs body(begin, end) over contiguous chunks of [0, count) on up to
// `workers` threads. Chunk boundaries depend only on `count` and the resolved
// worker count; callers that need scheduling-independent results write into
// per-index slots and reduce afterwards. The first exception thrown by a
// worker is rethrown on the calling thread.
void ParallelFor(int64_t count, int workers,
                 const std::function<void(int64_t begin, int64_t end)>& body);

}  // namespace gatesband

#endif  // GATESBAND_PARALLEL_H_
