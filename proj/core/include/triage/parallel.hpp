// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace triage {

// Worker cap from TRIAGE_THREADS (0 or unset means hardware concurrency).
int worker_count();

// Runs fn(i) for i in [0, n). Each index is touched exactly once by exactly
// one worker, so results are independent of the worker count as long as fn
// only writes to index-i slots.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace triage
