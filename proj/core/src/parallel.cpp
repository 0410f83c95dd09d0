// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace triage {

int worker_count() {
    int workers = 0;
    if (const char* env = std::getenv("TRIAGE_THREADS")) {
        workers = std::atoi(env);
        if (workers < 0) workers = 0;
    }
    if (workers == 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers == 0) workers = 1;
    }
    return workers;
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    const int workers =
        static_cast<int>(std::min<std::int64_t>(worker_count(), n));
    if (workers <= 1 || n < 4) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace triage
