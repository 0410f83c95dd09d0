// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "triage/token_budget.hpp"

namespace triage::oracles {

// Brute-force references for the selection kernels. Deliberately slow,
// single-threaded, and sharing no arithmetic helpers with the engine; used
// by the tests and by the `verify` subcommand, not meant for production
// call sites.

std::vector<float> naive_token_importance(const AttentionTensor& attention);

// Full descending sort by (value, -index), take k, indices ascending.
std::vector<std::int64_t> exhaustive_topk(std::span<const float> values,
                                          std::int64_t k);

// Direct evaluation of the one-shot adjusted score for every candidate,
// then an exhaustive top-m.
std::vector<std::int64_t> direct_mmr_eval(
    std::span<const std::int64_t> candidates,
    std::span<const std::int64_t> seeds, std::int64_t count, double lambda,
    const KeyStates& keys, std::span<const float> scores);

// Classic greedy MMR: each selected token joins the penalty set. Kept to
// quantify how far the one-shot batch strays from it; never asserted equal.
std::vector<std::int64_t> classic_sequential_mmr(
    std::span<const std::int64_t> candidates,
    std::span<const std::int64_t> seeds, std::int64_t count, double lambda,
    const KeyStates& keys, std::span<const float> scores);

}  // namespace triage::oracles
