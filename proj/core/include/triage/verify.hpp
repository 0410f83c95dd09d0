// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "triage/scenario.hpp"

namespace triage {

// Outcome of the oracle cross-checks: engine kernels against their
// brute-force references, plus the batched-vs-classic MMR overlap
// statistic (reported, never asserted).
struct VerifyReport {
    std::int64_t attn_trials = 0;
    std::int64_t attn_failures = 0;
    std::int64_t topk_trials = 0;
    std::int64_t topk_failures = 0;
    std::int64_t mmr_trials = 0;
    std::int64_t mmr_failures = 0;

    double overlap_sum = 0.0;
    std::int64_t overlap_count = 0;
    double lambda0_overlap_sum = 0.0;
    std::int64_t lambda0_overlap_count = 0;

    bool all_passed() const {
        return attn_failures == 0 && topk_failures == 0 && mmr_failures == 0;
    }
};

// Randomized instances: attention tensors up to H=8, N_q=16, N_v=256 for
// the averaging check; MMR instances up to N_v=64, D_k=8 with
// lambda in {0, 0.3, 0.7, 1.5} and m in 1..16.
VerifyReport verify_random(std::int64_t trials, std::uint64_t seed);

// Same equivalence checks driven by a concrete scenario's tensors.
VerifyReport verify_scenario(const Scenario& scenario);

std::string format_report(const VerifyReport& report);

}  // namespace triage
