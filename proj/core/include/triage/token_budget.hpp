// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "triage/errors.hpp"
#include "triage/frame_budget.hpp"

namespace triage {

// Cross-attention from query tokens to visual tokens at one layer,
// head-major layout: weights[(h * query_tokens + i) * visual_tokens + j].
struct AttentionTensor {
    std::vector<float> weights;
    std::int64_t heads = 0;
    std::int64_t query_tokens = 0;
    std::int64_t visual_tokens = 0;

    void validate() const;
};

// Per-visual-token key vectors used for the diversity penalty.
struct KeyStates {
    std::vector<float> vectors;  // count x dim, row-major
    std::int64_t dim = 0;

    std::int64_t count() const {
        return dim > 0 ? static_cast<std::int64_t>(vectors.size()) / dim : 0;
    }
    std::span<const float> row(std::int64_t i) const {
        return {vectors.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    void validate() const;
};

struct BudgetConfig {
    std::int64_t total_budget = 0;   // B_T, <= visual token count
    double core_ratio = 0.25;        // fraction of B_T reserved for core
    std::int64_t seeds_per_frame = 4;
    double lambda = 0.5;             // diversity weight

    void validate() const;
};

struct FrameTokenSets {
    std::vector<std::int64_t> seeds;
    std::vector<std::int64_t> context;
};

struct TokenSelection {
    std::vector<std::int64_t> core;          // sorted, global token indices
    std::vector<FrameTokenSets> per_frame;   // one entry per keyframe
    std::vector<std::int64_t> final_tokens;  // sorted union of everything
};

// s_token[j] = mean attention weight over all heads and query tokens,
// accumulated in a fixed head-major then query-token order.
std::vector<float> token_importance(const AttentionTensor& attention);

// The core_budget highest-scoring token indices (ties to the lower index),
// sorted ascending.
std::vector<std::int64_t> select_core(std::span<const float> scores,
                                      std::int64_t core_budget);

// Largest-remainder split of the context budget proportional to keyframe
// scores, clamped to per-frame candidate capacities. All-zero scores fall
// back to a uniform split.
std::vector<std::int64_t> distribute_context_budget(
    std::span<const float> keyframe_scores, std::int64_t context_budget,
    std::span<const std::int64_t> capacities);

// min(seeds_per_frame, frame_budget, |candidates|) highest-scoring
// candidates, sorted ascending.
std::vector<std::int64_t> select_seeds(std::span<const std::int64_t> candidates,
                                       std::span<const float> scores,
                                       std::int64_t seeds_per_frame,
                                       std::int64_t frame_budget);

// One-shot batched MMR: every candidate's penalty is the max key-state
// cosine against the fixed seed set only; selected tokens never join the
// penalty set. Returns the top-count adjusted scores, sorted ascending.
// An empty seed set makes the penalty zero.
std::vector<std::int64_t> batched_mmr(std::span<const std::int64_t> candidates,
                                      std::span<const std::int64_t> seeds,
                                      std::int64_t count, double lambda,
                                      const KeyStates& keys,
                                      std::span<const float> scores);

// Union with disjointness checks; overlap means an upstream bug.
TokenSelection assemble_selection(std::vector<std::int64_t> core,
                                  std::vector<FrameTokenSets> per_frame,
                                  std::int64_t total_tokens);

// Full two-phase allocation over the selected keyframes' tokens. The
// attention and key tensors must already be restricted to those tokens
// (visual_tokens == keyframes * tokens_per_frame, frame-major layout).
TokenSelection run_token_budgeting(const AttentionTensor& attention,
                                   const KeyStates& keys,
                                   const KeyframeSelection& keyframes,
                                   const BudgetConfig& config);

}  // namespace triage
