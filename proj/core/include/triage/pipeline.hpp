// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "triage/scenario.hpp"
#include "triage/token_budget.hpp"

namespace triage {

// Decoder profile for the KV-cache cost model; defaults approximate a
// 7B-class decoder with grouped-query attention.
struct CostModel {
    std::int64_t layers = 28;
    std::int64_t kv_heads = 4;
    std::int64_t head_dim = 128;
    std::int64_t bytes_per_element = 2;

    void validate() const;
};

struct CostReport {
    std::int64_t tokens_before = 0;
    std::int64_t tokens_after = 0;
    double reduction_ratio = 0.0;
    std::int64_t kv_bytes_before = 0;
    std::int64_t kv_bytes_after = 0;
    std::int64_t attention_flops_before = 0;  // proportional to tokens^2
    std::int64_t attention_flops_after = 0;
};

struct PipelineConfig {
    // Exactly one of these picks the keyframe budget M; if neither is set,
    // M defaults to min(8, N).
    std::optional<std::int64_t> keyframe_budget;
    std::optional<double> frame_retention;

    std::int64_t buckets = 8;
    ScoreWeights weights;

    // Token budget: absolute, or as a retention ratio over the selected
    // keyframes' tokens (the absolute wins when both are set).
    std::optional<std::int64_t> token_budget;
    double retention = 0.5;

    double core_ratio = 0.25;
    std::int64_t seeds_per_frame = 4;
    double lambda = 0.5;

    bool dump_intermediates = false;
    CostModel cost_model;
};

// Final pipeline output. All indices are in the original coordinate space:
// frame indices into the N candidates, token indices into the N*T visual
// tokens.
struct SelectionManifest {
    KeyframeSelection keyframes;
    TokenSelection tokens;
    CostReport cost;
    FrameScoreTable frame_scores;

    // Resolved budgets, echoed into the manifest JSON.
    std::int64_t resolved_keyframe_budget = 0;
    std::int64_t resolved_token_budget = 0;
};

SelectionManifest run_pipeline(const Scenario& scenario,
                               const PipelineConfig& config);

// Byte-stable serialization: keys sorted, floats at 9 significant digits.
std::string manifest_to_json(const SelectionManifest& manifest,
                             const PipelineConfig& config);

// Write-temp-then-rename; never leaves a partial file at `path`.
void write_text_atomic(const std::string& text,
                       const std::filesystem::path& path);

// Intermediate artifacts (frame score table, keyframe indices, final token
// indices plus a JSON sidecar of per-frame membership) next to the manifest.
void write_intermediates(const SelectionManifest& manifest,
                         const std::filesystem::path& dir);

}  // namespace triage
