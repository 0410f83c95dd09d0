// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "triage/pipeline.hpp"
#include "triage/scenario.hpp"

namespace triage {

// Recipe for a reproducible synthetic scenario with planted ground truth:
// query-relevant frames separated from distractors by a relevance margin,
// high-attention tokens, and near-duplicate key-vector clusters.
struct ScenarioSpec {
    std::uint64_t rng_seed = 0;
    std::int64_t frames = 16;
    std::int64_t tokens_per_frame = 16;
    std::int64_t embed_dim = 32;
    std::int64_t pixel_dim = 64;
    std::int64_t key_dim = 8;
    std::int64_t heads = 4;
    std::int64_t query_tokens = 8;
    std::vector<std::int64_t> planted_frames;
    // Per planted frame, local token offsets given elevated attention.
    std::vector<std::vector<std::int64_t>> planted_tokens;
    float relevance_margin = 0.5f;
    std::int64_t cluster_redundancy = 0;  // near-duplicate clusters per frame

    void validate() const;
    static ScenarioSpec from_json_file(const std::filesystem::path& path);
};

// Tokens per redundancy cluster emitted by generate().
inline constexpr std::int64_t kClusterSize = 4;

// Pure function of the spec: the same seed always yields byte-identical
// scenario directories.
Scenario generate(const ScenarioSpec& spec);

void write_scenario(const Scenario& scenario, const ScenarioSpec* spec,
                    const std::filesystem::path& dir);

struct SelectionMetrics {
    double frame_recall = 0.0;
    double token_recall = 0.0;
    // Fraction of selected same-frame token pairs with key cosine >= 0.95.
    double redundancy_rate = 0.0;
};

SelectionMetrics evaluate_selection(const SelectionManifest& manifest,
                                    const GroundTruth& truth,
                                    const KeyStates& keys,
                                    std::int64_t tokens_per_frame);

}  // namespace triage
