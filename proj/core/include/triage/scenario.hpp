// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "triage/frame_budget.hpp"
#include "triage/token_budget.hpp"

namespace triage {

// Planted construction facts carried by synthetic scenarios; empty for real
// inputs.
struct GroundTruth {
    std::vector<std::int64_t> planted_frames;
    std::vector<std::int64_t> planted_tokens;  // global, over all N*T tokens

    bool empty() const {
        return planted_frames.empty() && planted_tokens.empty();
    }
};

// One complete pipeline input: candidate-frame features, the query
// embedding, and the full-video attention/key tensors (all N*T tokens,
// frame-major; restriction to keyframes happens inside the pipeline).
struct Scenario {
    FrameFeatureSet frames;
    QueryEmbedding query;
    AttentionTensor attention;
    KeyStates keys;
    std::int64_t tokens_per_frame = 0;
    GroundTruth truth;

    void validate() const;
};

// Directory layout: scenario.json names the role of each .trgb bundle
// (pixels [N,D_p], frame_embeddings [N,D_e], query_embedding [D_e],
// attention [H,N_q,N*T], key_states [N*T,D_k]) and optionally carries the
// generating spec and ground truth.
Scenario load_scenario(const std::filesystem::path& dir);

}  // namespace triage
