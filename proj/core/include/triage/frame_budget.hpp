// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "triage/errors.hpp"

namespace triage {

// Candidate frames: flattened pixel representations for the visual-dynamics
// components and semantic embeddings for query relevance.
struct FrameFeatureSet {
    std::vector<float> pixel_vectors;  // frame_count x pixel_dim, row-major
    std::int64_t pixel_dim = 0;
    std::vector<float> embeddings;  // frame_count x embed_dim, row-major
    std::int64_t embed_dim = 0;
    std::vector<std::int64_t> timestamps;  // strictly increasing

    std::int64_t frame_count() const {
        return static_cast<std::int64_t>(timestamps.size());
    }
    void validate() const;
};

struct QueryEmbedding {
    std::vector<float> vector;
};

struct ScoreWeights {
    float change = 1.0f / 3.0f;
    float motion = 1.0f / 3.0f;
    float relevance = 1.0f / 3.0f;

    void validate() const;
};

// Per-frame component scores (each min-max normalized to [0,1]) and their
// weighted combination.
struct FrameScoreTable {
    std::vector<float> change;
    std::vector<float> motion;
    std::vector<float> relevance;
    std::vector<float> frame;

    std::int64_t frame_count() const {
        return static_cast<std::int64_t>(frame.size());
    }
};

// Contiguous chronological buckets with per-bucket score totals and integer
// keyframe allocations summing to the keyframe budget.
struct BucketPlan {
    std::vector<std::int64_t> bounds;  // bucket_count + 1 boundaries
    std::vector<float> scores;
    std::vector<std::int64_t> allocations;

    std::int64_t bucket_count() const {
        return static_cast<std::int64_t>(allocations.size());
    }
};

struct KeyframeSelection {
    std::vector<std::int64_t> indices;  // sorted ascending, distinct
    std::vector<float> scores;          // matching combined frame scores
};

// Cosine similarity with zero vectors defined to have similarity 0.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// raw[0] = 0; raw[i] = 1 - cos(pixels[i-1], pixels[i]).
std::vector<float> scene_change_scores(const FrameFeatureSet& frames);

// raw[0] = 0; raw[i] = ||pixels[i] - pixels[i-1]||_2.
std::vector<float> motion_scores(const FrameFeatureSet& frames);

// raw[i] = cos(embeddings[i], query).
std::vector<float> relevance_scores(const FrameFeatureSet& frames,
                                    const QueryEmbedding& query);

// Min-max normalization to [0,1]; a constant input maps to all zeros.
std::vector<float> normalize_component(std::span<const float> raw);

FrameScoreTable frame_importance(const FrameFeatureSet& frames,
                                 const QueryEmbedding& query,
                                 const ScoreWeights& weights);

// Near-equal chronological buckets (earlier buckets take the surplus), one
// baseline frame each, the remaining budget apportioned to bucket score by
// largest remainder and clamped to bucket sizes. A budget smaller than the
// bucket count reduces the bucket count to match.
BucketPlan bucket_allocate(const FrameScoreTable& table, std::int64_t buckets,
                           std::int64_t keyframe_budget);

// Top-n_k frames per bucket by combined score, ties to the lower index.
KeyframeSelection select_keyframes(const FrameScoreTable& table,
                                   const BucketPlan& plan);

}  // namespace triage
