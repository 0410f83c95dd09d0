// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/frame_budget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "triage/apportion.hpp"
#include "triage/parallel.hpp"

namespace triage {

void FrameFeatureSet::validate() const {
    const std::int64_t n = frame_count();
    if (n < 1) throw InputError("at least one candidate frame is required");
    if (pixel_dim <= 0 || embed_dim <= 0)
        throw InputError("pixel_dim and embed_dim must be positive");
    if (static_cast<std::int64_t>(pixel_vectors.size()) != n * pixel_dim)
        throw InputError("pixel_vectors size does not match N x pixel_dim");
    if (static_cast<std::int64_t>(embeddings.size()) != n * embed_dim)
        throw InputError("embeddings size does not match N x embed_dim");
    for (float v : pixel_vectors)
        if (!std::isfinite(v)) throw InputError("non-finite pixel value");
    for (float v : embeddings)
        if (!std::isfinite(v)) throw InputError("non-finite embedding value");
    for (std::int64_t i = 1; i < n; ++i)
        if (timestamps[i] <= timestamps[i - 1])
            throw InputError("timestamps must be strictly increasing");
}

void ScoreWeights::validate() const {
    if (!(change >= 0.0f) || !(motion >= 0.0f) || !(relevance >= 0.0f))
        throw ConfigError("score weights must be >= 0");
    if (!(change + motion + relevance > 0.0f))
        throw ConfigError("score weights must not all be zero");
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw InputError("cosine similarity dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::span<const float> row(const std::vector<float>& data, std::int64_t dim,
                           std::int64_t i) {
    return {data.data() + i * dim, static_cast<std::size_t>(dim)};
}

}  // namespace

std::vector<float> scene_change_scores(const FrameFeatureSet& frames) {
    const std::int64_t n = frames.frame_count();
    std::vector<float> raw(static_cast<std::size_t>(n), 0.0f);
    parallel_for(n - 1, [&](std::int64_t k) {
        const std::int64_t i = k + 1;
        const double cos = cosine_similarity(
            row(frames.pixel_vectors, frames.pixel_dim, i - 1),
            row(frames.pixel_vectors, frames.pixel_dim, i));
        raw[static_cast<std::size_t>(i)] = static_cast<float>(1.0 - cos);
    });
    return raw;
}

std::vector<float> motion_scores(const FrameFeatureSet& frames) {
    const std::int64_t n = frames.frame_count();
    std::vector<float> raw(static_cast<std::size_t>(n), 0.0f);
    parallel_for(n - 1, [&](std::int64_t k) {
        const std::int64_t i = k + 1;
        const auto prev = row(frames.pixel_vectors, frames.pixel_dim, i - 1);
        const auto cur = row(frames.pixel_vectors, frames.pixel_dim, i);
        double sum = 0.0;
        for (std::size_t d = 0; d < cur.size(); ++d) {
            const double diff = static_cast<double>(cur[d]) - prev[d];
            sum += diff * diff;
        }
        raw[static_cast<std::size_t>(i)] = static_cast<float>(std::sqrt(sum));
    });
    return raw;
}

std::vector<float> relevance_scores(const FrameFeatureSet& frames,
                                    const QueryEmbedding& query) {
    const std::int64_t n = frames.frame_count();
    if (static_cast<std::int64_t>(query.vector.size()) != frames.embed_dim)
        throw InputError("query embedding dimension mismatch");
    std::vector<float> raw(static_cast<std::size_t>(n), 0.0f);
    parallel_for(n, [&](std::int64_t i) {
        raw[static_cast<std::size_t>(i)] = static_cast<float>(
            cosine_similarity(row(frames.embeddings, frames.embed_dim, i),
                              query.vector));
    });
    return raw;
}

std::vector<float> normalize_component(std::span<const float> raw) {
    std::vector<float> out(raw.size(), 0.0f);
    if (raw.empty()) return out;
    float lo = raw[0], hi = raw[0];
    for (float v : raw) {
        if (!std::isfinite(v)) throw InputError("non-finite component score");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return out;  // degenerate constant input
    const double span = static_cast<double>(hi) - lo;
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = static_cast<float>((static_cast<double>(raw[i]) - lo) / span);
    return out;
}

FrameScoreTable frame_importance(const FrameFeatureSet& frames,
                                 const QueryEmbedding& query,
                                 const ScoreWeights& weights) {
    frames.validate();
    weights.validate();

    FrameScoreTable table;
    table.change = normalize_component(scene_change_scores(frames));
    table.motion = normalize_component(motion_scores(frames));
    table.relevance = normalize_component(relevance_scores(frames, query));

    const std::size_t n = table.change.size();
    table.frame.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        table.frame[i] = weights.change * table.change[i] +
                         weights.motion * table.motion[i] +
                         weights.relevance * table.relevance[i];
    }
    return table;
}

BucketPlan bucket_allocate(const FrameScoreTable& table, std::int64_t buckets,
                           std::int64_t keyframe_budget) {
    const std::int64_t n = table.frame_count();
    if (keyframe_budget <= 0)
        throw ConfigError("keyframe budget must be positive");
    if (keyframe_budget > n)
        throw ConfigError("keyframe budget exceeds candidate count");
    if (buckets <= 0) throw ConfigError("bucket count must be positive");

    // A budget below the bucket count cannot honor one frame per bucket;
    // coarsen instead.
    const std::int64_t k = std::min(buckets, keyframe_budget);

    BucketPlan plan;
    plan.bounds.resize(static_cast<std::size_t>(k) + 1);
    const std::int64_t base = n / k;
    const std::int64_t rem = n % k;
    plan.bounds[0] = 0;
    for (std::int64_t b = 0; b < k; ++b)
        plan.bounds[static_cast<std::size_t>(b) + 1] =
            plan.bounds[static_cast<std::size_t>(b)] + base + (b < rem ? 1 : 0);

    plan.scores.resize(static_cast<std::size_t>(k));
    std::vector<double> weights(static_cast<std::size_t>(k));
    std::vector<std::int64_t> caps(static_cast<std::size_t>(k));
    for (std::int64_t b = 0; b < k; ++b) {
        double sum = 0.0;  // sequential, index order
        for (std::int64_t i = plan.bounds[static_cast<std::size_t>(b)];
             i < plan.bounds[static_cast<std::size_t>(b) + 1]; ++i)
            sum += table.frame[static_cast<std::size_t>(i)];
        const float w = static_cast<float>(sum);
        plan.scores[static_cast<std::size_t>(b)] = w;
        weights[static_cast<std::size_t>(b)] = static_cast<double>(w);
        caps[static_cast<std::size_t>(b)] =
            plan.bounds[static_cast<std::size_t>(b) + 1] -
            plan.bounds[static_cast<std::size_t>(b)] - 1;
    }

    const std::vector<std::int64_t> extras =
        largest_remainder_capped(weights, keyframe_budget - k, caps);
    plan.allocations.resize(static_cast<std::size_t>(k));
    for (std::int64_t b = 0; b < k; ++b)
        plan.allocations[static_cast<std::size_t>(b)] =
            1 + extras[static_cast<std::size_t>(b)];
    return plan;
}

KeyframeSelection select_keyframes(const FrameScoreTable& table,
                                   const BucketPlan& plan) {
    const std::int64_t k = plan.bucket_count();
    if (plan.bounds.size() != static_cast<std::size_t>(k) + 1 ||
        plan.bounds.back() != table.frame_count())
        throw InputError("bucket plan does not match score table");

    KeyframeSelection selection;
    for (std::int64_t b = 0; b < k; ++b) {
        const std::int64_t begin = plan.bounds[static_cast<std::size_t>(b)];
        const std::int64_t end = plan.bounds[static_cast<std::size_t>(b) + 1];
        std::vector<std::int64_t> idx(static_cast<std::size_t>(end - begin));
        std::iota(idx.begin(), idx.end(), begin);
        const std::int64_t take = plan.allocations[static_cast<std::size_t>(b)];
        if (take > end - begin)
            throw InputError("bucket allocation exceeds bucket size");
        std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                          [&](std::int64_t a, std::int64_t c) {
                              const float sa = table.frame[static_cast<std::size_t>(a)];
                              const float sc = table.frame[static_cast<std::size_t>(c)];
                              if (sa != sc) return sa > sc;
                              return a < c;
                          });
        idx.resize(static_cast<std::size_t>(take));
        std::sort(idx.begin(), idx.end());
        for (std::int64_t i : idx) {
            selection.indices.push_back(i);
            selection.scores.push_back(table.frame[static_cast<std::size_t>(i)]);
        }
    }
    return selection;
}

}  // namespace triage
