// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/token_budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triage/apportion.hpp"
#include "triage/parallel.hpp"

namespace triage {

void AttentionTensor::validate() const {
    if (heads < 1 || query_tokens < 1 || visual_tokens < 1)
        throw InputError("attention tensor must be non-empty");
    if (static_cast<std::int64_t>(weights.size()) !=
        heads * query_tokens * visual_tokens)
        throw InputError("attention tensor size does not match its shape");
    for (float v : weights)
        if (!std::isfinite(v) || v < 0.0f)
            throw InputError("attention weights must be finite and >= 0");
}

void KeyStates::validate() const {
    if (dim <= 0) throw InputError("key state dimension must be positive");
    if (static_cast<std::int64_t>(vectors.size()) % dim != 0)
        throw InputError("key state buffer size is not a multiple of dim");
    for (float v : vectors)
        if (!std::isfinite(v)) throw InputError("non-finite key state value");
}

void BudgetConfig::validate() const {
    if (total_budget < 0) throw ConfigError("token budget must be >= 0");
    if (!(core_ratio >= 0.0 && core_ratio <= 1.0))
        throw ConfigError("core ratio must lie in [0, 1]");
    if (seeds_per_frame < 0)
        throw ConfigError("seeds per frame must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

std::vector<float> token_importance(const AttentionTensor& attention) {
    attention.validate();
    const std::int64_t nv = attention.visual_tokens;
    std::vector<double> acc(static_cast<std::size_t>(nv), 0.0);
    const float* w = attention.weights.data();
    for (std::int64_t h = 0; h < attention.heads; ++h) {
        for (std::int64_t i = 0; i < attention.query_tokens; ++i) {
            const float* row = w + (h * attention.query_tokens + i) * nv;
            for (std::int64_t j = 0; j < nv; ++j)
                acc[static_cast<std::size_t>(j)] += row[j];
        }
    }
    const double scale =
        1.0 / static_cast<double>(attention.heads * attention.query_tokens);
    std::vector<float> scores(static_cast<std::size_t>(nv));
    for (std::int64_t j = 0; j < nv; ++j)
        scores[static_cast<std::size_t>(j)] =
            static_cast<float>(acc[static_cast<std::size_t>(j)] * scale);
    return scores;
}

namespace {

// Top-k positions of `values` at the given indices by (value desc, index
// asc), result sorted ascending.
std::vector<std::int64_t> top_indices(std::vector<std::int64_t> idx,
                                      std::span<const float> values,
                                      std::int64_t k) {
    k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(idx.size()));
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::int64_t a, std::int64_t b) {
                          const float va = values[static_cast<std::size_t>(a)];
                          const float vb = values[static_cast<std::size_t>(b)];
                          if (va != vb) return va > vb;
                          return a < b;
                      });
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

std::vector<std::int64_t> select_core(std::span<const float> scores,
                                      std::int64_t core_budget) {
    if (core_budget > static_cast<std::int64_t>(scores.size()))
        throw ConfigError("core budget exceeds token count");
    std::vector<std::int64_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    return top_indices(std::move(idx), scores, core_budget);
}

std::vector<std::int64_t> distribute_context_budget(
    std::span<const float> keyframe_scores, std::int64_t context_budget,
    std::span<const std::int64_t> capacities) {
    if (keyframe_scores.size() != capacities.size())
        throw InputError("frame score and capacity list lengths differ");
    std::vector<double> weights(keyframe_scores.begin(), keyframe_scores.end());
    return largest_remainder_capped(
        weights, context_budget,
        std::vector<std::int64_t>(capacities.begin(), capacities.end()));
}

std::vector<std::int64_t> select_seeds(std::span<const std::int64_t> candidates,
                                       std::span<const float> scores,
                                       std::int64_t seeds_per_frame,
                                       std::int64_t frame_budget) {
    const std::int64_t take =
        std::max<std::int64_t>(0, std::min({seeds_per_frame, frame_budget,
                                            static_cast<std::int64_t>(
                                                candidates.size())}));
    return top_indices(
        std::vector<std::int64_t>(candidates.begin(), candidates.end()),
        scores, take);
}

std::vector<std::int64_t> batched_mmr(std::span<const std::int64_t> candidates,
                                      std::span<const std::int64_t> seeds,
                                      std::int64_t count, double lambda,
                                      const KeyStates& keys,
                                      std::span<const float> scores) {
    if (count <= 0) return {};
    count = std::min(count, static_cast<std::int64_t>(candidates.size()));

    std::vector<double> adjusted(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const std::int64_t token = candidates[c];
        double penalty = 0.0;
        if (lambda != 0.0 && !seeds.empty()) {
            double best = -2.0;
            for (std::int64_t s : seeds) {
                const double sim =
                    cosine_similarity(keys.row(token), keys.row(s));
                best = std::max(best, sim);
            }
            penalty = best;
        }
        adjusted[c] = static_cast<double>(scores[static_cast<std::size_t>(token)]) -
                      lambda * penalty;
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + count, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (adjusted[a] != adjusted[b])
                              return adjusted[a] > adjusted[b];
                          return candidates[a] < candidates[b];
                      });
    std::vector<std::int64_t> picked(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        picked[static_cast<std::size_t>(i)] =
            candidates[order[static_cast<std::size_t>(i)]];
    std::sort(picked.begin(), picked.end());
    return picked;
}

TokenSelection assemble_selection(std::vector<std::int64_t> core,
                                  std::vector<FrameTokenSets> per_frame,
                                  std::int64_t total_tokens) {
    std::vector<char> taken(static_cast<std::size_t>(total_tokens), 0);
    std::vector<std::int64_t> all;
    const auto absorb = [&](const std::vector<std::int64_t>& idx) {
        for (std::int64_t i : idx) {
            if (i < 0 || i >= total_tokens)
                throw InternalError("token index out of range");
            if (taken[static_cast<std::size_t>(i)])
                throw InternalError("token selected twice across phases");
            taken[static_cast<std::size_t>(i)] = 1;
            all.push_back(i);
        }
    };
    absorb(core);
    for (const FrameTokenSets& f : per_frame) {
        absorb(f.seeds);
        absorb(f.context);
    }
    std::sort(all.begin(), all.end());

    TokenSelection selection;
    selection.core = std::move(core);
    selection.per_frame = std::move(per_frame);
    selection.final_tokens = std::move(all);
    return selection;
}

TokenSelection run_token_budgeting(const AttentionTensor& attention,
                                   const KeyStates& keys,
                                   const KeyframeSelection& keyframes,
                                   const BudgetConfig& config) {
    attention.validate();
    keys.validate();
    config.validate();

    const std::int64_t nv = attention.visual_tokens;
    const std::int64_t frames =
        static_cast<std::int64_t>(keyframes.indices.size());
    if (frames < 1) throw InputError("at least one keyframe is required");
    if (nv % frames != 0)
        throw InputError("attention layout does not match keyframe count");
    if (keys.count() != nv)
        throw InputError("key state row count does not match visual tokens");
    if (config.total_budget > nv)
        throw ConfigError("token budget exceeds visual token count");
    const std::int64_t tokens_per_frame = nv / frames;

    const std::vector<float> scores = token_importance(attention);

    const std::int64_t budget = config.total_budget;
    std::int64_t core_budget = static_cast<std::int64_t>(
        std::floor(config.core_ratio * static_cast<double>(budget)));
    if (budget >= 1 && config.core_ratio > 0.0 && core_budget < 1)
        core_budget = 1;
    core_budget = std::min(core_budget, budget);

    std::vector<std::int64_t> core = select_core(scores, core_budget);
    std::vector<char> is_core(static_cast<std::size_t>(nv), 0);
    for (std::int64_t i : core) is_core[static_cast<std::size_t>(i)] = 1;

    // Non-core candidates per frame, ascending.
    std::vector<std::vector<std::int64_t>> candidates(
        static_cast<std::size_t>(frames));
    std::vector<std::int64_t> capacities(static_cast<std::size_t>(frames));
    for (std::int64_t f = 0; f < frames; ++f) {
        auto& c = candidates[static_cast<std::size_t>(f)];
        for (std::int64_t t = f * tokens_per_frame;
             t < (f + 1) * tokens_per_frame; ++t)
            if (!is_core[static_cast<std::size_t>(t)]) c.push_back(t);
        capacities[static_cast<std::size_t>(f)] =
            static_cast<std::int64_t>(c.size());
    }

    const std::int64_t context_budget =
        budget - static_cast<std::int64_t>(core.size());
    const std::vector<std::int64_t> frame_budgets = distribute_context_budget(
        keyframes.scores, context_budget, capacities);

    std::vector<FrameTokenSets> per_frame(static_cast<std::size_t>(frames));
    parallel_for(frames, [&](std::int64_t f) {
        const auto& cand = candidates[static_cast<std::size_t>(f)];
        const std::int64_t frame_budget =
            frame_budgets[static_cast<std::size_t>(f)];
        std::vector<std::int64_t> seeds = select_seeds(
            cand, scores, config.seeds_per_frame, frame_budget);

        std::vector<std::int64_t> rest;
        rest.reserve(cand.size());
        std::set_difference(cand.begin(), cand.end(), seeds.begin(),
                            seeds.end(), std::back_inserter(rest));

        const std::int64_t m = std::max<std::int64_t>(
            0, frame_budget - static_cast<std::int64_t>(seeds.size()));
        std::vector<std::int64_t> context =
            batched_mmr(rest, seeds, m, config.lambda, keys, scores);

        per_frame[static_cast<std::size_t>(f)] = {std::move(seeds),
                                                  std::move(context)};
    });

    TokenSelection selection =
        assemble_selection(std::move(core), std::move(per_frame), nv);
    if (static_cast<std::int64_t>(selection.final_tokens.size()) !=
        std::min(budget, nv))
        throw InternalError("final token count does not match the budget");
    return selection;
}

}  // namespace triage
