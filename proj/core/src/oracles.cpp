// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace triage::oracles {

namespace {

// Local duplicate of the cosine convention (zero vectors score 0); the
// oracles keep their own arithmetic path on purpose.
double key_cosine(const KeyStates& keys, std::int64_t a, std::int64_t b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::int64_t d = 0; d < keys.dim; ++d) {
        const double x = keys.vectors[static_cast<std::size_t>(a * keys.dim + d)];
        const double y = keys.vectors[static_cast<std::size_t>(b * keys.dim + d)];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<float> naive_token_importance(const AttentionTensor& attention) {
    const std::int64_t h_count = attention.heads;
    const std::int64_t q_count = attention.query_tokens;
    const std::int64_t v_count = attention.visual_tokens;
    std::vector<float> out(static_cast<std::size_t>(v_count));
    for (std::int64_t j = 0; j < v_count; ++j) {
        double acc = 0.0;
        for (std::int64_t h = 0; h < h_count; ++h) {
            for (std::int64_t i = 0; i < q_count; ++i) {
                acc += attention.weights[static_cast<std::size_t>(
                    (h * q_count + i) * v_count + j)];
            }
        }
        out[static_cast<std::size_t>(j)] =
            static_cast<float>(acc / static_cast<double>(h_count * q_count));
    }
    return out;
}

std::vector<std::int64_t> exhaustive_topk(std::span<const float> values,
                                          std::int64_t k) {
    std::vector<std::int64_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
        const float va = values[static_cast<std::size_t>(a)];
        const float vb = values[static_cast<std::size_t>(b)];
        if (va != vb) return va > vb;
        return a < b;
    });
    idx.resize(static_cast<std::size_t>(
        std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(values.size()))));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::int64_t> direct_mmr_eval(
    std::span<const std::int64_t> candidates,
    std::span<const std::int64_t> seeds, std::int64_t count, double lambda,
    const KeyStates& keys, std::span<const float> scores) {
    std::vector<double> adjusted(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double penalty = 0.0;
        if (lambda != 0.0 && !seeds.empty()) {
            double best = -2.0;
            for (std::int64_t s : seeds)
                best = std::max(best, key_cosine(keys, candidates[c], s));
            penalty = best;
        }
        adjusted[c] =
            static_cast<double>(scores[static_cast<std::size_t>(candidates[c])]) -
            lambda * penalty;
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (adjusted[a] != adjusted[b]) return adjusted[a] > adjusted[b];
        return candidates[a] < candidates[b];
    });
    count = std::clamp<std::int64_t>(
        count, 0, static_cast<std::int64_t>(candidates.size()));
    std::vector<std::int64_t> picked(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        picked[static_cast<std::size_t>(i)] =
            candidates[order[static_cast<std::size_t>(i)]];
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<std::int64_t> classic_sequential_mmr(
    std::span<const std::int64_t> candidates,
    std::span<const std::int64_t> seeds, std::int64_t count, double lambda,
    const KeyStates& keys, std::span<const float> scores) {
    count = std::clamp<std::int64_t>(
        count, 0, static_cast<std::int64_t>(candidates.size()));

    std::vector<std::int64_t> penalty_set(seeds.begin(), seeds.end());
    std::vector<std::int64_t> remaining(candidates.begin(), candidates.end());
    std::vector<std::int64_t> picked;

    for (std::int64_t step = 0; step < count; ++step) {
        std::size_t best_pos = 0;
        double best_score = 0.0;
        bool have = false;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            double penalty = 0.0;
            if (lambda != 0.0 && !penalty_set.empty()) {
                double sim = -2.0;
                for (std::int64_t s : penalty_set)
                    sim = std::max(sim, key_cosine(keys, remaining[c], s));
                penalty = sim;
            }
            const double adjusted =
                static_cast<double>(
                    scores[static_cast<std::size_t>(remaining[c])]) -
                lambda * penalty;
            if (!have || adjusted > best_score ||
                (adjusted == best_score &&
                 remaining[c] < remaining[best_pos])) {
                best_pos = c;
                best_score = adjusted;
                have = true;
            }
        }
        const std::int64_t chosen = remaining[best_pos];
        picked.push_back(chosen);
        penalty_set.push_back(chosen);
        remaining.erase(remaining.begin() +
                        static_cast<std::ptrdiff_t>(best_pos));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace triage::oracles
