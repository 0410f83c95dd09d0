// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "triage/oracles.hpp"
#include "triage/rng.hpp"
#include "triage/token_budget.hpp"

namespace triage {

namespace {

constexpr double kLambdaGrid[] = {0.0, 0.3, 0.7, 1.5};

bool relative_close(float a, float b, double tol) {
    const double da = a, db = b;
    return std::abs(da - db) <= tol * std::max({std::abs(da), std::abs(db), 1e-12});
}

double overlap_ratio(const std::vector<std::int64_t>& a,
                     const std::vector<std::int64_t>& b) {
    if (a.empty()) return 1.0;
    std::vector<std::int64_t> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(both));
    return static_cast<double>(both.size()) / static_cast<double>(a.size());
}

void check_attention(VerifyReport& report, const AttentionTensor& tensor) {
    const std::vector<float> engine = token_importance(tensor);
    const std::vector<float> naive = oracles::naive_token_importance(tensor);
    bool ok = engine.size() == naive.size();
    for (std::size_t j = 0; ok && j < engine.size(); ++j)
        ok = relative_close(engine[j], naive[j], 1e-6);
    ++report.attn_trials;
    if (!ok) ++report.attn_failures;
}

void check_topk(VerifyReport& report, const std::vector<float>& scores,
                std::int64_t k) {
    ++report.topk_trials;
    if (select_core(scores, k) != oracles::exhaustive_topk(scores, k))
        ++report.topk_failures;
}

void check_mmr(VerifyReport& report,
               const std::vector<std::int64_t>& candidates,
               const std::vector<std::int64_t>& seeds, std::int64_t m,
               double lambda, const KeyStates& keys,
               const std::vector<float>& scores) {
    const std::vector<std::int64_t> batched =
        batched_mmr(candidates, seeds, m, lambda, keys, scores);
    const std::vector<std::int64_t> direct =
        oracles::direct_mmr_eval(candidates, seeds, m, lambda, keys, scores);
    ++report.mmr_trials;
    if (batched != direct) ++report.mmr_failures;

    const std::vector<std::int64_t> classic = oracles::classic_sequential_mmr(
        candidates, seeds, m, lambda, keys, scores);
    const double overlap = overlap_ratio(batched, classic);
    if (lambda == 0.0) {
        report.lambda0_overlap_sum += overlap;
        ++report.lambda0_overlap_count;
    } else {
        report.overlap_sum += overlap;
        ++report.overlap_count;
    }
}

// Scores drawn partly from a coarse grid so exact ties get exercised.
float random_score(CounterRng& rng) {
    const double u = rng.next_double();
    if (rng.next_double() < 0.3)
        return static_cast<float>(std::round(u * 8.0) / 8.0);
    return static_cast<float>(u);
}

}  // namespace

VerifyReport verify_random(std::int64_t trials, std::uint64_t seed) {
    VerifyReport report;
    CounterRng rng(seed);

    for (std::int64_t trial = 0; trial < trials; ++trial) {
        // Attention averaging.
        {
            AttentionTensor tensor;
            tensor.heads = rng.next_range(1, 8);
            tensor.query_tokens = rng.next_range(1, 16);
            tensor.visual_tokens = rng.next_range(1, 256);
            tensor.weights.resize(static_cast<std::size_t>(
                tensor.heads * tensor.query_tokens * tensor.visual_tokens));
            for (float& v : tensor.weights)
                v = static_cast<float>(rng.next_double());
            check_attention(report, tensor);
        }

        // Argtop selection.
        {
            const std::int64_t n = rng.next_range(1, 64);
            std::vector<float> scores(static_cast<std::size_t>(n));
            for (float& s : scores) s = random_score(rng);
            check_topk(report, scores, rng.next_range(0, n));
        }

        // Batched MMR vs direct evaluation.
        {
            const std::int64_t nv = rng.next_range(2, 64);
            KeyStates keys;
            keys.dim = 8;
            keys.vectors.resize(static_cast<std::size_t>(nv * keys.dim));
            for (float& v : keys.vectors)
                v = static_cast<float>(rng.next_gaussian());

            std::vector<float> scores(static_cast<std::size_t>(nv));
            for (float& s : scores) s = random_score(rng);

            std::vector<std::int64_t> pool(static_cast<std::size_t>(nv));
            std::iota(pool.begin(), pool.end(), 0);
            const std::int64_t seed_count =
                std::min<std::int64_t>(rng.next_range(1, 4), nv - 1);
            // Deterministic partial shuffle to pick the seed set.
            for (std::int64_t i = 0; i < seed_count; ++i)
                std::swap(pool[static_cast<std::size_t>(i)],
                          pool[static_cast<std::size_t>(
                              rng.next_range(i, nv - 1))]);
            std::vector<std::int64_t> seeds(pool.begin(),
                                            pool.begin() + seed_count);
            std::sort(seeds.begin(), seeds.end());
            std::vector<std::int64_t> candidates(pool.begin() + seed_count,
                                                 pool.end());
            std::sort(candidates.begin(), candidates.end());

            // Occasionally clone a seed's key into a candidate to force the
            // duplicate-key penalty path.
            if (!candidates.empty() && rng.next_double() < 0.25) {
                const std::int64_t from = seeds[0];
                const std::int64_t to = candidates[static_cast<std::size_t>(
                    rng.next_range(0,
                                   static_cast<std::int64_t>(candidates.size()) -
                                       1))];
                std::copy_n(keys.vectors.begin() + from * keys.dim, keys.dim,
                            keys.vectors.begin() + to * keys.dim);
            }

            const double lambda =
                kLambdaGrid[static_cast<std::size_t>(trial) % 4];
            const std::int64_t m = rng.next_range(1, 16);
            check_mmr(report, candidates, seeds, m, lambda, keys, scores);
        }
    }
    return report;
}

VerifyReport verify_scenario(const Scenario& scenario) {
    VerifyReport report;
    check_attention(report, scenario.attention);

    const std::vector<float> scores = token_importance(scenario.attention);
    const std::int64_t nv = scenario.attention.visual_tokens;
    for (std::int64_t k : {std::int64_t{0}, nv / 4, nv / 2, nv})
        check_topk(report, scores, k);

    // Frame-by-frame MMR instances: seeds are each frame's top tokens.
    const std::int64_t t = scenario.tokens_per_frame;
    const std::int64_t n = scenario.frames.frame_count();
    for (std::int64_t f = 0; f < n; ++f) {
        std::vector<std::int64_t> tokens(static_cast<std::size_t>(t));
        std::iota(tokens.begin(), tokens.end(), f * t);
        const std::int64_t seed_count = std::min<std::int64_t>(4, t - 1);
        std::vector<std::int64_t> seeds =
            select_seeds(tokens, scores, seed_count, t);
        std::vector<std::int64_t> candidates;
        std::set_difference(tokens.begin(), tokens.end(), seeds.begin(),
                            seeds.end(), std::back_inserter(candidates));
        for (double lambda : kLambdaGrid)
            check_mmr(report, candidates, seeds,
                      std::max<std::int64_t>(1, t / 4), lambda, scenario.keys,
                      scores);
    }
    return report;
}

std::string format_report(const VerifyReport& report) {
    std::ostringstream out;
    out << "token_importance vs naive: "
        << (report.attn_trials - report.attn_failures) << "/"
        << report.attn_trials << " passed\n";
    out << "select_core vs exhaustive_topk: "
        << (report.topk_trials - report.topk_failures) << "/"
        << report.topk_trials << " passed\n";
    out << "batched_mmr vs direct_mmr_eval: "
        << (report.mmr_trials - report.mmr_failures) << "/"
        << report.mmr_trials << " passed\n";
    if (report.lambda0_overlap_count > 0)
        out << "batched/classic overlap (lambda=0): "
            << report.lambda0_overlap_sum /
                   static_cast<double>(report.lambda0_overlap_count)
            << "\n";
    if (report.overlap_count > 0)
        out << "batched/classic overlap (lambda>0): "
            << report.overlap_sum / static_cast<double>(report.overlap_count)
            << "\n";
    out << (report.all_passed() ? "all equivalence checks passed"
                                : "EQUIVALENCE FAILURES DETECTED")
        << "\n";
    return out.str();
}

}  // namespace triage
