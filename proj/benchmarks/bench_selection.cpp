// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "triage/frame_budget.hpp"
#include "triage/pipeline.hpp"
#include "triage/rng.hpp"
#include "triage/synth.hpp"
#include "triage/token_budget.hpp"

using namespace triage;

namespace {

AttentionTensor make_attention(std::int64_t h, std::int64_t nq,
                               std::int64_t nv) {
    CounterRng rng(1);
    AttentionTensor a;
    a.heads = h;
    a.query_tokens = nq;
    a.visual_tokens = nv;
    a.weights.resize(static_cast<std::size_t>(h * nq * nv));
    for (float& w : a.weights) w = static_cast<float>(rng.next_double());
    return a;
}

KeyStates make_keys(std::int64_t count, std::int64_t dim) {
    CounterRng rng(2);
    KeyStates k;
    k.dim = dim;
    k.vectors.resize(static_cast<std::size_t>(count * dim));
    for (float& v : k.vectors) v = static_cast<float>(rng.next_gaussian());
    return k;
}

void bm_token_importance(benchmark::State& state) {
    const auto a = make_attention(8, 32, state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(token_importance(a));
}
BENCHMARK(bm_token_importance)->Arg(1024)->Arg(6272)->Arg(50176);

void bm_batched_mmr(benchmark::State& state) {
    const std::int64_t nv = state.range(0);
    const auto keys = make_keys(nv, 64);
    CounterRng rng(3);
    std::vector<float> scores(static_cast<std::size_t>(nv));
    for (float& v : scores) v = static_cast<float>(rng.next_double());
    std::vector<std::int64_t> all(static_cast<std::size_t>(nv));
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::int64_t> seeds(all.begin(), all.begin() + 4);
    std::vector<std::int64_t> cands(all.begin() + 4, all.end());
    for (auto _ : state)
        benchmark::DoNotOptimize(
            batched_mmr(cands, seeds, nv / 2, 0.5, keys, scores));
}
BENCHMARK(bm_batched_mmr)->Arg(196)->Arg(1024)->Arg(6272);

void bm_bucket_allocate(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    CounterRng rng(4);
    FrameScoreTable table;
    table.frame.resize(static_cast<std::size_t>(n));
    for (float& s : table.frame) s = static_cast<float>(rng.next_double());
    table.change = table.motion = table.relevance = table.frame;
    for (auto _ : state)
        benchmark::DoNotOptimize(bucket_allocate(table, 8, n / 8));
}
BENCHMARK(bm_bucket_allocate)->Arg(256)->Arg(4096);

void bm_full_pipeline(benchmark::State& state) {
    ScenarioSpec spec;
    spec.rng_seed = 5;
    spec.frames = 256;
    spec.tokens_per_frame = 196;
    spec.heads = 8;
    spec.query_tokens = 32;
    const Scenario s = generate(spec);
    PipelineConfig cfg;
    cfg.keyframe_budget = 32;
    cfg.retention = 0.5;
    setenv("TRIAGE_THREADS", "1", 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_pipeline(s, cfg));
    unsetenv("TRIAGE_THREADS");
}
BENCHMARK(bm_full_pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
