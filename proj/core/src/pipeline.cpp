// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json_writer.hpp"
#include "triage/tensor_bundle.hpp"

namespace triage {

void CostModel::validate() const {
    if (layers < 1 || kv_heads < 1 || head_dim < 1 || bytes_per_element < 1)
        throw ConfigError("cost model parameters must be positive");
}

namespace {

std::int64_t resolve_keyframe_budget(const PipelineConfig& config,
                                     std::int64_t n) {
    if (config.keyframe_budget) {
        const std::int64_t m = *config.keyframe_budget;
        if (m < 1 || m > n)
            throw ConfigError("keyframe budget must lie in [1, N]");
        return m;
    }
    if (config.frame_retention) {
        const double r = *config.frame_retention;
        if (!(r > 0.0 && r <= 1.0))
            throw ConfigError("frame retention must lie in (0, 1]");
        return std::clamp<std::int64_t>(
            std::llround(r * static_cast<double>(n)), 1, n);
    }
    return std::min<std::int64_t>(8, n);
}

std::int64_t resolve_token_budget(const PipelineConfig& config,
                                  std::int64_t selected_tokens) {
    if (config.token_budget) {
        const std::int64_t b = *config.token_budget;
        if (b < 0 || b > selected_tokens)
            throw ConfigError(
                "token budget must lie in [0, selected keyframe tokens]");
        return b;
    }
    if (!(config.retention > 0.0 && config.retention <= 1.0))
        throw ConfigError("retention ratio must lie in (0, 1]");
    return std::llround(config.retention *
                        static_cast<double>(selected_tokens));
}

std::int64_t kv_bytes(const CostModel& model, std::int64_t tokens) {
    return 2 * model.layers * model.kv_heads * model.head_dim *
           model.bytes_per_element * tokens;
}

}  // namespace

SelectionManifest run_pipeline(const Scenario& scenario,
                               const PipelineConfig& config) {
    scenario.validate();
    config.cost_model.validate();

    const std::int64_t n = scenario.frames.frame_count();
    const std::int64_t t = scenario.tokens_per_frame;

    SelectionManifest manifest;
    manifest.frame_scores =
        frame_importance(scenario.frames, scenario.query, config.weights);

    const std::int64_t m = resolve_keyframe_budget(config, n);
    const BucketPlan plan =
        bucket_allocate(manifest.frame_scores, config.buckets, m);
    manifest.keyframes = select_keyframes(manifest.frame_scores, plan);
    manifest.resolved_keyframe_budget = m;

    // Restrict attention columns and key rows to the selected keyframes'
    // token ranges, frame-major.
    const std::int64_t nv_sel = m * t;
    AttentionTensor restricted;
    restricted.heads = scenario.attention.heads;
    restricted.query_tokens = scenario.attention.query_tokens;
    restricted.visual_tokens = nv_sel;
    restricted.weights.resize(static_cast<std::size_t>(
        restricted.heads * restricted.query_tokens * nv_sel));
    const std::int64_t nv_all = scenario.attention.visual_tokens;
    for (std::int64_t h = 0; h < restricted.heads; ++h) {
        for (std::int64_t q = 0; q < restricted.query_tokens; ++q) {
            const float* src = scenario.attention.weights.data() +
                               (h * restricted.query_tokens + q) * nv_all;
            float* dst = restricted.weights.data() +
                         (h * restricted.query_tokens + q) * nv_sel;
            for (std::int64_t f = 0; f < m; ++f) {
                const std::int64_t orig = manifest.keyframes.indices[
                    static_cast<std::size_t>(f)];
                std::copy_n(src + orig * t, t, dst + f * t);
            }
        }
    }
    KeyStates restricted_keys;
    restricted_keys.dim = scenario.keys.dim;
    restricted_keys.vectors.resize(
        static_cast<std::size_t>(nv_sel * scenario.keys.dim));
    for (std::int64_t f = 0; f < m; ++f) {
        const std::int64_t orig =
            manifest.keyframes.indices[static_cast<std::size_t>(f)];
        std::copy_n(
            scenario.keys.vectors.data() + orig * t * scenario.keys.dim,
            t * scenario.keys.dim,
            restricted_keys.vectors.data() + f * t * scenario.keys.dim);
    }

    BudgetConfig budget;
    budget.total_budget = resolve_token_budget(config, nv_sel);
    budget.core_ratio = config.core_ratio;
    budget.seeds_per_frame = config.seeds_per_frame;
    budget.lambda = config.lambda;
    manifest.resolved_token_budget = budget.total_budget;

    TokenSelection restricted_sel = run_token_budgeting(
        restricted, restricted_keys, manifest.keyframes, budget);

    // Map restricted token indices back to the original N*T space. The map
    // is monotone, so sortedness survives.
    const auto to_original = [&](std::int64_t r) {
        return manifest.keyframes.indices[static_cast<std::size_t>(r / t)] * t +
               r % t;
    };
    const auto map_all = [&](std::vector<std::int64_t>& idx) {
        for (std::int64_t& i : idx) i = to_original(i);
    };
    map_all(restricted_sel.core);
    map_all(restricted_sel.final_tokens);
    for (FrameTokenSets& f : restricted_sel.per_frame) {
        map_all(f.seeds);
        map_all(f.context);
    }
    manifest.tokens = std::move(restricted_sel);

    CostReport cost;
    cost.tokens_before = n * t;
    cost.tokens_after =
        static_cast<std::int64_t>(manifest.tokens.final_tokens.size());
    cost.reduction_ratio =
        cost.tokens_before > 0
            ? 1.0 - static_cast<double>(cost.tokens_after) /
                        static_cast<double>(cost.tokens_before)
            : 0.0;
    cost.kv_bytes_before = kv_bytes(config.cost_model, cost.tokens_before);
    cost.kv_bytes_after = kv_bytes(config.cost_model, cost.tokens_after);
    cost.attention_flops_before = cost.tokens_before * cost.tokens_before;
    cost.attention_flops_after = cost.tokens_after * cost.tokens_after;
    manifest.cost = cost;

    return manifest;
}

std::string manifest_to_json(const SelectionManifest& manifest,
                             const PipelineConfig& config) {
    detail::JsonWriter w;
    w.begin_object();

    w.key("config");
    w.begin_object();
    w.key("buckets");
    w.value(config.buckets);
    w.key("core_ratio");
    w.value(config.core_ratio);
    w.key("cost_model");
    w.begin_object();
    w.key("bytes_per_element");
    w.value(config.cost_model.bytes_per_element);
    w.key("head_dim");
    w.value(config.cost_model.head_dim);
    w.key("kv_heads");
    w.value(config.cost_model.kv_heads);
    w.key("layers");
    w.value(config.cost_model.layers);
    w.end_object();
    w.key("keyframe_budget");
    w.value(manifest.resolved_keyframe_budget);
    w.key("lambda");
    w.value(config.lambda);
    w.key("seeds_per_frame");
    w.value(config.seeds_per_frame);
    w.key("token_budget");
    w.value(manifest.resolved_token_budget);
    w.key("weights");
    w.begin_object();
    w.key("change");
    w.value(static_cast<double>(config.weights.change));
    w.key("motion");
    w.value(static_cast<double>(config.weights.motion));
    w.key("relevance");
    w.value(static_cast<double>(config.weights.relevance));
    w.end_object();
    w.end_object();

    w.key("cost");
    w.begin_object();
    w.key("attention_flops_after");
    w.value(manifest.cost.attention_flops_after);
    w.key("attention_flops_before");
    w.value(manifest.cost.attention_flops_before);
    w.key("kv_bytes_after");
    w.value(manifest.cost.kv_bytes_after);
    w.key("kv_bytes_before");
    w.value(manifest.cost.kv_bytes_before);
    w.key("reduction_ratio");
    w.value(manifest.cost.reduction_ratio);
    w.key("tokens_after");
    w.value(manifest.cost.tokens_after);
    w.key("tokens_before");
    w.value(manifest.cost.tokens_before);
    w.end_object();

    w.key("keyframes");
    w.begin_object();
    w.key("indices");
    w.value(std::span<const std::int64_t>(manifest.keyframes.indices));
    w.key("scores");
    w.value(std::span<const float>(manifest.keyframes.scores));
    w.end_object();

    w.key("tokens");
    w.begin_object();
    w.key("core");
    w.value(std::span<const std::int64_t>(manifest.tokens.core));
    w.key("final");
    w.value(std::span<const std::int64_t>(manifest.tokens.final_tokens));
    w.key("per_frame");
    w.begin_array();
    for (std::size_t f = 0; f < manifest.tokens.per_frame.size(); ++f) {
        const FrameTokenSets& sets = manifest.tokens.per_frame[f];
        w.begin_object();
        w.key("context");
        w.value(std::span<const std::int64_t>(sets.context));
        w.key("frame");
        w.value(manifest.keyframes.indices[f]);
        w.key("seeds");
        w.value(std::span<const std::int64_t>(sets.seeds));
        w.end_object();
    }
    w.end_array();
    w.end_object();

    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

void write_text_atomic(const std::string& text,
                       const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw InputError("write failure on " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_intermediates(const SelectionManifest& manifest,
                         const std::filesystem::path& dir) {
    const std::int64_t n = manifest.frame_scores.frame_count();
    std::vector<float> table;
    table.reserve(static_cast<std::size_t>(4 * n));
    table.insert(table.end(), manifest.frame_scores.change.begin(),
                 manifest.frame_scores.change.end());
    table.insert(table.end(), manifest.frame_scores.motion.begin(),
                 manifest.frame_scores.motion.end());
    table.insert(table.end(), manifest.frame_scores.relevance.begin(),
                 manifest.frame_scores.relevance.end());
    table.insert(table.end(), manifest.frame_scores.frame.begin(),
                 manifest.frame_scores.frame.end());
    write_bundle_file(TensorBundle::f32("frame_scores", {4, n}, table),
                      dir / "frame_scores.trgb");
    write_bundle_file(
        TensorBundle::i64(
            "keyframes",
            {static_cast<std::int64_t>(manifest.keyframes.indices.size())},
            manifest.keyframes.indices),
        dir / "keyframes.trgb");
    write_bundle_file(
        TensorBundle::i64(
            "token_selection",
            {static_cast<std::int64_t>(manifest.tokens.final_tokens.size())},
            manifest.tokens.final_tokens),
        dir / "token_selection.trgb");

    detail::JsonWriter w;
    w.begin_object();
    w.key("core");
    w.value(std::span<const std::int64_t>(manifest.tokens.core));
    w.key("per_frame");
    w.begin_array();
    for (std::size_t f = 0; f < manifest.tokens.per_frame.size(); ++f) {
        w.begin_object();
        w.key("context");
        w.value(std::span<const std::int64_t>(
            manifest.tokens.per_frame[f].context));
        w.key("frame");
        w.value(manifest.keyframes.indices[f]);
        w.key("seeds");
        w.value(std::span<const std::int64_t>(
            manifest.tokens.per_frame[f].seeds));
        w.end_object();
    }
    w.end_array();
    w.end_object();
    std::string sidecar = w.take();
    sidecar += '\n';
    write_text_atomic(sidecar, dir / "token_selection.json");
}

}  // namespace triage
