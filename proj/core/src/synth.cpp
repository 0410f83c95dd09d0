// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "json_writer.hpp"
#include "triage/rng.hpp"
#include "triage/tensor_bundle.hpp"

namespace triage {

namespace {

// rng stream ids per tensor, so edits to one construction never shift the
// draws of another
enum Stream : std::uint64_t {
    kQueryStream = 1,
    kEmbeddingStream = 2,
    kPixelStream = 3,
    kAttentionStream = 4,
    kKeyStream = 5,
};

constexpr double kClusterSpread = 0.1;   // off-centroid component
constexpr double kPlantedLogit = 3.5;    // dominates every distractor row
constexpr double kClusterLogitBonus = 1.5;

void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
}

std::vector<double> gaussian_vector(CounterRng& rng, std::int64_t dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = rng.next_gaussian();
    return v;
}

// Unit vector orthogonal to `axis` (itself unit length).
std::vector<double> orthogonal_unit(CounterRng& rng,
                                    const std::vector<double>& axis) {
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::vector<double> v = gaussian_vector(
            rng, static_cast<std::int64_t>(axis.size()));
        double dot = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * axis[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * axis[i];
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 1e-12) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
            return v;
        }
    }
    throw InternalError("failed to draw an orthogonal direction");
}

}  // namespace

void ScenarioSpec::validate() const {
    if (frames < 1 || tokens_per_frame < 1)
        throw ConfigError("frames and tokens_per_frame must be positive");
    if (embed_dim < 2 || pixel_dim < 1 || key_dim < 2)
        throw ConfigError("embedding/pixel/key dimensions too small");
    if (heads < 1 || query_tokens < 1)
        throw ConfigError("heads and query_tokens must be positive");
    if (!(relevance_margin >= 0.0f && relevance_margin <= 0.9f))
        throw ConfigError("relevance margin must lie in [0, 0.9]");
    if (cluster_redundancy < 0)
        throw ConfigError("cluster_redundancy must be >= 0");
    if (cluster_redundancy * kClusterSize > tokens_per_frame)
        throw ConfigError(
            "spec infeasible: clusters do not fit into tokens_per_frame");
    if (planted_tokens.size() != planted_frames.size())
        throw ConfigError("planted_tokens must align with planted_frames");
    std::set<std::int64_t> seen;
    for (std::int64_t f : planted_frames) {
        if (f < 0 || f >= frames)
            throw ConfigError("planted frame index out of range");
        if (!seen.insert(f).second)
            throw ConfigError("duplicate planted frame index");
    }
    for (const auto& local : planted_tokens) {
        if (static_cast<std::int64_t>(local.size()) > tokens_per_frame)
            throw ConfigError("spec infeasible: more planted tokens than T");
        std::set<std::int64_t> tok;
        for (std::int64_t t : local) {
            if (t < 0 || t >= tokens_per_frame)
                throw ConfigError("planted token offset out of range");
            if (!tok.insert(t).second)
                throw ConfigError("duplicate planted token offset");
        }
    }
}

ScenarioSpec ScenarioSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid spec JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("spec must be a JSON object");

    ScenarioSpec spec;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "rng_seed") {
                spec.rng_seed = value.get<std::uint64_t>();
            } else if (key == "frames") {
                spec.frames = value.get<std::int64_t>();
            } else if (key == "tokens_per_frame") {
                spec.tokens_per_frame = value.get<std::int64_t>();
            } else if (key == "embed_dim") {
                spec.embed_dim = value.get<std::int64_t>();
            } else if (key == "pixel_dim") {
                spec.pixel_dim = value.get<std::int64_t>();
            } else if (key == "key_dim") {
                spec.key_dim = value.get<std::int64_t>();
            } else if (key == "heads") {
                spec.heads = value.get<std::int64_t>();
            } else if (key == "query_tokens") {
                spec.query_tokens = value.get<std::int64_t>();
            } else if (key == "planted_frames") {
                spec.planted_frames = value.get<std::vector<std::int64_t>>();
            } else if (key == "planted_tokens") {
                spec.planted_tokens =
                    value.get<std::vector<std::vector<std::int64_t>>>();
            } else if (key == "relevance_margin") {
                spec.relevance_margin = value.get<float>();
            } else if (key == "cluster_redundancy") {
                spec.cluster_redundancy = value.get<std::int64_t>();
            } else {
                throw ConfigError("unknown spec key '" + key + "'");
            }
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("spec key '" + key + "' has the wrong type");
        }
    }
    spec.validate();
    return spec;
}

Scenario generate(const ScenarioSpec& spec) {
    spec.validate();

    const std::int64_t n = spec.frames;
    const std::int64_t t = spec.tokens_per_frame;
    const std::int64_t nv = n * t;

    Scenario scenario;
    scenario.tokens_per_frame = t;

    // Query direction.
    CounterRng query_rng(spec.rng_seed, kQueryStream);
    std::vector<double> query = gaussian_vector(query_rng, spec.embed_dim);
    normalize(query);
    scenario.query.vector.assign(query.begin(), query.end());

    std::vector<char> planted_frame(static_cast<std::size_t>(n), 0);
    for (std::int64_t f : spec.planted_frames)
        planted_frame[static_cast<std::size_t>(f)] = 1;

    // Frame embeddings: distractors orthogonal to the query, planted frames
    // at a fixed cosine clear of the margin.
    const double planted_cos =
        std::min(0.999, static_cast<double>(spec.relevance_margin) + 0.05);
    CounterRng embed_rng(spec.rng_seed, kEmbeddingStream);
    scenario.frames.embed_dim = spec.embed_dim;
    scenario.frames.embeddings.resize(
        static_cast<std::size_t>(n * spec.embed_dim));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::vector<double> ortho = orthogonal_unit(embed_rng, query);
        std::vector<double> e(static_cast<std::size_t>(spec.embed_dim));
        if (planted_frame[static_cast<std::size_t>(i)]) {
            const double c = planted_cos;
            const double s = std::sqrt(1.0 - c * c);
            for (std::size_t d = 0; d < e.size(); ++d)
                e[d] = c * query[d] + s * ortho[d];
        } else {
            e = ortho;
        }
        for (std::size_t d = 0; d < e.size(); ++d)
            scenario.frames
                .embeddings[static_cast<std::size_t>(i * spec.embed_dim) + d] =
                static_cast<float>(e[d]);
    }

    // Pixels: plain Gaussian noise; the visual-dynamics components see an
    // unstructured video.
    CounterRng pixel_rng(spec.rng_seed, kPixelStream);
    scenario.frames.pixel_dim = spec.pixel_dim;
    scenario.frames.pixel_vectors.resize(
        static_cast<std::size_t>(n * spec.pixel_dim));
    for (float& v : scenario.frames.pixel_vectors)
        v = static_cast<float>(pixel_rng.next_gaussian());

    scenario.frames.timestamps.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        scenario.frames.timestamps[static_cast<std::size_t>(i)] = i;

    // Token-level plan: planted tokens get dominating logits, redundancy
    // clusters occupy the leading kClusterSize * C token slots of every
    // frame and receive a logit bonus so redundancy pressure actually
    // materializes in the top-scoring candidates.
    std::vector<char> planted_token(static_cast<std::size_t>(nv), 0);
    for (std::size_t p = 0; p < spec.planted_frames.size(); ++p) {
        const std::int64_t f = spec.planted_frames[p];
        for (std::int64_t local : spec.planted_tokens[p]) {
            const std::int64_t g = f * t + local;
            planted_token[static_cast<std::size_t>(g)] = 1;
            scenario.truth.planted_tokens.push_back(g);
        }
    }
    std::sort(scenario.truth.planted_tokens.begin(),
              scenario.truth.planted_tokens.end());
    scenario.truth.planted_frames = spec.planted_frames;
    std::sort(scenario.truth.planted_frames.begin(),
              scenario.truth.planted_frames.end());

    const std::int64_t clustered_per_frame =
        spec.cluster_redundancy * kClusterSize;
    const auto in_cluster = [&](std::int64_t global) {
        return global % t < clustered_per_frame;
    };

    // Attention: softmax rows over uniform logits plus the structural
    // bonuses above, so every row sums to one.
    CounterRng attn_rng(spec.rng_seed, kAttentionStream);
    scenario.attention.heads = spec.heads;
    scenario.attention.query_tokens = spec.query_tokens;
    scenario.attention.visual_tokens = nv;
    scenario.attention.weights.resize(
        static_cast<std::size_t>(spec.heads * spec.query_tokens * nv));
    std::vector<double> logits(static_cast<std::size_t>(nv));
    for (std::int64_t h = 0; h < spec.heads; ++h) {
        for (std::int64_t q = 0; q < spec.query_tokens; ++q) {
            double max_logit = -1e300;
            for (std::int64_t j = 0; j < nv; ++j) {
                double logit = attn_rng.next_double();
                if (planted_token[static_cast<std::size_t>(j)])
                    logit += kPlantedLogit;
                else if (in_cluster(j))
                    logit += kClusterLogitBonus;
                logits[static_cast<std::size_t>(j)] = logit;
                max_logit = std::max(max_logit, logit);
            }
            double denom = 0.0;
            for (std::int64_t j = 0; j < nv; ++j) {
                logits[static_cast<std::size_t>(j)] =
                    std::exp(logits[static_cast<std::size_t>(j)] - max_logit);
                denom += logits[static_cast<std::size_t>(j)];
            }
            float* row = scenario.attention.weights.data() +
                         (h * spec.query_tokens + q) * nv;
            for (std::int64_t j = 0; j < nv; ++j)
                row[j] = static_cast<float>(
                    logits[static_cast<std::size_t>(j)] / denom);
        }
    }

    // Key states: per-frame near-duplicate clusters at a bounded angular
    // spread (pairwise cosine >= 0.98 by construction), everything else a
    // random unit vector.
    CounterRng key_rng(spec.rng_seed, kKeyStream);
    scenario.keys.dim = spec.key_dim;
    scenario.keys.vectors.resize(static_cast<std::size_t>(nv * spec.key_dim));
    const double spread = kClusterSpread;
    const double axial = std::sqrt(1.0 - spread * spread);
    for (std::int64_t f = 0; f < n; ++f) {
        std::int64_t local = 0;
        for (std::int64_t c = 0; c < spec.cluster_redundancy; ++c) {
            std::vector<double> centroid = gaussian_vector(key_rng, spec.key_dim);
            normalize(centroid);
            for (std::int64_t m = 0; m < kClusterSize; ++m, ++local) {
                const std::vector<double> off =
                    orthogonal_unit(key_rng, centroid);
                const std::int64_t g = f * t + local;
                for (std::int64_t d = 0; d < spec.key_dim; ++d)
                    scenario.keys.vectors[static_cast<std::size_t>(
                        g * spec.key_dim + d)] =
                        static_cast<float>(axial * centroid[static_cast<std::size_t>(d)] +
                                           spread * off[static_cast<std::size_t>(d)]);
            }
        }
        for (; local < t; ++local) {
            std::vector<double> v = gaussian_vector(key_rng, spec.key_dim);
            normalize(v);
            const std::int64_t g = f * t + local;
            for (std::int64_t d = 0; d < spec.key_dim; ++d)
                scenario.keys.vectors[static_cast<std::size_t>(
                    g * spec.key_dim + d)] =
                    static_cast<float>(v[static_cast<std::size_t>(d)]);
        }
    }

    scenario.validate();
    return scenario;
}

namespace {

void write_spec_json(detail::JsonWriter& w, const ScenarioSpec& spec) {
    w.begin_object();
    w.key("cluster_redundancy");
    w.value(spec.cluster_redundancy);
    w.key("embed_dim");
    w.value(spec.embed_dim);
    w.key("frames");
    w.value(spec.frames);
    w.key("heads");
    w.value(spec.heads);
    w.key("key_dim");
    w.value(spec.key_dim);
    w.key("pixel_dim");
    w.value(spec.pixel_dim);
    w.key("planted_frames");
    w.value(std::span<const std::int64_t>(spec.planted_frames));
    w.key("planted_tokens");
    w.begin_array();
    for (const auto& local : spec.planted_tokens)
        w.value(std::span<const std::int64_t>(local));
    w.end_array();
    w.key("query_tokens");
    w.value(spec.query_tokens);
    w.key("relevance_margin");
    w.value(static_cast<double>(spec.relevance_margin));
    w.key("rng_seed");
    w.value(static_cast<std::uint64_t>(spec.rng_seed));
    w.key("tokens_per_frame");
    w.value(spec.tokens_per_frame);
    w.end_object();
}

}  // namespace

void write_scenario(const Scenario& scenario, const ScenarioSpec* spec,
                    const std::filesystem::path& dir) {
    scenario.validate();
    std::filesystem::create_directories(dir);

    const std::int64_t n = scenario.frames.frame_count();
    write_bundle_file(
        TensorBundle::f32("pixels", {n, scenario.frames.pixel_dim},
                          scenario.frames.pixel_vectors),
        dir / "pixels.trgb");
    write_bundle_file(
        TensorBundle::f32("frame_embeddings", {n, scenario.frames.embed_dim},
                          scenario.frames.embeddings),
        dir / "frame_embeddings.trgb");
    write_bundle_file(
        TensorBundle::f32("query_embedding",
                          {static_cast<std::int64_t>(scenario.query.vector.size())},
                          scenario.query.vector),
        dir / "query_embedding.trgb");
    write_bundle_file(
        TensorBundle::f32("attention",
                          {scenario.attention.heads,
                           scenario.attention.query_tokens,
                           scenario.attention.visual_tokens},
                          scenario.attention.weights),
        dir / "attention.trgb");
    write_bundle_file(
        TensorBundle::f32("key_states",
                          {scenario.keys.count(), scenario.keys.dim},
                          scenario.keys.vectors),
        dir / "key_states.trgb");

    detail::JsonWriter w;
    w.begin_object();
    if (!scenario.truth.empty()) {
        w.key("ground_truth");
        w.begin_object();
        w.key("planted_frames");
        w.value(std::span<const std::int64_t>(scenario.truth.planted_frames));
        w.key("planted_tokens");
        w.value(std::span<const std::int64_t>(scenario.truth.planted_tokens));
        w.end_object();
    }
    w.key("roles");
    w.begin_object();
    w.key("attention");
    w.value(std::string("attention.trgb"));
    w.key("frame_embeddings");
    w.value(std::string("frame_embeddings.trgb"));
    w.key("key_states");
    w.value(std::string("key_states.trgb"));
    w.key("pixels");
    w.value(std::string("pixels.trgb"));
    w.key("query_embedding");
    w.value(std::string("query_embedding.trgb"));
    w.end_object();
    if (spec != nullptr) {
        w.key("spec");
        write_spec_json(w, *spec);
    }
    w.key("tokens_per_frame");
    w.value(scenario.tokens_per_frame);
    w.end_object();

    std::ofstream out(dir / "scenario.json", std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + (dir / "scenario.json").string());
    const std::string text = w.take();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out << '\n';
}

SelectionMetrics evaluate_selection(const SelectionManifest& manifest,
                                    const GroundTruth& truth,
                                    const KeyStates& keys,
                                    std::int64_t tokens_per_frame) {
    SelectionMetrics metrics;

    const auto recall = [](const std::vector<std::int64_t>& selected,
                           const std::vector<std::int64_t>& planted) {
        if (planted.empty()) return 1.0;
        std::int64_t hit = 0;
        for (std::int64_t p : planted)
            if (std::binary_search(selected.begin(), selected.end(), p)) ++hit;
        return static_cast<double>(hit) / static_cast<double>(planted.size());
    };
    metrics.frame_recall =
        recall(manifest.keyframes.indices, truth.planted_frames);
    metrics.token_recall =
        recall(manifest.tokens.final_tokens, truth.planted_tokens);

    // Pairwise same-frame redundancy among the final tokens.
    std::int64_t pairs = 0;
    std::int64_t redundant = 0;
    const auto& final_tokens = manifest.tokens.final_tokens;
    for (std::size_t a = 0; a < final_tokens.size(); ++a) {
        for (std::size_t b = a + 1; b < final_tokens.size(); ++b) {
            if (final_tokens[a] / tokens_per_frame !=
                final_tokens[b] / tokens_per_frame)
                continue;
            ++pairs;
            const double sim = cosine_similarity(keys.row(final_tokens[a]),
                                                 keys.row(final_tokens[b]));
            if (sim >= 0.95) ++redundant;
        }
    }
    metrics.redundancy_rate =
        pairs > 0 ? static_cast<double>(redundant) / static_cast<double>(pairs)
                  : 0.0;
    return metrics;
}

}  // namespace triage
