// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "triage/tensor_bundle.hpp"

namespace triage {

void Scenario::validate() const {
    frames.validate();
    attention.validate();
    keys.validate();
    const std::int64_t n = frames.frame_count();
    if (static_cast<std::int64_t>(query.vector.size()) != frames.embed_dim)
        throw InputError("query embedding dimension mismatch");
    if (tokens_per_frame <= 0)
        throw InputError("tokens per frame must be positive");
    if (attention.visual_tokens != n * tokens_per_frame)
        throw InputError("attention visual-token count must equal N * T");
    if (keys.count() != attention.visual_tokens)
        throw InputError("key state rows must match visual tokens");
    for (std::int64_t f : truth.planted_frames)
        if (f < 0 || f >= n) throw InputError("planted frame out of range");
    for (std::int64_t t : truth.planted_tokens)
        if (t < 0 || t >= attention.visual_tokens)
            throw InputError("planted token out of range");
}

namespace {

TensorBundle load_role(const std::filesystem::path& dir,
                       const nlohmann::json& roles, const std::string& role,
                       std::size_t dims, DType dtype) {
    if (!roles.contains(role) || !roles[role].is_string())
        throw InputError("scenario.json is missing role '" + role + "'");
    const std::filesystem::path path =
        dir / roles[role].get<std::string>();
    if (!std::filesystem::exists(path))
        throw InputError("missing scenario file " + path.string());
    TensorBundle bundle = read_bundle_file(path);
    if (bundle.shape().size() != dims)
        throw InputError("role '" + role + "' has the wrong rank");
    if (bundle.dtype() != dtype)
        throw InputError("role '" + role + "' has the wrong dtype");
    return bundle;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "scenario.json";
    std::ifstream in(manifest_path);
    if (!in)
        throw InputError("cannot open " + manifest_path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("invalid scenario.json: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("roles") || !doc["roles"].is_object())
        throw InputError("scenario.json must contain a 'roles' object");
    const nlohmann::json& roles = doc["roles"];

    const TensorBundle pixels = load_role(dir, roles, "pixels", 2, DType::F32);
    const TensorBundle embeds =
        load_role(dir, roles, "frame_embeddings", 2, DType::F32);
    const TensorBundle query =
        load_role(dir, roles, "query_embedding", 1, DType::F32);
    const TensorBundle attention =
        load_role(dir, roles, "attention", 3, DType::F32);
    const TensorBundle key_states =
        load_role(dir, roles, "key_states", 2, DType::F32);

    Scenario scenario;
    const std::int64_t n = pixels.shape()[0];
    scenario.frames.pixel_dim = pixels.shape()[1];
    scenario.frames.pixel_vectors.assign(pixels.floats().begin(),
                                         pixels.floats().end());
    if (embeds.shape()[0] != n)
        throw InputError("frame_embeddings row count must match pixels");
    scenario.frames.embed_dim = embeds.shape()[1];
    scenario.frames.embeddings.assign(embeds.floats().begin(),
                                      embeds.floats().end());
    scenario.frames.timestamps.resize(static_cast<std::size_t>(n));
    if (roles.contains("timestamps")) {
        const TensorBundle ts =
            load_role(dir, roles, "timestamps", 1, DType::I64);
        if (ts.shape()[0] != n)
            throw InputError("timestamps length must match frame count");
        scenario.frames.timestamps.assign(ts.ints().begin(), ts.ints().end());
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            scenario.frames.timestamps[static_cast<std::size_t>(i)] = i;
    }

    scenario.query.vector.assign(query.floats().begin(), query.floats().end());

    scenario.attention.heads = attention.shape()[0];
    scenario.attention.query_tokens = attention.shape()[1];
    scenario.attention.visual_tokens = attention.shape()[2];
    scenario.attention.weights.assign(attention.floats().begin(),
                                      attention.floats().end());

    scenario.keys.dim = key_states.shape()[1];
    scenario.keys.vectors.assign(key_states.floats().begin(),
                                 key_states.floats().end());
    if (key_states.shape()[0] != scenario.attention.visual_tokens)
        throw InputError("key_states rows must match attention visual tokens");

    if (n <= 0 || scenario.attention.visual_tokens % n != 0)
        throw InputError("visual tokens are not an integer multiple of N");
    scenario.tokens_per_frame = scenario.attention.visual_tokens / n;

    if (doc.contains("ground_truth") && doc["ground_truth"].is_object()) {
        const nlohmann::json& gt = doc["ground_truth"];
        if (gt.contains("planted_frames"))
            scenario.truth.planted_frames =
                gt["planted_frames"].get<std::vector<std::int64_t>>();
        if (gt.contains("planted_tokens"))
            scenario.truth.planted_tokens =
                gt["planted_tokens"].get<std::vector<std::int64_t>>();
    }

    scenario.validate();
    return scenario;
}

}  // namespace triage
