// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "triage/frame_budget.hpp"
#include "triage/rng.hpp"

using namespace triage;

namespace {

FrameFeatureSet frames_from_pixels(std::vector<std::vector<float>> rows) {
    FrameFeatureSet f;
    f.pixel_dim = static_cast<std::int64_t>(rows.front().size());
    f.embed_dim = 2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        f.pixel_vectors.insert(f.pixel_vectors.end(), rows[i].begin(),
                               rows[i].end());
        f.embeddings.push_back(1.0f);
        f.embeddings.push_back(0.0f);
        f.timestamps.push_back(static_cast<std::int64_t>(i));
    }
    return f;
}

FrameFeatureSet random_frames(CounterRng& rng, std::int64_t n,
                              std::int64_t pixel_dim = 6,
                              std::int64_t embed_dim = 5) {
    FrameFeatureSet f;
    f.pixel_dim = pixel_dim;
    f.embed_dim = embed_dim;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t d = 0; d < pixel_dim; ++d)
            f.pixel_vectors.push_back(static_cast<float>(rng.next_gaussian()));
        for (std::int64_t d = 0; d < embed_dim; ++d)
            f.embeddings.push_back(static_cast<float>(rng.next_gaussian()));
        f.timestamps.push_back(i);
    }
    return f;
}

FrameScoreTable table_with_frame_scores(std::vector<float> s) {
    FrameScoreTable t;
    t.change.assign(s.size(), 0.0f);
    t.motion.assign(s.size(), 0.0f);
    t.relevance.assign(s.size(), 0.0f);
    t.frame = std::move(s);
    return t;
}

}  // namespace

TEST_CASE("cosine similarity conventions") {
    const std::vector<float> a{1.0f, 0.0f};
    const std::vector<float> b{0.0f, 1.0f};
    const std::vector<float> z{0.0f, 0.0f};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
    CHECK(cosine_similarity(a, z) == 0.0);
    CHECK(cosine_similarity(z, z) == 0.0);
}

TEST_CASE("scene change: identical, orthogonal, and 45-degree frames") {
    const float r = static_cast<float>(1.0 / std::sqrt(2.0));
    CHECK(scene_change_scores(frames_from_pixels({{2, 0}, {2, 0}})) ==
          std::vector<float>{0.0f, 0.0f});
    CHECK(scene_change_scores(frames_from_pixels({{1, 0}, {0, 1}})) ==
          std::vector<float>{0.0f, 1.0f});
    const auto raw = scene_change_scores(frames_from_pixels({{1, 0}, {r, r}}));
    REQUIRE(raw.size() == 2);
    CHECK(raw[0] == 0.0f);
    CHECK(raw[1] ==
          doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("scene change: zero vector counts as fully changed") {
    const auto raw = scene_change_scores(frames_from_pixels({{0, 0}, {1, 0}}));
    CHECK(raw == std::vector<float>{0.0f, 1.0f});
}

TEST_CASE("motion: static video and a 3-4-5 step") {
    CHECK(motion_scores(frames_from_pixels({{1, 2}, {1, 2}, {1, 2}})) ==
          std::vector<float>{0.0f, 0.0f, 0.0f});
    CHECK(motion_scores(frames_from_pixels({{0, 0}, {3, 4}})) ==
          std::vector<float>{0.0f, 5.0f});
}

TEST_CASE("motion: random sequence matches a naive recomputation") {
    CounterRng rng(3);
    const auto f = random_frames(rng, 3);
    const auto raw = motion_scores(f);
    REQUIRE(raw.size() == 3);
    CHECK(raw[0] == 0.0f);
    for (std::int64_t i = 1; i < 3; ++i) {
        double acc = 0.0;
        for (std::int64_t d = 0; d < f.pixel_dim; ++d) {
            const double diff = f.pixel_vectors[i * f.pixel_dim + d] -
                                f.pixel_vectors[(i - 1) * f.pixel_dim + d];
            acc += diff * diff;
        }
        CHECK(raw[i] == doctest::Approx(std::sqrt(acc)).epsilon(1e-6));
    }
}

TEST_CASE("relevance: identity, antipodal, and diagonal embeddings") {
    const float r = static_cast<float>(1.0 / std::sqrt(2.0));
    FrameFeatureSet f;
    f.pixel_dim = 1;
    f.embed_dim = 2;
    f.pixel_vectors = {0, 0, 0, 0};
    f.embeddings = {1, 0, 0, 1, r, r, -1, 0};
    f.timestamps = {0, 1, 2, 3};
    const QueryEmbedding q{{1.0f, 0.0f}};
    const auto raw = relevance_scores(f, q);
    REQUIRE(raw.size() == 4);
    CHECK(raw[0] == doctest::Approx(1.0));
    CHECK(raw[1] == doctest::Approx(0.0));
    CHECK(raw[2] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-6));
    CHECK(raw[3] == doctest::Approx(-1.0));
}

TEST_CASE("normalize_component: affine map and degenerate constant") {
    CHECK(normalize_component(std::vector<float>{2, 4, 6}) ==
          std::vector<float>{0.0f, 0.5f, 1.0f});
    CHECK(normalize_component(std::vector<float>{5, 5, 5}) ==
          std::vector<float>{0.0f, 0.0f, 0.0f});
}

TEST_CASE("normalize_component: invariant under positive affine transforms") {
    CounterRng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<float> raw(static_cast<std::size_t>(rng.next_range(2, 20)));
        for (float& x : raw) x = static_cast<float>(rng.next_gaussian());
        const float a = static_cast<float>(rng.next_double() * 4.0 + 0.1);
        const float b = static_cast<float>(rng.next_gaussian());
        std::vector<float> mapped(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) mapped[i] = a * raw[i] + b;
        const auto n1 = normalize_component(raw);
        const auto n2 = normalize_component(mapped);
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(n1[i] == doctest::Approx(n2[i]).epsilon(1e-4));
    }
}

TEST_CASE("frame_importance with weights (1,0,0) is scene change alone") {
    CounterRng rng(4);
    const auto f = random_frames(rng, 6);
    const QueryEmbedding q{{1, 0, 0, 0, 0}};
    const auto table = frame_importance(f, q, ScoreWeights{1.0f, 0.0f, 0.0f});
    const auto expected = normalize_component(scene_change_scores(f));
    CHECK(table.frame == expected);
    CHECK(table.change == expected);
}

TEST_CASE("frame_importance matches a straight-line recomputation") {
    CounterRng rng(5);
    const auto f = random_frames(rng, 4);
    QueryEmbedding q;
    for (int d = 0; d < 5; ++d)
        q.vector.push_back(static_cast<float>(rng.next_gaussian()));
    const ScoreWeights w{0.3f, 0.3f, 0.4f};
    const auto table = frame_importance(f, q, w);
    const auto nc = normalize_component(scene_change_scores(f));
    const auto nm = normalize_component(motion_scores(f));
    const auto nr = normalize_component(relevance_scores(f, q));
    for (std::size_t i = 0; i < 4; ++i) {
        const float expected =
            w.change * nc[i] + w.motion * nm[i] + w.relevance * nr[i];
        CHECK(table.frame[i] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("frame_importance with weights (0,0,1) finds the planted frame") {
    CounterRng rng(6);
    FrameFeatureSet f;
    f.pixel_dim = 2;
    f.embed_dim = 3;
    // frame 2 equals the query; the others are orthogonal to it
    f.embeddings = {0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1};
    for (int i = 0; i < 4; ++i) {
        f.pixel_vectors.push_back(static_cast<float>(rng.next_gaussian()));
        f.pixel_vectors.push_back(static_cast<float>(rng.next_gaussian()));
        f.timestamps.push_back(i);
    }
    const QueryEmbedding q{{1, 0, 0}};
    const auto table = frame_importance(f, q, ScoreWeights{0.0f, 0.0f, 1.0f});
    const auto best =
        std::max_element(table.frame.begin(), table.frame.end());
    CHECK(best - table.frame.begin() == 2);
}

TEST_CASE("frame feature validation") {
    FrameFeatureSet f = frames_from_pixels({{1, 2}, {3, 4}});
    CHECK_NOTHROW(f.validate());
    SUBCASE("non-increasing timestamps") {
        f.timestamps = {1, 1};
        CHECK_THROWS_AS(f.validate(), InputError);
    }
    SUBCASE("non-finite pixels") {
        f.pixel_vectors[0] = std::numeric_limits<float>::infinity();
        CHECK_THROWS_AS(f.validate(), InputError);
    }
    SUBCASE("ragged pixel rows") {
        f.pixel_vectors.pop_back();
        CHECK_THROWS_AS(f.validate(), InputError);
    }
}

TEST_CASE("bucket_allocate: spec examples") {
    SUBCASE("baseline exhausts the budget") {
        const auto plan =
            bucket_allocate(table_with_frame_scores({1, 1, 1, 1, 1, 1}), 2, 2);
        CHECK(plan.allocations == std::vector<std::int64_t>{1, 1});
    }
    SUBCASE("scores [3,1] over two extras, tie toward the lower index") {
        // Bucket sums become W = [3, 1] with these per-frame scores.
        const auto plan = bucket_allocate(
            table_with_frame_scores({1, 1, 1, 0.5, 0.25, 0.25}), 2, 4);
        CHECK(plan.scores == std::vector<float>{3.0f, 1.0f});
        CHECK(plan.allocations == std::vector<std::int64_t>{3, 1});
    }
    SUBCASE("one frame per bucket is forced") {
        const auto plan =
            bucket_allocate(table_with_frame_scores({0.9f, 0.1f, 0.5f, 0.7f}),
                            4, 4);
        CHECK(plan.allocations == std::vector<std::int64_t>{1, 1, 1, 1});
    }
}

TEST_CASE("bucket_allocate: bucket sizes near-equal, earlier take surplus") {
    const auto plan =
        bucket_allocate(table_with_frame_scores(std::vector<float>(7, 1.0f)),
                        3, 3);
    CHECK(plan.bounds == std::vector<std::int64_t>{0, 3, 5, 7});
}

TEST_CASE("bucket_allocate: K reduced when the budget is smaller") {
    const auto plan =
        bucket_allocate(table_with_frame_scores(std::vector<float>(8, 1.0f)),
                        4, 2);
    CHECK(plan.bucket_count() == 2);
    CHECK(plan.allocations == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("bucket_allocate: zero scores spread extras round-robin") {
    const auto plan =
        bucket_allocate(table_with_frame_scores(std::vector<float>(8, 0.0f)),
                        2, 5);
    CHECK(plan.allocations == std::vector<std::int64_t>{3, 2});
}

TEST_CASE("bucket_allocate: capacity clamp redistributes the surplus") {
    // Buckets of size 2; a dominant first bucket cannot take more than 2.
    const auto plan = bucket_allocate(
        table_with_frame_scores({10, 10, 0.1f, 0.1f, 0.2f, 0.1f}), 3, 6);
    CHECK(plan.allocations == std::vector<std::int64_t>{2, 2, 2});
}

TEST_CASE("bucket_allocate: invalid arguments") {
    const auto table = table_with_frame_scores({1, 2, 3});
    CHECK_THROWS_AS(bucket_allocate(table, 0, 2), ConfigError);
    CHECK_THROWS_AS(bucket_allocate(table, 2, 0), ConfigError);
    CHECK_THROWS_AS(bucket_allocate(table, 2, 4), ConfigError);
}

TEST_CASE("select_keyframes: ties and saturation") {
    SUBCASE("all scores equal selects bucket prefixes") {
        const auto table = table_with_frame_scores(std::vector<float>(6, 1.0f));
        const auto plan = bucket_allocate(table, 2, 4);
        const auto sel = select_keyframes(table, plan);
        CHECK(sel.indices == std::vector<std::int64_t>{0, 1, 3, 4});
    }
    SUBCASE("top-2 inside one bucket") {
        const auto table = table_with_frame_scores({0.1f, 0.9f, 0.5f});
        BucketPlan plan;
        plan.bounds = {0, 3};
        plan.scores = {1.5f};
        plan.allocations = {2};
        const auto sel = select_keyframes(table, plan);
        CHECK(sel.indices == std::vector<std::int64_t>{1, 2});
        CHECK(sel.scores == std::vector<float>{0.9f, 0.5f});
    }
    SUBCASE("allocation equal to bucket size takes the whole bucket") {
        const auto table = table_with_frame_scores({0.3f, 0.2f, 0.8f});
        BucketPlan plan;
        plan.bounds = {0, 3};
        plan.scores = {1.3f};
        plan.allocations = {3};
        CHECK(select_keyframes(table, plan).indices ==
              std::vector<std::int64_t>{0, 1, 2});
    }
}

TEST_CASE("property: budget conservation and coverage") {
    CounterRng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = rng.next_range(1, 24);
        std::vector<float> s(static_cast<std::size_t>(n));
        for (float& x : s)
            x = rng.next_double() < 0.1 ? 0.0f
                                        : static_cast<float>(rng.next_double());
        const auto table = table_with_frame_scores(s);
        const std::int64_t k = rng.next_range(1, 8);
        const std::int64_t m = rng.next_range(1, n);
        const auto plan = bucket_allocate(table, k, m);
        const auto sel = select_keyframes(table, plan);
        CHECK(static_cast<std::int64_t>(sel.indices.size()) == m);
        CHECK(std::is_sorted(sel.indices.begin(), sel.indices.end()));
        CHECK(std::adjacent_find(sel.indices.begin(), sel.indices.end()) ==
              sel.indices.end());
        // Every bucket contributes at least one keyframe.
        for (std::int64_t b = 0; b < plan.bucket_count(); ++b) {
            CHECK(plan.allocations[b] >= 1);
            CHECK(plan.allocations[b] <= plan.bounds[b + 1] - plan.bounds[b]);
            const auto lo = std::lower_bound(sel.indices.begin(),
                                             sel.indices.end(),
                                             plan.bounds[b]);
            const auto hi = std::lower_bound(sel.indices.begin(),
                                             sel.indices.end(),
                                             plan.bounds[b + 1]);
            CHECK(hi - lo == plan.allocations[b]);
        }
        // Preserved scores match the table.
        for (std::size_t i = 0; i < sel.indices.size(); ++i)
            CHECK(sel.scores[i] ==
                  table.frame[static_cast<std::size_t>(sel.indices[i])]);
    }
}

TEST_CASE("property: apportionment quota bound without clamping") {
    CounterRng rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t n = rng.next_range(8, 32);
        std::vector<float> s(static_cast<std::size_t>(n));
        for (float& x : s) x = static_cast<float>(rng.next_double());
        const auto table = table_with_frame_scores(s);
        const std::int64_t k = rng.next_range(2, 4);
        const std::int64_t m = rng.next_range(k, k + 2);  // few extras: no clamp
        const auto plan = bucket_allocate(table, k, m);
        double sum_w = 0.0;
        for (float w : plan.scores) sum_w += w;
        if (sum_w <= 0.0) continue;
        for (std::int64_t b = 0; b < plan.bucket_count(); ++b) {
            const double quota =
                static_cast<double>(m - k) * plan.scores[b] / sum_w;
            CHECK(std::abs(static_cast<double>(plan.allocations[b] - 1) -
                           quota) < 1.0);
        }
    }
}

TEST_CASE("property: raising raw relevance never lowers a frame's rank") {
    CounterRng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const std::int64_t n = rng.next_range(3, 12);
        auto f = random_frames(rng, n);
        QueryEmbedding q;
        for (int d = 0; d < 5; ++d)
            q.vector.push_back(static_cast<float>(rng.next_gaussian()));
        const ScoreWeights w{0.2f, 0.2f, 0.6f};
        const std::int64_t target = rng.next_range(0, n - 1);

        const auto rank_of = [&](const FrameScoreTable& t) {
            std::int64_t rank = 0;
            const float mine = t.frame[static_cast<std::size_t>(target)];
            for (std::int64_t i = 0; i < n; ++i) {
                const float s = t.frame[static_cast<std::size_t>(i)];
                if (s > mine || (s == mine && i < target)) ++rank;
            }
            return rank;
        };

        const std::int64_t before = rank_of(frame_importance(f, q, w));
        // Push the target's embedding toward the query, boosting raw relevance.
        double qn = 0.0;
        for (float x : q.vector) qn += static_cast<double>(x) * x;
        if (qn == 0.0) continue;
        for (int d = 0; d < 5; ++d)
            f.embeddings[target * 5 + d] =
                q.vector[static_cast<std::size_t>(d)];
        const std::int64_t after = rank_of(frame_importance(f, q, w));
        CHECK(after <= before);
    }
}

TEST_CASE("property: weights (0,0,1) reduce selection to relevance alone") {
    CounterRng rng(24);
    for (int trial = 0; trial < 50; ++trial) {
        const std::int64_t n = rng.next_range(4, 16);
        const auto f = random_frames(rng, n);
        QueryEmbedding q;
        for (int d = 0; d < 5; ++d)
            q.vector.push_back(static_cast<float>(rng.next_gaussian()));
        const auto table =
            frame_importance(f, q, ScoreWeights{0.0f, 0.0f, 1.0f});
        const auto expected = normalize_component(relevance_scores(f, q));
        CHECK(table.frame == expected);
        const std::int64_t k = rng.next_range(1, 4);
        const std::int64_t m = rng.next_range(1, n);
        const auto plan = bucket_allocate(table, k, m);
        auto pure = table;
        pure.frame = expected;
        CHECK(select_keyframes(table, plan).indices ==
              select_keyframes(pure, bucket_allocate(pure, k, m)).indices);
    }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
    CounterRng rng(25);
    const auto f = random_frames(rng, 10);
    const QueryEmbedding q{{1, 0, 0, 0, 0}};
    const ScoreWeights w;
    const auto t1 = frame_importance(f, q, w);
    const auto t2 = frame_importance(f, q, w);
    CHECK(t1.frame == t2.frame);
    const auto p1 = bucket_allocate(t1, 3, 6);
    const auto p2 = bucket_allocate(t2, 3, 6);
    CHECK(p1.allocations == p2.allocations);
    CHECK(select_keyframes(t1, p1).indices ==
          select_keyframes(t2, p2).indices);
}
