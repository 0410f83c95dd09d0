// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include <doctest.h>

#include "triage/apportion.hpp"
#include "triage/rng.hpp"

using namespace triage;

namespace {

std::int64_t total(const std::vector<std::int64_t>& v) {
    return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

}  // namespace

TEST_CASE("proportional split with exact quotas") {
    CHECK(largest_remainder({3.0, 1.0}, 4) ==
          std::vector<std::int64_t>{3, 1});
    CHECK(largest_remainder({2.0, 2.0}, 4) ==
          std::vector<std::int64_t>{2, 2});
}

TEST_CASE("remainder ties go to the lower index") {
    CHECK(largest_remainder({1.0, 1.0}, 3) ==
          std::vector<std::int64_t>{2, 1});
    CHECK(largest_remainder({3.0, 1.0}, 2) ==
          std::vector<std::int64_t>{2, 0});
}

TEST_CASE("zero total weight falls back to round-robin") {
    CHECK(largest_remainder({0.0, 0.0, 0.0}, 4) ==
          std::vector<std::int64_t>{2, 1, 1});
    CHECK(largest_remainder({0.0, 0.0}, 0) ==
          std::vector<std::int64_t>{0, 0});
}

TEST_CASE("uncapped: quota property holds on random instances") {
    CounterRng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int bins = static_cast<int>(rng.next_range(1, 12));
        std::vector<double> w(bins);
        for (double& x : w) x = rng.next_double() * 10.0;
        const std::int64_t units = rng.next_range(0, 40);
        const auto alloc = largest_remainder(w, units);
        REQUIRE(static_cast<int>(alloc.size()) == bins);
        CHECK(total(alloc) == units);
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        if (sum > 0.0) {
            for (int i = 0; i < bins; ++i) {
                const double quota = units * w[i] / sum;
                // Hamilton apportionment never strays a full unit from quota.
                CHECK(std::abs(static_cast<double>(alloc[i]) - quota) < 1.0);
            }
        }
    }
}

TEST_CASE("capped: capacities respected, surplus reassigned by quota") {
    // Quotas [3, 1]; bin 0 capped at 2, surplus unit moves to bin 1.
    CHECK(largest_remainder_capped({3.0, 1.0}, 4, {2, 5}) ==
          std::vector<std::int64_t>{2, 2});
    // Total capacity below the requested units.
    CHECK(largest_remainder_capped({1.0, 1.0}, 10, {2, 3}) ==
          std::vector<std::int64_t>{2, 3});
    // Zero weights with caps.
    CHECK(largest_remainder_capped({0.0, 0.0, 0.0}, 5, {1, 1, 10}) ==
          std::vector<std::int64_t>{1, 1, 3});
}

TEST_CASE("capped: conservation and bounds on random instances") {
    CounterRng rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const int bins = static_cast<int>(rng.next_range(1, 10));
        std::vector<double> w(bins);
        std::vector<std::int64_t> caps(bins);
        for (int i = 0; i < bins; ++i) {
            w[i] = rng.next_double() < 0.2 ? 0.0 : rng.next_double() * 5.0;
            caps[i] = rng.next_range(0, 8);
        }
        const std::int64_t units = rng.next_range(0, 30);
        const auto alloc = largest_remainder_capped(w, units, caps);
        REQUIRE(static_cast<int>(alloc.size()) == bins);
        const std::int64_t cap_sum = total(caps);
        CHECK(total(alloc) == std::min(units, cap_sum));
        for (int i = 0; i < bins; ++i) {
            CHECK(alloc[i] >= 0);
            CHECK(alloc[i] <= caps[i]);
        }
    }
}
