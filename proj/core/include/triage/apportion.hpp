// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace triage {

// Largest-remainder (Hamilton) apportionment: each bin gets the floor of its
// proportional quota units*w_i/sum(w), leftover units go to the bins with the
// largest fractional remainders, ties broken toward the lower index. A zero
// total weight falls back to round-robin from index 0.
std::vector<std::int64_t> largest_remainder(const std::vector<double>& weights,
                                            std::int64_t units);

// Same, but no bin may exceed its capacity. Surplus from clamped bins is
// reassigned one unit at a time to the uncapped bin with the largest
// remaining quota (quota minus current allocation), ties toward the lower
// index, until exhausted. Allocates min(units, sum(capacities)) in total.
std::vector<std::int64_t> largest_remainder_capped(
    const std::vector<double>& weights, std::int64_t units,
    const std::vector<std::int64_t>& capacities);

}  // namespace triage
