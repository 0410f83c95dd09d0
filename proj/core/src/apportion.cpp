// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/apportion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triage/errors.hpp"

namespace triage {

namespace {

double weight_total(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InputError("apportionment weights must be >= 0");
        total += w;
    }
    return total;
}

}  // namespace

std::vector<std::int64_t> largest_remainder(const std::vector<double>& weights,
                                            std::int64_t units) {
    const std::size_t n = weights.size();
    std::vector<std::int64_t> alloc(n, 0);
    if (n == 0 || units <= 0) return alloc;

    const double total = weight_total(weights);
    if (total <= 0.0) {
        for (std::int64_t u = 0; u < units; ++u)
            alloc[static_cast<std::size_t>(u) % n] += 1;
        return alloc;
    }

    std::vector<double> remainder(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double quota = static_cast<double>(units) * weights[i] / total;
        const double fl = std::floor(quota);
        alloc[i] = static_cast<std::int64_t>(fl);
        remainder[i] = quota - fl;
        assigned += alloc[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return a < b;
    });
    for (std::int64_t u = 0; u < units - assigned; ++u)
        alloc[order[static_cast<std::size_t>(u)]] += 1;
    return alloc;
}

std::vector<std::int64_t> largest_remainder_capped(
    const std::vector<double>& weights, std::int64_t units,
    const std::vector<std::int64_t>& capacities) {
    const std::size_t n = weights.size();
    if (capacities.size() != n)
        throw InputError("capacity list length mismatch");

    std::int64_t cap_total = 0;
    for (std::int64_t c : capacities) {
        if (c < 0) throw InputError("negative capacity");
        cap_total += c;
    }
    units = std::min(std::max<std::int64_t>(units, 0), cap_total);

    std::vector<std::int64_t> alloc(n, 0);
    if (n == 0 || units == 0) return alloc;

    const double total = weight_total(weights);
    if (total <= 0.0) {
        // Round-robin, skipping full bins.
        std::int64_t left = units;
        while (left > 0) {
            for (std::size_t i = 0; i < n && left > 0; ++i) {
                if (alloc[i] < capacities[i]) {
                    ++alloc[i];
                    --left;
                }
            }
        }
        return alloc;
    }

    std::vector<double> quota(n);
    for (std::size_t i = 0; i < n; ++i)
        quota[i] = static_cast<double>(units) * weights[i] / total;

    alloc = largest_remainder(weights, units);

    std::int64_t surplus = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alloc[i] > capacities[i]) {
            surplus += alloc[i] - capacities[i];
            alloc[i] = capacities[i];
        }
    }
    while (surplus > 0) {
        std::size_t best = n;
        double best_gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alloc[i] >= capacities[i]) continue;
            const double gap = quota[i] - static_cast<double>(alloc[i]);
            if (best == n || gap > best_gap) {
                best = i;
                best_gap = gap;
            }
        }
        // units <= cap_total guarantees a receiver exists
        ++alloc[best];
        --surplus;
    }
    return alloc;
}

}  // namespace triage
