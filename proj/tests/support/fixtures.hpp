#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gcbaudit/core.hpp"

namespace fixtures {

using namespace gcbaudit;

inline AuditBundle make_bundle(const std::vector<std::vector<float>>& rows, std::vector<Index> buckets,
                               std::vector<Index> targets, std::vector<Index> groups) {
    std::vector<float> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    LogitMatrix L(rows.size(), rows.front().size(), std::move(flat));
    return validate_bundle(std::move(L), CandidatePool::from_buckets(std::move(buckets)),
                           QuerySet::from_arrays(std::move(targets), std::move(groups)));
}

// 2x4 instance used throughout the GCB examples.
inline AuditBundle worked_instance() {
    return make_bundle({{3, 1, 2, 0}, {2.5f, 0.5f, 1, 0}}, {0, 0, 1, 1}, {0, 0}, {0, 0});
}

struct RandomShape {
    std::size_t max_b = 8, max_n = 12, max_m = 4;
    int levels = 0;  // >0: logits drawn from a small integer grid, forcing ties
};

// Random bundle with every bucket non-empty and dense group ids.
inline AuditBundle random_bundle(std::mt19937_64& gen, const RandomShape& shape = {}) {
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
    };
    const std::size_t n = pick(2, shape.max_n);
    const std::size_t m = pick(1, std::min(shape.max_m, n));
    const std::size_t b = pick(1, shape.max_b);
    std::vector<Index> buckets(n);
    for (std::size_t j = 0; j < n; ++j) buckets[j] = static_cast<Index>(j < m ? j : pick(0, m - 1));
    std::shuffle(buckets.begin(), buckets.end(), gen);
    const std::size_t ng = pick(1, b);
    std::vector<Index> groups(b), targets(b);
    for (std::size_t w = 0; w < b; ++w) {
        groups[w] = static_cast<Index>(w < ng ? w : pick(0, ng - 1));
        targets[w] = static_cast<Index>(pick(0, n - 1));
    }
    std::normal_distribution<float> normal(0.0f, 1.0f);
    LogitMatrix L(b, n);
    for (std::size_t w = 0; w < b; ++w)
        for (std::size_t j = 0; j < n; ++j)
            L(w, j) = shape.levels > 0 ? static_cast<float>(pick(0, static_cast<std::size_t>(shape.levels)))
                                       : normal(gen);
    return validate_bundle(std::move(L), CandidatePool::from_buckets(std::move(buckets)),
                           QuerySet::from_arrays(std::move(targets), std::move(groups)));
}

}  // namespace fixtures
