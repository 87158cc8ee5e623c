#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "gcbaudit/core.hpp"

namespace gcbaudit {

/// q-quantile with linear interpolation between adjacent order statistics
/// (position h = (n-1)q). Expects a non-empty input and q in [0, 1].
template <typename T>
double quantile_linear(std::span<const T> values, double q) {
    std::vector<double> work(values.begin(), values.end());
    const double h = static_cast<double>(work.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(lo), work.end());
    const double lower = work[lo];
    if (frac == 0.0 || lo + 1 >= work.size()) return lower;
    const double upper = *std::min_element(work.begin() + static_cast<std::ptrdiff_t>(lo) + 1, work.end());
    return lower + frac * (upper - lower);
}

/// Indices of the k largest values, largest first; ties go to the smaller
/// index. k is clamped to the input length.
template <typename T>
std::vector<Index> top_k_indices(std::span<const T> values, std::size_t k) {
    std::vector<Index> idx(values.size());
    std::iota(idx.begin(), idx.end(), Index{0});
    k = std::min(k, idx.size());
    const auto before = [&](Index a, Index b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
    idx.resize(k);
    return idx;
}

}  // namespace gcbaudit
