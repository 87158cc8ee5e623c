#pragma once

// Straight transcription of the GCB recipe on plain nested vectors. Shares
// no code with the library: every step (top-K, quantile, gate, pooling,
// normalisation, selection, bias) is rewritten with full sorts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace naive {

using Rows = std::vector<std::vector<double>>;

struct Config {
    std::size_t K = 128;
    double q = 0.95;
    std::size_t m = 3;
    std::size_t S = 3;
    double gamma = 0.7;
    std::string norm = "bucket_sqrt";  // none | bucket_sqrt | bucket_count | kept_count
    std::string agg = "mean_top_m";    // mean_top_m | lse_top_m
    bool gate = true;
};

inline std::vector<std::size_t> sorted_desc(const std::vector<double>& row) {
    std::vector<std::size_t> idx(row.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    return idx;
}

inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Support {
    std::vector<double> U;
    std::vector<int> selected;
};

inline Support group_support(const Rows& L, const std::vector<int>& members, const std::vector<int>& bucket,
                             int num_buckets, const Config& c) {
    std::vector<std::vector<double>> E(num_buckets);
    for (int b : members) {
        const auto& row = L[b];
        const double tau = quantile(row, c.q);
        const auto order = sorted_desc(row);
        const std::size_t k = std::min(c.K, row.size());
        for (std::size_t r = 0; r < k; ++r) {
            const std::size_t j = order[r];
            if (c.gate && row[j] < tau) continue;
            E[bucket[j]].push_back(row[j] - tau);
        }
    }
    std::vector<int> sizes(num_buckets, 0);
    for (int s : bucket) ++sizes[s];

    Support out;
    out.U.assign(num_buckets, 0.0);
    for (int s = 0; s < num_buckets; ++s) {
        if (E[s].empty()) continue;
        auto e = E[s];
        std::sort(e.begin(), e.end(), std::greater<>());
        const std::size_t take = std::min(c.m, e.size());
        double agg = 0.0;
        if (c.agg == "mean_top_m") {
            for (std::size_t i = 0; i < take; ++i) agg += e[i];
            agg /= static_cast<double>(take);
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < take; ++i) sum += std::exp(e[i]);
            agg = std::log(sum);
        }
        double w = 1.0;
        if (c.norm == "bucket_sqrt") w = 1.0 / std::sqrt(static_cast<double>(sizes[s]));
        if (c.norm == "bucket_count") w = 1.0 / static_cast<double>(sizes[s]);
        if (c.norm == "kept_count") w = 1.0 / static_cast<double>(E[s].size());
        out.U[s] = w * agg;
    }
    std::vector<int> cand;
    for (int s = 0; s < num_buckets; ++s)
        if (out.U[s] > 0.0) cand.push_back(s);
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return out.U[a] > out.U[b]; });
    if (cand.size() > c.S) cand.resize(c.S);
    out.selected = cand;
    return out;
}

inline std::map<int, std::vector<int>> members_of(const std::vector<int>& group) {
    std::map<int, std::vector<int>> g;
    for (std::size_t b = 0; b < group.size(); ++b) g[group[b]].push_back(static_cast<int>(b));
    return g;
}

inline Rows apply(const Rows& L, const std::vector<int>& bucket, const std::vector<int>& group, const Config& c) {
    const int M = *std::max_element(bucket.begin(), bucket.end()) + 1;
    Rows out = L;
    for (const auto& [g, members] : members_of(group)) {
        const auto sup = group_support(L, members, bucket, M, c);
        for (int b : members)
            for (std::size_t j = 0; j < L[b].size(); ++j)
                if (std::find(sup.selected.begin(), sup.selected.end(), bucket[j]) != sup.selected.end())
                    out[b][j] = L[b][j] + c.gamma * sup.U[bucket[j]];
    }
    return out;
}

inline Rows prune(const Rows& L, const std::vector<int>& bucket, const std::vector<int>& group, const Config& c) {
    const int M = *std::max_element(bucket.begin(), bucket.end()) + 1;
    Rows out = L;
    for (const auto& [g, members] : members_of(group)) {
        const auto sup = group_support(L, members, bucket, M, c);
        for (int b : members)
            for (std::size_t j = 0; j < L[b].size(); ++j)
                if (std::find(sup.selected.begin(), sup.selected.end(), bucket[j]) == sup.selected.end())
                    out[b][j] = -std::numeric_limits<double>::infinity();
    }
    return out;
}

// Position of the target after a stable descending sort of the full row.
inline std::size_t rank(const std::vector<double>& row, std::size_t target) {
    if (row[target] == -std::numeric_limits<double>::infinity()) return row.size();
    const auto order = sorted_desc(row);
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), target) - order.begin()) + 1;
}

}  // namespace naive
