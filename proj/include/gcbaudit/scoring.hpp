#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gcbaudit/core.hpp"

namespace gcbaudit {

/// One D x T embedding window, row-major over (feature, time).
struct EmbeddingWindow {
    std::size_t dim = 0;
    std::size_t steps = 0;
    std::vector<float> values;

    EmbeddingWindow() = default;
    EmbeddingWindow(std::size_t d, std::size_t t, std::vector<float> v);
};

struct ScoringConfig {
    double epsilon = 1e-8;
};

/// Frobenius inner product of the query with each candidate scaled by
/// 1 / (||candidate||_F + epsilon).
std::vector<float> compute_logits(const EmbeddingWindow& query,
                                  std::span<const EmbeddingWindow> candidates,
                                  const ScoringConfig& cfg = {});

/// 1-based rank of the target per query.
struct RankVector {
    std::vector<std::uint32_t> ranks;

    std::size_t size() const noexcept { return ranks.size(); }
    std::uint32_t operator[](std::size_t i) const { return ranks[i]; }
    friend bool operator==(const RankVector&, const RankVector&) = default;
};

/// Competition rank of `target` in `row`: 1 + #(strictly larger) + #(equal
/// with a smaller index). A target holding kPrunedScore ranks last (N).
template <typename T>
std::uint32_t rank_in_row(std::span<const T> row, std::size_t target) {
    const T t = row[target];
    if (t == static_cast<T>(kPrunedScore)) return static_cast<std::uint32_t>(row.size());
    std::uint32_t rank = 1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] > t || (row[j] == t && j < target)) ++rank;
    }
    return rank;
}

RankVector compute_ranks(const LogitMatrix& logits, std::span<const Index> targets);
RankVector compute_ranks(const ScoreMatrix& scores, std::span<const Index> targets);
RankVector compute_ranks(const AuditBundle& bundle);

inline const std::vector<std::size_t> kDefaultKs{1, 5, 10};

struct MetricsReport {
    std::map<std::size_t, double> recall_at;
    double mrr = 0.0;
    double medr = 0.0;
    std::size_t num_queries = 0;

    double recall(std::size_t k) const { return recall_at.at(k); }
    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_metrics(const RankVector& ranks, std::span<const std::size_t> ks = kDefaultKs);

/// Number of queries ranked first.
std::size_t count_top1(const RankVector& ranks);

struct FlipCounts {
    std::size_t good_to_bad = 0;
    std::size_t bad_to_good = 0;
    std::int64_t net = 0;
    std::optional<double> balance;  // (b2g - g2b) / (b2g + g2b); empty when no flips
};

FlipCounts flip_analysis(const RankVector& before, const RankVector& after);

/// Closed rank interval [lo, hi]; hi empty means unbounded.
struct RankInterval {
    std::uint32_t lo = 2;
    std::optional<std::uint32_t> hi;

    bool contains(std::uint32_t r) const { return r >= lo && (!hi || r <= *hi); }
};

inline const std::vector<RankInterval> kDefaultRankIntervals{{2, 5}, {6, 10}, {11, std::nullopt}};

struct RankIntervalCorrection {
    RankInterval interval;
    std::size_t total = 0;
    std::size_t corrected = 0;
    std::optional<double> rate;  // empty when total == 0
};

std::vector<RankIntervalCorrection> rank_bucket_correction(
    const RankVector& before, const RankVector& after,
    std::span<const RankInterval> intervals = kDefaultRankIntervals);

struct LengthBin {
    std::size_t lo = 0;
    std::optional<std::size_t> hi;  // exclusive; empty means unbounded
    std::size_t num_groups = 0;
    std::size_t num_queries = 0;
    double r1_before = 0.0;
    double r1_after = 0.0;
    double delta = 0.0;
};

/// Bins queries by the size of their query group. `lower_edges` must be
/// strictly increasing; bin i covers [edge_i, edge_{i+1}) and the last bin
/// is open-ended. Empty bins report zero R@1.
std::vector<LengthBin> length_binned_delta(const RankVector& before, const RankVector& after,
                                           const QuerySet& queries,
                                           std::span<const std::size_t> lower_edges);

}  // namespace gcbaudit
