#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcbaudit/core.hpp"
#include "gcbaudit/gcb.hpp"
#include "gcbaudit/scoring.hpp"

namespace gcbaudit {

/// Ranking with the candidate pool restricted to the ground-truth bucket.
/// Diagnostic only: it uses the true bucket, which no decoder has.
struct OracleReport {
    RankVector within_bucket_ranks;
    MetricsReport metrics;
    double headroom_r1 = 0.0;  // oracle R@1 minus base R@1
};

/// Rank of each target among the candidates of its own bucket, with the
/// same tie rule as the full-pool rank.
RankVector within_bucket_ranks(const AuditBundle& bundle);

OracleReport oracle_within_bucket(const AuditBundle& bundle, std::span<const std::size_t> ks = kDefaultKs);

struct HeadroomRow {
    std::string subset;
    std::size_t count = 0;
    // All rates are empty for an empty subset.
    std::optional<double> bucket_hit_rate;
    std::optional<double> base_r1;
    std::optional<double> gcb_r1;
    std::optional<double> prune_r1;
    std::optional<double> oracle_r1;
};

struct RankHeadroomRow {
    RankInterval interval;
    std::size_t total = 0;
    std::size_t corrected = 0;
    std::optional<double> correction_rate;
    std::optional<double> bucket_hit_rate;
    std::optional<double> oracle_r1;
};

/// Splits the oracle-GCB gap by baseline correctness and bucket hit.
/// Row order: all, bucket hit, bucket miss, baseline errors,
/// errors & hit, errors & miss.
struct HeadroomDecomposition {
    std::vector<HeadroomRow> rows;
    std::vector<RankHeadroomRow> by_baseline_rank;
    double oracle_headroom_r1 = 0.0;  // oracle R@1 - base R@1
    double gcb_recovered_r1 = 0.0;    // GCB R@1 - base R@1
};

/// One support computation feeds the bucket-hit mask, the GCB column and
/// the hard-pruning column.
HeadroomDecomposition decompose_headroom(const AuditBundle& bundle, const GcbSupport& support, double gamma,
                                         std::span<const RankInterval> intervals = kDefaultRankIntervals);
HeadroomDecomposition decompose_headroom(const AuditBundle& bundle, const GcbConfig& cfg,
                                         std::span<const RankInterval> intervals = kDefaultRankIntervals);

}  // namespace gcbaudit
