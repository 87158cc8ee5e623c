#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gcbaudit/core.hpp"

namespace gcbaudit {

/// Bucket-size normaliser applied to the aggregated evidence of a bucket.
enum class Normalizer {
    none,          // 1
    bucket_sqrt,   // 1 / sqrt(|B_s|)
    bucket_count,  // 1 / |B_s|
    kept_count,    // 1 / |E_G(s)|, the number of retained evidence values
};

/// How the retained excess scores of one bucket are reduced to a scalar.
enum class Aggregator {
    mean_top_m,  // mean of the largest min(m, |E|) values
    lse_top_m,   // natural log-sum-exp of the same values
};

std::string_view to_string(Normalizer n);
std::string_view to_string(Aggregator a);
Normalizer parse_normalizer(std::string_view text);
Aggregator parse_aggregator(std::string_view text);

/// Group Context Bias hyperparameters. Defaults are the fixed reported
/// setting: K=128, q=0.95, m=3, S=3, bucket_sqrt, gamma=0.7.
struct GcbConfig {
    std::size_t top_k = 128;
    double gate_quantile = 0.95;
    std::size_t evidence_m = 3;
    std::size_t selected_buckets = 3;
    double gamma = 0.7;
    Normalizer normalizer = Normalizer::bucket_sqrt;
    Aggregator aggregator = Aggregator::mean_top_m;
    bool gate_enabled = true;
    // With the gate disabled, excess scores still subtract the row
    // threshold unless this is cleared.
    bool subtract_threshold = true;

    friend bool operator==(const GcbConfig&, const GcbConfig&) = default;
};

/// Throws AuditError(invalid_argument) when a field is outside its domain.
void validate(const GcbConfig& cfg);

/// High-scoring candidates of one query row.
struct LocalEvidence {
    std::vector<Index> topk;      // K largest logits, ties by ascending index
    double threshold = 0.0;       // gate quantile of the full row
    std::vector<Index> retained;  // subset of topk that passes the gate
    std::vector<double> excess;   // score minus threshold, aligned with retained
};

LocalEvidence extract_evidence(std::span<const float> row, const GcbConfig& cfg);

struct BucketSupport {
    std::vector<double> support;              // U_G(s), 0 for buckets without evidence
    std::vector<Index> selected;              // up to S buckets with positive support, best first
    std::vector<std::size_t> evidence_counts; // |E_G(s)|

    bool is_selected(Index s) const;
};

BucketSupport pool_bucket_support(std::span<const LocalEvidence> evidence,
                                  const CandidatePool& candidates, const GcbConfig& cfg);

enum class Grouping {
    sentence,   // the bundle's query groups
    singleton,  // every query is its own group
};

/// Bucket support for every query group, computed once and reused by the
/// bias, pruning and bucket-hit views. Support does not depend on gamma.
struct GcbSupport {
    Grouping grouping = Grouping::sentence;
    std::vector<Index> group_of;          // grouping actually used
    std::vector<BucketSupport> groups;    // one entry per group
    std::vector<std::size_t> retained_per_query;
    std::vector<std::size_t> unique_buckets_per_query;

    const BucketSupport& for_query(std::size_t w) const { return groups[group_of[w]]; }
};

GcbSupport compute_support(const AuditBundle& bundle, const GcbConfig& cfg,
                           Grouping grouping = Grouping::sentence);

/// Adds gamma * U_G(s) to every candidate of every selected bucket.
ScoreMatrix apply_bias(const AuditBundle& bundle, const GcbSupport& support, double gamma);

/// Keeps original logits inside the selected buckets, kPrunedScore elsewhere.
ScoreMatrix apply_pruning(const AuditBundle& bundle, const GcbSupport& support);

/// Whether each query's ground-truth bucket is among its group's selected buckets.
std::vector<bool> bucket_hits(const AuditBundle& bundle, const GcbSupport& support);

ScoreMatrix apply_gcb(const AuditBundle& bundle, const GcbConfig& cfg);
ScoreMatrix apply_gcb_single(const AuditBundle& bundle, const GcbConfig& cfg);
ScoreMatrix apply_hard_pruning(const AuditBundle& bundle, const GcbConfig& cfg);
std::vector<bool> bucket_hit_mask(const AuditBundle& bundle, const GcbConfig& cfg);

}  // namespace gcbaudit
