#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "gcbaudit/core.hpp"
#include "gcbaudit/scoring.hpp"

namespace gcbaudit {

struct BootstrapConfig {
    std::size_t num_resamples = 10000;
    double confidence = 0.95;
    std::uint64_t seed = 0;
};

/// Per-query metric whose cluster-pooled mean is bootstrapped.
struct BootstrapMetric {
    enum class Kind { recall_at_k, mrr } kind = Kind::recall_at_k;
    std::size_t k = 1;

    static BootstrapMetric recall(std::size_t k) { return {Kind::recall_at_k, k}; }
    static BootstrapMetric reciprocal_rank() { return {Kind::mrr, 0}; }
    std::string name() const;
};

struct BootstrapResult {
    double point_delta = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    std::size_t num_clusters = 0;
    std::size_t num_resamples = 0;
};

/// Paired cluster bootstrap of metric(after) - metric(before). Each
/// resample draws clusters with replacement and applies the same draw to
/// both rank vectors; a cluster drawn k times contributes its queries k
/// times. Percentile interval; two-sided p = 2 min(P(delta <= 0),
/// P(delta >= 0)), clipped to [1/num_resamples, 1].
BootstrapResult paired_cluster_bootstrap(const RankVector& before, const RankVector& after,
                                         std::span<const Index> clusters, BootstrapMetric metric,
                                         const BootstrapConfig& cfg);

struct CorrelationResult {
    std::optional<double> rho;      // empty when either input has zero variance
    std::optional<double> p_value;  // two-sided, t approximation with n-2 dof
    std::size_t n = 0;
};

/// Pearson correlation of mid-ranks. Returns nullopt for zero variance.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

CorrelationResult spearman_test(std::span<const double> x, std::span<const double> y);

/// Per query: size of the ground-truth bucket against the indicator of a
/// Top-1 gain (before > 1 and after == 1).
CorrelationResult bucket_size_inflation_correlation(const AuditBundle& bundle, const RankVector& before,
                                                    const RankVector& after);

}  // namespace gcbaudit
