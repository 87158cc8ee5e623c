#include "gcbaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "gcbaudit/order_stats.hpp"
#include "gcbaudit/parallel.hpp"
#include "gcbaudit/rng.hpp"

namespace gcbaudit {

std::string BootstrapMetric::name() const {
    return kind == Kind::mrr ? "mrr" : "r@" + std::to_string(k);
}

namespace {

double per_query_value(BootstrapMetric metric, std::uint32_t rank) {
    if (metric.kind == BootstrapMetric::Kind::mrr) return 1.0 / static_cast<double>(rank);
    return rank <= metric.k ? 1.0 : 0.0;
}

}  // namespace

BootstrapResult paired_cluster_bootstrap(const RankVector& before, const RankVector& after,
                                         std::span<const Index> clusters, BootstrapMetric metric,
                                         const BootstrapConfig& cfg) {
    if (before.size() != after.size() || before.size() != clusters.size()) {
        throw AuditError(ErrorCode::dimension_mismatch, "bootstrap inputs differ in length");
    }
    if (clusters.empty()) throw AuditError(ErrorCode::invalid_argument, "bootstrap needs at least one cluster");
    if (cfg.num_resamples < 1) throw AuditError(ErrorCode::invalid_argument, "num_resamples must be >= 1");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw AuditError(ErrorCode::invalid_argument, "confidence must lie in (0, 1)");
    }

    std::vector<Index> ids(clusters.begin(), clusters.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const std::size_t c = ids.size();

    // Per-cluster query count and summed paired difference.
    std::vector<double> count(c, 0.0), diff(c, 0.0);
    for (std::size_t w = 0; w < clusters.size(); ++w) {
        const auto k = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), clusters[w]) - ids.begin());
        count[k] += 1.0;
        diff[k] += per_query_value(metric, after[w]) - per_query_value(metric, before[w]);
    }

    BootstrapResult res;
    res.num_clusters = c;
    res.num_resamples = cfg.num_resamples;
    res.point_delta = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(before.size());

    std::vector<double> deltas(cfg.num_resamples);
    parallel_for(cfg.num_resamples, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.seed, streams::bootstrap, r));
        double n = 0.0, d = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            const auto k = static_cast<std::size_t>(rng.below(c));
            n += count[k];
            d += diff[k];
        }
        deltas[r] = d / n;
    });

    const double tail = (1.0 - cfg.confidence) / 2.0;
    res.ci_low = quantile_linear(std::span<const double>(deltas), tail);
    res.ci_high = quantile_linear(std::span<const double>(deltas), 1.0 - tail);

    const auto le = static_cast<double>(std::count_if(deltas.begin(), deltas.end(), [](double x) { return x <= 0.0; }));
    const auto ge = static_cast<double>(std::count_if(deltas.begin(), deltas.end(), [](double x) { return x >= 0.0; }));
    const double total = static_cast<double>(cfg.num_resamples);
    res.p_value = std::clamp(2.0 * std::min(le, ge) / total, 1.0 / total, 1.0);
    return res;
}

namespace {

std::vector<double> mid_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw AuditError(ErrorCode::dimension_mismatch, "spearman inputs differ in length");
    if (x.size() < 2) throw AuditError(ErrorCode::invalid_argument, "spearman needs at least two points");
    const auto rx = mid_ranks(x);
    const auto ry = mid_ranks(y);
    const double n = static_cast<double>(rx.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult spearman_test(std::span<const double> x, std::span<const double> y) {
    CorrelationResult res;
    res.n = x.size();
    res.rho = spearman(x, y);
    if (!res.rho || res.n < 3) return res;
    const double r = *res.rho;
    if (std::abs(r) >= 1.0) {
        res.p_value = 0.0;
        return res;
    }
    const double dof = static_cast<double>(res.n - 2);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    boost::math::students_t dist(dof);
    res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return res;
}

CorrelationResult bucket_size_inflation_correlation(const AuditBundle& bundle, const RankVector& before,
                                                    const RankVector& after) {
    if (before.size() != bundle.num_queries() || after.size() != bundle.num_queries()) {
        throw AuditError(ErrorCode::dimension_mismatch, "rank vectors do not match the bundle");
    }
    std::vector<double> size(bundle.num_queries()), gain(bundle.num_queries());
    for (std::size_t w = 0; w < size.size(); ++w) {
        const Index bucket = bundle.candidates().bucket_of(bundle.queries().target_of(w));
        size[w] = static_cast<double>(bundle.candidates().bucket_size(bucket));
        gain[w] = (before[w] > 1 && after[w] == 1) ? 1.0 : 0.0;
    }
    return spearman_test(size, gain);
}

}  // namespace gcbaudit
