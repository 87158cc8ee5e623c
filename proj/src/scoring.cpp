#include "gcbaudit/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "gcbaudit/parallel.hpp"

namespace gcbaudit {

EmbeddingWindow::EmbeddingWindow(std::size_t d, std::size_t t, std::vector<float> v)
    : dim(d), steps(t), values(std::move(v)) {
    if (dim < 1 || steps < 1 || values.size() != dim * steps) {
        throw AuditError(ErrorCode::dimension_mismatch, "embedding window storage does not match D x T");
    }
    for (float x : values) {
        if (!std::isfinite(x)) throw AuditError(ErrorCode::non_finite_logit, "non-finite embedding value");
    }
}

std::vector<float> compute_logits(const EmbeddingWindow& query,
                                  std::span<const EmbeddingWindow> candidates,
                                  const ScoringConfig& cfg) {
    if (!(cfg.epsilon >= 0.0)) throw AuditError(ErrorCode::invalid_argument, "epsilon must be non-negative");
    std::vector<float> row(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const auto& cand = candidates[j];
        if (cand.dim != query.dim || cand.steps != query.steps) {
            throw AuditError(ErrorCode::dimension_mismatch,
                             "candidate " + std::to_string(j) + " shape differs from the query window");
        }
        double dot = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < cand.values.size(); ++i) {
            dot += static_cast<double>(query.values[i]) * cand.values[i];
            sq += static_cast<double>(cand.values[i]) * cand.values[i];
        }
        row[j] = static_cast<float>(dot / (std::sqrt(sq) + cfg.epsilon));
    }
    return row;
}

namespace {

template <typename T>
RankVector ranks_of(const Matrix<T>& m, std::span<const Index> targets) {
    if (targets.size() != m.rows()) {
        throw AuditError(ErrorCode::dimension_mismatch, "target count does not match matrix rows");
    }
    RankVector out;
    out.ranks.resize(m.rows());
    parallel_for(m.rows(), [&](std::size_t w) {
        if (targets[w] >= m.cols()) {
            throw AuditError(ErrorCode::target_out_of_range, "target out of range for query " + std::to_string(w));
        }
        out.ranks[w] = rank_in_row(m.row(w), targets[w]);
    });
    return out;
}

}  // namespace

RankVector compute_ranks(const LogitMatrix& logits, std::span<const Index> targets) {
    return ranks_of(logits, targets);
}

RankVector compute_ranks(const ScoreMatrix& scores, std::span<const Index> targets) {
    return ranks_of(scores, targets);
}

RankVector compute_ranks(const AuditBundle& bundle) {
    return ranks_of(bundle.logits(), bundle.queries().target_of());
}

MetricsReport compute_metrics(const RankVector& ranks, std::span<const std::size_t> ks) {
    if (ranks.size() == 0) throw AuditError(ErrorCode::invalid_argument, "cannot compute metrics on an empty rank vector");
    const std::size_t b = ranks.size();
    MetricsReport rep;
    rep.num_queries = b;
    for (std::size_t k : ks) {
        std::size_t hits = 0;
        for (auto r : ranks.ranks) hits += (r <= k) ? 1 : 0;
        rep.recall_at[k] = static_cast<double>(hits) / static_cast<double>(b);
    }
    double rr = 0.0;
    for (auto r : ranks.ranks) rr += 1.0 / static_cast<double>(r);
    rep.mrr = rr / static_cast<double>(b);

    std::vector<std::uint32_t> sorted = ranks.ranks;
    std::sort(sorted.begin(), sorted.end());
    rep.medr = (b % 2 == 1) ? static_cast<double>(sorted[b / 2])
                            : 0.5 * (static_cast<double>(sorted[b / 2 - 1]) + static_cast<double>(sorted[b / 2]));
    return rep;
}

std::size_t count_top1(const RankVector& ranks) {
    return static_cast<std::size_t>(std::count(ranks.ranks.begin(), ranks.ranks.end(), 1u));
}

FlipCounts flip_analysis(const RankVector& before, const RankVector& after) {
    if (before.size() != after.size()) throw AuditError(ErrorCode::dimension_mismatch, "rank vectors differ in length");
    FlipCounts f;
    for (std::size_t w = 0; w < before.size(); ++w) {
        if (before[w] == 1 && after[w] > 1) ++f.good_to_bad;
        if (before[w] > 1 && after[w] == 1) ++f.bad_to_good;
    }
    f.net = static_cast<std::int64_t>(f.bad_to_good) - static_cast<std::int64_t>(f.good_to_bad);
    const auto total = f.bad_to_good + f.good_to_bad;
    if (total > 0) f.balance = static_cast<double>(f.net) / static_cast<double>(total);
    return f;
}

std::vector<RankIntervalCorrection> rank_bucket_correction(const RankVector& before, const RankVector& after,
                                                           std::span<const RankInterval> intervals) {
    if (before.size() != after.size()) throw AuditError(ErrorCode::dimension_mismatch, "rank vectors differ in length");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& a = intervals[i];
        if (a.hi && *a.hi < a.lo) throw AuditError(ErrorCode::invalid_argument, "rank interval has hi < lo");
        for (std::size_t k = i + 1; k < intervals.size(); ++k) {
            const auto& b = intervals[k];
            const bool a_before_b = a.hi && *a.hi < b.lo;
            const bool b_before_a = b.hi && *b.hi < a.lo;
            if (!a_before_b && !b_before_a) throw AuditError(ErrorCode::invalid_argument, "rank intervals overlap");
        }
    }
    std::vector<RankIntervalCorrection> out;
    out.reserve(intervals.size());
    for (const auto& iv : intervals) {
        RankIntervalCorrection row{iv, 0, 0, std::nullopt};
        for (std::size_t w = 0; w < before.size(); ++w) {
            if (!iv.contains(before[w])) continue;
            ++row.total;
            if (after[w] == 1) ++row.corrected;
        }
        if (row.total > 0) row.rate = static_cast<double>(row.corrected) / static_cast<double>(row.total);
        out.push_back(row);
    }
    return out;
}

std::vector<LengthBin> length_binned_delta(const RankVector& before, const RankVector& after,
                                           const QuerySet& queries,
                                           std::span<const std::size_t> lower_edges) {
    if (lower_edges.empty()) throw AuditError(ErrorCode::invalid_argument, "length bins need at least one edge");
    if (before.size() != after.size() || before.size() != queries.size()) {
        throw AuditError(ErrorCode::dimension_mismatch, "rank vectors and queries differ in length");
    }
    for (std::size_t i = 1; i < lower_edges.size(); ++i) {
        if (lower_edges[i] <= lower_edges[i - 1]) {
            throw AuditError(ErrorCode::invalid_argument, "length bin edges must be strictly increasing");
        }
    }

    std::vector<LengthBin> bins(lower_edges.size());
    std::vector<std::size_t> hits_before(bins.size(), 0), hits_after(bins.size(), 0);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        bins[i].lo = lower_edges[i];
        if (i + 1 < bins.size()) bins[i].hi = lower_edges[i + 1];
    }
    for (std::size_t g = 0; g < queries.num_groups(); ++g) {
        const auto members = queries.group_members(g);
        const std::size_t len = members.size();
        if (len < lower_edges.front()) {
            throw AuditError(ErrorCode::invalid_argument,
                             "group of size " + std::to_string(len) + " falls below the first length bin");
        }
        const auto it = std::upper_bound(lower_edges.begin(), lower_edges.end(), len);
        const auto bin = static_cast<std::size_t>(it - lower_edges.begin()) - 1;
        ++bins[bin].num_groups;
        bins[bin].num_queries += len;
        for (Index w : members) {
            hits_before[bin] += before[w] == 1 ? 1 : 0;
            hits_after[bin] += after[w] == 1 ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].num_queries == 0) continue;
        const double n = static_cast<double>(bins[i].num_queries);
        bins[i].r1_before = static_cast<double>(hits_before[i]) / n;
        bins[i].r1_after = static_cast<double>(hits_after[i]) / n;
        bins[i].delta = bins[i].r1_after - bins[i].r1_before;
    }
    return bins;
}

}  // namespace gcbaudit
