#include "gcbaudit/gcb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gcbaudit/order_stats.hpp"
#include "gcbaudit/parallel.hpp"

namespace gcbaudit {

std::string_view to_string(Normalizer n) {
    switch (n) {
        case Normalizer::none: return "none";
        case Normalizer::bucket_sqrt: return "bucket_sqrt";
        case Normalizer::bucket_count: return "bucket_count";
        case Normalizer::kept_count: return "kept_count";
    }
    return "none";
}

std::string_view to_string(Aggregator a) {
    switch (a) {
        case Aggregator::mean_top_m: return "mean_top_m";
        case Aggregator::lse_top_m: return "lse_top_m";
    }
    return "mean_top_m";
}

Normalizer parse_normalizer(std::string_view text) {
    for (auto n : {Normalizer::none, Normalizer::bucket_sqrt, Normalizer::bucket_count, Normalizer::kept_count}) {
        if (text == to_string(n)) return n;
    }
    throw AuditError(ErrorCode::invalid_argument, "unknown normalizer '" + std::string(text) + "'");
}

Aggregator parse_aggregator(std::string_view text) {
    if (text == "mean" || text == to_string(Aggregator::mean_top_m)) return Aggregator::mean_top_m;
    if (text == "lse" || text == to_string(Aggregator::lse_top_m)) return Aggregator::lse_top_m;
    throw AuditError(ErrorCode::invalid_argument, "unknown aggregator '" + std::string(text) + "'");
}

void validate(const GcbConfig& cfg) {
    auto fail = [](const std::string& msg) { throw AuditError(ErrorCode::invalid_argument, msg); };
    if (cfg.top_k < 1) fail("top_k must be >= 1");
    if (!(cfg.gate_quantile > 0.0 && cfg.gate_quantile < 1.0)) fail("gate_quantile must lie in (0, 1)");
    if (cfg.evidence_m < 1) fail("evidence_m must be >= 1");
    if (cfg.selected_buckets < 1) fail("selected_buckets must be >= 1");
    if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) fail("gamma must be finite and >= 0");
}

LocalEvidence extract_evidence(std::span<const float> row, const GcbConfig& cfg) {
    LocalEvidence ev;
    ev.topk = top_k_indices(row, cfg.top_k);
    ev.threshold = quantile_linear(row, cfg.gate_quantile);
    const double offset = (cfg.gate_enabled || cfg.subtract_threshold) ? ev.threshold : 0.0;
    for (Index j : ev.topk) {
        const double v = row[j];
        if (cfg.gate_enabled && v < ev.threshold) continue;
        ev.retained.push_back(j);
        ev.excess.push_back(v - offset);
    }
    return ev;
}

bool BucketSupport::is_selected(Index s) const {
    return std::find(selected.begin(), selected.end(), s) != selected.end();
}

namespace {

double aggregate(std::vector<double>& values, const GcbConfig& cfg) {
    const std::size_t take = std::min(cfg.evidence_m, values.size());
    std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(take), values.end(),
                      std::greater<>());
    if (cfg.aggregator == Aggregator::mean_top_m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < take; ++i) sum += values[i];
        return sum / static_cast<double>(take);
    }
    const double top = values[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < take; ++i) acc += std::exp(values[i] - top);
    return top + std::log(acc);
}

double normalizer_weight(Normalizer n, std::size_t bucket_size, std::size_t kept) {
    switch (n) {
        case Normalizer::none: return 1.0;
        case Normalizer::bucket_sqrt: return 1.0 / std::sqrt(static_cast<double>(bucket_size));
        case Normalizer::bucket_count: return 1.0 / static_cast<double>(bucket_size);
        case Normalizer::kept_count: return 1.0 / static_cast<double>(kept);
    }
    return 1.0;
}

}  // namespace

BucketSupport pool_bucket_support(std::span<const LocalEvidence> evidence,
                                  const CandidatePool& candidates, const GcbConfig& cfg) {
    const std::size_t m = candidates.num_buckets();
    std::vector<std::vector<double>> pooled(m);
    for (const auto& ev : evidence) {
        for (std::size_t i = 0; i < ev.retained.size(); ++i) {
            pooled[candidates.bucket_of(ev.retained[i])].push_back(ev.excess[i]);
        }
    }

    BucketSupport out;
    out.support.assign(m, 0.0);
    out.evidence_counts.assign(m, 0);
    for (std::size_t s = 0; s < m; ++s) {
        out.evidence_counts[s] = pooled[s].size();
        if (pooled[s].empty()) continue;
        const double agg = aggregate(pooled[s], cfg);
        out.support[s] = normalizer_weight(cfg.normalizer, candidates.bucket_size(s), pooled[s].size()) * agg;
    }

    std::vector<Index> positive;
    for (std::size_t s = 0; s < m; ++s) {
        if (out.support[s] > 0.0) positive.push_back(static_cast<Index>(s));
    }
    const std::size_t take = std::min(cfg.selected_buckets, positive.size());
    std::partial_sort(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(take), positive.end(),
                      [&](Index a, Index b) {
                          return out.support[a] > out.support[b] || (out.support[a] == out.support[b] && a < b);
                      });
    positive.resize(take);
    out.selected = std::move(positive);
    return out;
}

GcbSupport compute_support(const AuditBundle& bundle, const GcbConfig& cfg, Grouping grouping) {
    validate(cfg);
    const auto& queries = bundle.queries();
    const std::size_t b = bundle.num_queries();

    GcbSupport out;
    out.grouping = grouping;
    std::vector<std::vector<Index>> members;
    if (grouping == Grouping::sentence) {
        out.group_of.assign(queries.group_of().begin(), queries.group_of().end());
        members.resize(queries.num_groups());
        for (std::size_t g = 0; g < members.size(); ++g) {
            const auto span = queries.group_members(g);
            members[g].assign(span.begin(), span.end());
        }
    } else {
        out.group_of.resize(b);
        members.resize(b);
        for (std::size_t w = 0; w < b; ++w) {
            out.group_of[w] = static_cast<Index>(w);
            members[w] = {static_cast<Index>(w)};
        }
    }

    out.groups.resize(members.size());
    out.retained_per_query.assign(b, 0);
    out.unique_buckets_per_query.assign(b, 0);
    parallel_for(members.size(), [&](std::size_t g) {
        std::vector<LocalEvidence> evidence;
        evidence.reserve(members[g].size());
        for (Index w : members[g]) {
            evidence.push_back(extract_evidence(bundle.logits().row(w), cfg));
            const auto& ev = evidence.back();
            std::vector<Index> buckets;
            buckets.reserve(ev.retained.size());
            for (Index j : ev.retained) buckets.push_back(bundle.candidates().bucket_of(j));
            std::sort(buckets.begin(), buckets.end());
            out.retained_per_query[w] = ev.retained.size();
            out.unique_buckets_per_query[w] =
                static_cast<std::size_t>(std::unique(buckets.begin(), buckets.end()) - buckets.begin());
        }
        out.groups[g] = pool_bucket_support(evidence, bundle.candidates(), cfg);
    });
    return out;
}

ScoreMatrix apply_bias(const AuditBundle& bundle, const GcbSupport& support, double gamma) {
    auto out = ScoreMatrix::converted_from(bundle.logits());
    const auto& pool = bundle.candidates();
    parallel_for(bundle.num_queries(), [&](std::size_t w) {
        const auto& sup = support.for_query(w);
        auto row = out.row(w);
        for (Index s : sup.selected) {
            const double bias = gamma * sup.support[s];
            if (bias == 0.0) continue;
            for (Index j : pool.members(s)) row[j] += bias;
        }
    });
    return out;
}

ScoreMatrix apply_pruning(const AuditBundle& bundle, const GcbSupport& support) {
    ScoreMatrix out(bundle.num_queries(), bundle.num_candidates(), static_cast<double>(kPrunedScore));
    const auto& pool = bundle.candidates();
    parallel_for(bundle.num_queries(), [&](std::size_t w) {
        const auto src = bundle.logits().row(w);
        auto row = out.row(w);
        for (Index s : support.for_query(w).selected) {
            for (Index j : pool.members(s)) row[j] = src[j];
        }
    });
    return out;
}

std::vector<bool> bucket_hits(const AuditBundle& bundle, const GcbSupport& support) {
    std::vector<bool> mask(bundle.num_queries());
    for (std::size_t w = 0; w < mask.size(); ++w) {
        const Index truth = bundle.candidates().bucket_of(bundle.queries().target_of(w));
        mask[w] = support.for_query(w).is_selected(truth);
    }
    return mask;
}

ScoreMatrix apply_gcb(const AuditBundle& bundle, const GcbConfig& cfg) {
    return apply_bias(bundle, compute_support(bundle, cfg, Grouping::sentence), cfg.gamma);
}

ScoreMatrix apply_gcb_single(const AuditBundle& bundle, const GcbConfig& cfg) {
    return apply_bias(bundle, compute_support(bundle, cfg, Grouping::singleton), cfg.gamma);
}

ScoreMatrix apply_hard_pruning(const AuditBundle& bundle, const GcbConfig& cfg) {
    return apply_pruning(bundle, compute_support(bundle, cfg, Grouping::sentence));
}

std::vector<bool> bucket_hit_mask(const AuditBundle& bundle, const GcbConfig& cfg) {
    return bucket_hits(bundle, compute_support(bundle, cfg, Grouping::sentence));
}

}  // namespace gcbaudit
