#include "gcbaudit/oracle.hpp"

#include <functional>

#include "gcbaudit/parallel.hpp"

namespace gcbaudit {

RankVector within_bucket_ranks(const AuditBundle& bundle) {
    const auto& pool = bundle.candidates();
    RankVector out;
    out.ranks.resize(bundle.num_queries());
    parallel_for(bundle.num_queries(), [&](std::size_t w) {
        const Index target = bundle.queries().target_of(w);
        const auto row = bundle.logits().row(w);
        const float t = row[target];
        std::uint32_t rank = 1;
        for (Index j : pool.members(pool.bucket_of(target))) {
            if (row[j] > t || (row[j] == t && j < target)) ++rank;
        }
        out.ranks[w] = rank;
    });
    return out;
}

OracleReport oracle_within_bucket(const AuditBundle& bundle, std::span<const std::size_t> ks) {
    OracleReport rep;
    rep.within_bucket_ranks = within_bucket_ranks(bundle);
    rep.metrics = compute_metrics(rep.within_bucket_ranks, ks);
    const double b = static_cast<double>(bundle.num_queries());
    rep.headroom_r1 = static_cast<double>(count_top1(rep.within_bucket_ranks)) / b -
                      static_cast<double>(count_top1(compute_ranks(bundle))) / b;
    return rep;
}

namespace {

std::optional<double> fraction(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

HeadroomDecomposition decompose_headroom(const AuditBundle& bundle, const GcbSupport& support, double gamma,
                                         std::span<const RankInterval> intervals) {
    const auto targets = bundle.queries().target_of();
    const RankVector base = compute_ranks(bundle);
    const RankVector gcb = compute_ranks(apply_bias(bundle, support, gamma), targets);
    const RankVector prune = compute_ranks(apply_pruning(bundle, support), targets);
    const RankVector oracle = within_bucket_ranks(bundle);
    const std::vector<bool> hit = bucket_hits(bundle, support);
    const std::size_t b = bundle.num_queries();

    auto make_row = [&](std::string name, const std::function<bool(std::size_t)>& in_subset) {
        HeadroomRow row;
        row.subset = std::move(name);
        std::size_t hits = 0, base1 = 0, gcb1 = 0, prune1 = 0, oracle1 = 0;
        for (std::size_t w = 0; w < b; ++w) {
            if (!in_subset(w)) continue;
            ++row.count;
            hits += hit[w] ? 1 : 0;
            base1 += base[w] == 1 ? 1 : 0;
            gcb1 += gcb[w] == 1 ? 1 : 0;
            prune1 += prune[w] == 1 ? 1 : 0;
            oracle1 += oracle[w] == 1 ? 1 : 0;
        }
        row.bucket_hit_rate = fraction(hits, row.count);
        row.base_r1 = fraction(base1, row.count);
        row.gcb_r1 = fraction(gcb1, row.count);
        row.prune_r1 = fraction(prune1, row.count);
        row.oracle_r1 = fraction(oracle1, row.count);
        return row;
    };

    HeadroomDecomposition out;
    out.rows.push_back(make_row("all", [](std::size_t) { return true; }));
    out.rows.push_back(make_row("bucket_hit", [&](std::size_t w) { return hit[w]; }));
    out.rows.push_back(make_row("bucket_miss", [&](std::size_t w) { return !hit[w]; }));
    out.rows.push_back(make_row("baseline_errors", [&](std::size_t w) { return base[w] > 1; }));
    out.rows.push_back(make_row("baseline_errors_bucket_hit", [&](std::size_t w) { return base[w] > 1 && hit[w]; }));
    out.rows.push_back(make_row("baseline_errors_bucket_miss", [&](std::size_t w) { return base[w] > 1 && !hit[w]; }));

    const auto& all = out.rows.front();
    out.oracle_headroom_r1 = *all.oracle_r1 - *all.base_r1;
    out.gcb_recovered_r1 = *all.gcb_r1 - *all.base_r1;

    for (const auto& iv : rank_bucket_correction(base, gcb, intervals)) {
        RankHeadroomRow row;
        row.interval = iv.interval;
        row.total = iv.total;
        row.corrected = iv.corrected;
        row.correction_rate = iv.rate;
        std::size_t hits = 0, oracle1 = 0;
        for (std::size_t w = 0; w < b; ++w) {
            if (!iv.interval.contains(base[w])) continue;
            hits += hit[w] ? 1 : 0;
            oracle1 += oracle[w] == 1 ? 1 : 0;
        }
        row.bucket_hit_rate = fraction(hits, row.total);
        row.oracle_r1 = fraction(oracle1, row.total);
        out.by_baseline_rank.push_back(row);
    }
    return out;
}

HeadroomDecomposition decompose_headroom(const AuditBundle& bundle, const GcbConfig& cfg,
                                         std::span<const RankInterval> intervals) {
    return decompose_headroom(bundle, compute_support(bundle, cfg, Grouping::sentence), cfg.gamma, intervals);
}

}  // namespace gcbaudit
