#include "gcbaudit/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "gcbaudit/parallel.hpp"
#include "gcbaudit/rng.hpp"
#include "gcbaudit/scoring.hpp"

namespace gcbaudit {

std::string_view to_string(PerturbKind k) {
    return k == PerturbKind::neighbour_once ? "neighbour_once" : "random_within_story";
}

PerturbKind parse_perturb_kind(std::string_view text) {
    if (text == "neighbour_once" || text == "neighbor_once") return PerturbKind::neighbour_once;
    if (text == "random_within_story") return PerturbKind::random_within_story;
    throw AuditError(ErrorCode::invalid_argument, "unknown perturbation kind '" + std::string(text) + "'");
}

namespace {

Index story_of(const QuerySet& q, std::size_t w) { return q.story_of() ? (*q.story_of())[w] : 0; }

PerturbResult neighbour_once(const QuerySet& queries, const PerturbConfig& cfg) {
    if (!queries.order_of()) {
        throw AuditError(ErrorCode::invalid_argument, "neighbour_once needs temporal order metadata");
    }
    const auto& order = *queries.order_of();

    struct GroupSpan {
        Index group;
        Index first;  // earliest window
        Index last;   // latest window
    };
    // Story of a group is the story of its earliest window.
    std::map<Index, std::vector<GroupSpan>> stories;
    for (std::size_t g = 0; g < queries.num_groups(); ++g) {
        const auto members = queries.group_members(g);
        const auto cmp = [&](Index a, Index b) { return order[a] < order[b]; };
        const Index first = *std::min_element(members.begin(), members.end(), cmp);
        const Index last = *std::max_element(members.begin(), members.end(), cmp);
        stories[story_of(queries, first)].push_back({static_cast<Index>(g), first, last});
    }

    std::vector<Index> groups(queries.group_of().begin(), queries.group_of().end());
    PerturbResult res;
    for (auto& [story, spans] : stories) {
        std::sort(spans.begin(), spans.end(),
                  [&](const GroupSpan& a, const GroupSpan& b) { return order[a.first] < order[b.first]; });
        for (std::size_t i = 0; i < spans.size(); ++i) {
            const auto& span = spans[i];
            bool first_moved = false;
            if (i > 0) {
                Rng rng(derive_seed(cfg.seed, streams::perturb, 2 * std::uint64_t{span.first}));
                if (rng.bernoulli(cfg.p)) {
                    groups[span.first] = spans[i - 1].group;
                    first_moved = true;
                    ++res.moved;
                }
            }
            if (i + 1 < spans.size() && !(first_moved && span.last == span.first)) {
                Rng rng(derive_seed(cfg.seed, streams::perturb, 2 * std::uint64_t{span.last} + 1));
                if (rng.bernoulli(cfg.p)) {
                    groups[span.last] = spans[i + 1].group;
                    ++res.moved;
                }
            }
        }
    }
    res.queries = queries.with_groups(groups);
    return res;
}

PerturbResult random_within_story(const QuerySet& queries, const PerturbConfig& cfg) {
    if (!queries.story_of()) {
        throw AuditError(ErrorCode::invalid_argument, "random_within_story needs story metadata");
    }
    std::map<Index, std::vector<Index>> story_groups;
    for (std::size_t w = 0; w < queries.size(); ++w) story_groups[story_of(queries, w)].push_back(queries.group_of(w));
    for (auto& [story, gs] : story_groups) {
        std::sort(gs.begin(), gs.end());
        gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    }

    PerturbResult res;
    if (cfg.p > 0.0) {
        for (const auto& [story, gs] : story_groups) res.skipped_single_group_stories += gs.size() == 1 ? 1 : 0;
    }

    std::vector<Index> groups(queries.group_of().begin(), queries.group_of().end());
    for (std::size_t w = 0; w < queries.size(); ++w) {
        const auto& gs = story_groups[story_of(queries, w)];
        if (gs.size() < 2) continue;
        Rng rng(derive_seed(cfg.seed, streams::perturb, w));
        if (!rng.bernoulli(cfg.p)) continue;
        // Uniform over the story's groups other than the current one.
        const Index current = queries.group_of(w);
        const auto own = static_cast<std::size_t>(std::lower_bound(gs.begin(), gs.end(), current) - gs.begin());
        auto pick = static_cast<std::size_t>(rng.below(gs.size() - 1));
        if (pick >= own) ++pick;
        groups[w] = gs[pick];
        ++res.moved;
    }
    res.queries = queries.with_groups(groups);
    return res;
}

}  // namespace

PerturbResult perturb_groups(const QuerySet& queries, const PerturbConfig& cfg) {
    if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw AuditError(ErrorCode::invalid_argument, "perturbation p must lie in [0, 1]");
    return cfg.kind == PerturbKind::neighbour_once ? neighbour_once(queries, cfg) : random_within_story(queries, cfg);
}

RowMoments row_moments(std::span<const float> row) {
    RowMoments m;
    for (float x : row) m.mean += x;
    m.mean /= static_cast<double>(row.size());
    double ss = 0.0;
    for (float x : row) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(row.size()));
    return m;
}

std::vector<float> attenuate_row(std::span<const float> row, double alpha, std::span<const Index> permutation) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw AuditError(ErrorCode::invalid_argument, "alpha must lie in [0, 1]");
    if (permutation.size() != row.size()) throw AuditError(ErrorCode::dimension_mismatch, "permutation length differs from row");
    const auto mom = row_moments(row);
    std::vector<float> out(row.begin(), row.end());
    if (mom.stddev == 0.0) return out;
    const double keep = std::sqrt(alpha);
    const double mix = std::sqrt(1.0 - alpha);
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double z = (row[j] - mom.mean) / mom.stddev;
        const double zp = (row[permutation[j]] - mom.mean) / mom.stddev;
        out[j] = static_cast<float>(mom.mean + mom.stddev * (keep * z + mix * zp));
    }
    return out;
}

LogitMatrix attenuate_logits(const LogitMatrix& logits, const AttenuationConfig& cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw AuditError(ErrorCode::invalid_argument, "alpha must lie in [0, 1]");
    if (cfg.alpha == 1.0) return logits;
    LogitMatrix out(logits.rows(), logits.cols());
    parallel_for(logits.rows(), [&](std::size_t r) {
        std::vector<Index> perm(logits.cols());
        std::iota(perm.begin(), perm.end(), Index{0});
        Rng rng(derive_seed(cfg.seed, streams::attenuation, r));
        rng.shuffle(perm.begin(), perm.end());
        const auto mixed = attenuate_row(logits.row(r), cfg.alpha, perm);
        std::copy(mixed.begin(), mixed.end(), out.row(r).begin());
    });
    return out;
}

std::vector<AttenuationPoint> attenuation_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                                std::span<const double> alphas, std::uint64_t seed) {
    const std::size_t one[] = {1};
    std::vector<AttenuationPoint> out;
    for (double alpha : alphas) {
        const auto attenuated = bundle.with_logits(attenuate_logits(bundle.logits(), {alpha, seed}));
        const auto base = compute_metrics(compute_ranks(attenuated), one);
        const auto gcb = compute_metrics(compute_ranks(apply_gcb(attenuated, cfg), attenuated.queries().target_of()), one);
        AttenuationPoint pt;
        pt.alpha = alpha;
        pt.base_r1 = base.recall(1);
        pt.gcb_r1 = gcb.recall(1);
        pt.delta_r1 = pt.gcb_r1 - pt.base_r1;
        pt.base_mrr = base.mrr;
        pt.gcb_mrr = gcb.mrr;
        pt.delta_mrr = pt.gcb_mrr - pt.base_mrr;
        out.push_back(pt);
    }
    return out;
}

}  // namespace gcbaudit
