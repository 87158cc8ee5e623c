#include "gcbaudit/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace gcbaudit {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::non_finite_logit: return "non_finite_logit";
        case ErrorCode::target_out_of_range: return "target_out_of_range";
        case ErrorCode::empty_bucket: return "empty_bucket";
        case ErrorCode::duplicate_candidate: return "duplicate_candidate";
        case ErrorCode::empty_group: return "empty_group";
        case ErrorCode::invalid_order: return "invalid_order";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io: return "io";
        case ErrorCode::parse: return "parse";
    }
    return "unknown";
}

namespace {

template <typename T>
void require_length(const std::optional<std::vector<T>>& field, std::size_t n, const char* name) {
    if (field && field->size() != n) {
        throw AuditError(ErrorCode::dimension_mismatch,
                         std::string(name) + " has " + std::to_string(field->size()) +
                             " entries, expected " + std::to_string(n));
    }
}

std::vector<std::vector<Index>> invert(std::span<const Index> labels, std::size_t count) {
    std::vector<std::vector<Index>> members(count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[labels[i]].push_back(static_cast<Index>(i));
    }
    return members;
}

}  // namespace

CandidatePool CandidatePool::from_buckets(std::vector<Index> bucket_of,
                                          std::optional<std::size_t> num_buckets,
                                          std::optional<std::vector<std::string>> stimulus_key,
                                          std::optional<std::vector<std::int64_t>> window_index) {
    const std::size_t n = bucket_of.size();
    require_length(stimulus_key, n, "stimulus_key");
    require_length(window_index, n, "window_index");

    std::size_t m = 0;
    for (Index b : bucket_of) m = std::max<std::size_t>(m, std::size_t{b} + 1);
    if (num_buckets) {
        for (std::size_t j = 0; j < n; ++j) {
            if (bucket_of[j] >= *num_buckets) {
                throw AuditError(ErrorCode::invalid_argument,
                                 "candidate " + std::to_string(j) + " has bucket " +
                                     std::to_string(bucket_of[j]) + " >= num_buckets " +
                                     std::to_string(*num_buckets));
            }
        }
        m = *num_buckets;
    }

    CandidatePool pool;
    pool.members_ = invert(bucket_of, m);
    for (std::size_t s = 0; s < m; ++s) {
        if (pool.members_[s].empty()) {
            throw AuditError(ErrorCode::empty_bucket, "bucket " + std::to_string(s) + " has no candidates");
        }
    }

    if (stimulus_key && window_index) {
        std::set<std::pair<std::string_view, std::int64_t>> seen;
        for (std::size_t j = 0; j < n; ++j) {
            if (!seen.emplace((*stimulus_key)[j], (*window_index)[j]).second) {
                throw AuditError(ErrorCode::duplicate_candidate,
                                 "candidate " + std::to_string(j) + " duplicates (stimulus_key=" +
                                     (*stimulus_key)[j] + ", window_index=" +
                                     std::to_string((*window_index)[j]) + ")");
            }
        }
    }

    pool.bucket_of_ = std::move(bucket_of);
    pool.stimulus_key_ = std::move(stimulus_key);
    pool.window_index_ = std::move(window_index);
    return pool;
}

QuerySet QuerySet::from_arrays(std::vector<Index> target_of,
                               std::vector<Index> group_of,
                               std::optional<std::vector<Index>> story_of,
                               std::optional<std::vector<std::int64_t>> order_of,
                               std::optional<std::vector<std::string>> stimulus_key_of) {
    const std::size_t b = target_of.size();
    if (group_of.size() != b) {
        throw AuditError(ErrorCode::dimension_mismatch,
                         "group_of has " + std::to_string(group_of.size()) + " entries, expected " +
                             std::to_string(b));
    }
    require_length(story_of, b, "story_of");
    require_length(order_of, b, "order_of");
    require_length(stimulus_key_of, b, "stimulus_key_of");

    std::size_t g = 0;
    for (Index id : group_of) g = std::max<std::size_t>(g, std::size_t{id} + 1);

    QuerySet qs;
    qs.group_members_ = invert(group_of, g);
    for (std::size_t i = 0; i < g; ++i) {
        if (qs.group_members_[i].empty()) {
            throw AuditError(ErrorCode::empty_group, "query group " + std::to_string(i) + " has no queries");
        }
    }

    if (order_of) {
        // Within one story, order indices must be distinct.
        std::set<std::pair<Index, std::int64_t>> seen;
        for (std::size_t w = 0; w < b; ++w) {
            const Index story = story_of ? (*story_of)[w] : 0;
            if (!seen.emplace(story, (*order_of)[w]).second) {
                throw AuditError(ErrorCode::invalid_order,
                                 "query " + std::to_string(w) + " repeats order index " +
                                     std::to_string((*order_of)[w]) + " within story " +
                                     std::to_string(story));
            }
        }
    }

    qs.target_of_ = std::move(target_of);
    qs.group_of_ = std::move(group_of);
    qs.story_of_ = std::move(story_of);
    qs.order_of_ = std::move(order_of);
    qs.stimulus_key_of_ = std::move(stimulus_key_of);
    return qs;
}

QuerySet QuerySet::with_groups(std::span<const Index> group_of) const {
    if (group_of.size() != size()) {
        throw AuditError(ErrorCode::dimension_mismatch, "grouping length does not match query count");
    }
    // Keep the relative order of ids; drop ids that no longer occur.
    std::vector<Index> used(group_of.begin(), group_of.end());
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<Index> relabeled(group_of.size());
    for (std::size_t w = 0; w < group_of.size(); ++w) {
        relabeled[w] = static_cast<Index>(std::lower_bound(used.begin(), used.end(), group_of[w]) - used.begin());
    }
    return from_arrays(target_of_, std::move(relabeled), story_of_, order_of_, stimulus_key_of_);
}

QuerySet QuerySet::singleton_groups() const {
    std::vector<Index> groups(size());
    for (std::size_t w = 0; w < groups.size(); ++w) groups[w] = static_cast<Index>(w);
    return with_groups(groups);
}

AuditBundle AuditBundle::with_queries(QuerySet queries) const {
    return validate_bundle(logits_, candidates_, std::move(queries));
}

AuditBundle AuditBundle::with_logits(LogitMatrix logits) const {
    return validate_bundle(std::move(logits), candidates_, queries_);
}

AuditBundle validate_bundle(LogitMatrix logits, CandidatePool candidates, QuerySet queries) {
    const std::size_t b = logits.rows();
    const std::size_t n = logits.cols();
    if (b < 1) throw AuditError(ErrorCode::dimension_mismatch, "logit matrix has no query rows");
    if (n < 2) throw AuditError(ErrorCode::dimension_mismatch, "logit matrix needs at least 2 candidates");
    if (queries.size() != b) {
        throw AuditError(ErrorCode::dimension_mismatch,
                         "query manifest has " + std::to_string(queries.size()) +
                             " queries but logit matrix has " + std::to_string(b) + " rows");
    }
    if (candidates.size() != n) {
        throw AuditError(ErrorCode::dimension_mismatch,
                         "candidate manifest has " + std::to_string(candidates.size()) +
                             " candidates but logit matrix has " + std::to_string(n) + " columns");
    }
    for (std::size_t r = 0; r < b; ++r) {
        const auto row = logits.row(r);
        for (std::size_t c = 0; c < n; ++c) {
            if (!std::isfinite(row[c])) {
                throw AuditError(ErrorCode::non_finite_logit,
                                 "non-finite logit at row " + std::to_string(r) + ", column " +
                                     std::to_string(c));
            }
        }
    }
    for (std::size_t w = 0; w < b; ++w) {
        if (queries.target_of(w) >= n) {
            throw AuditError(ErrorCode::target_out_of_range,
                             "target out of range: query " + std::to_string(w) + " targets candidate " +
                                 std::to_string(queries.target_of(w)) + " but N=" + std::to_string(n));
        }
    }
    return AuditBundle(std::move(logits), std::move(candidates), std::move(queries));
}

std::vector<std::size_t> bucket_sizes(const CandidatePool& candidates) {
    std::vector<std::size_t> sizes(candidates.num_buckets());
    for (std::size_t s = 0; s < sizes.size(); ++s) sizes[s] = candidates.bucket_size(s);
    return sizes;
}

}  // namespace gcbaudit
