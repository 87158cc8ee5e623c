#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcbaudit {

using Index = std::uint32_t;

enum class ErrorCode {
    dimension_mismatch,
    non_finite_logit,
    target_out_of_range,
    empty_bucket,
    duplicate_candidate,
    empty_group,
    invalid_order,
    invalid_argument,
    io,
    parse,
};

std::string_view to_string(ErrorCode code);

class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Score used for candidates removed by hard pruning. It sits below every
/// other finite float, and survives a float round trip through the logit
/// file format.
inline constexpr float kPrunedScore = std::numeric_limits<float>::lowest();

/// Dense row-major matrix. `Matrix<float>` holds exported logits;
/// `Matrix<double>` holds corrected scores produced by the interventions.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw AuditError(ErrorCode::dimension_mismatch,
                             "matrix storage has " + std::to_string(values_.size()) +
                                 " values, expected " + std::to_string(rows_ * cols_));
        }
    }

    template <typename U>
    static Matrix converted_from(const Matrix<U>& other) {
        std::vector<T> values(other.values().begin(), other.values().end());
        return Matrix(other.rows(), other.cols(), std::move(values));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const T> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<T> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

    T operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    T& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

    const std::vector<T>& values() const noexcept { return values_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> values_;
};

using LogitMatrix = Matrix<float>;
using ScoreMatrix = Matrix<double>;

/// Candidate side: every candidate j belongs to exactly one sentence bucket.
class CandidatePool {
public:
    CandidatePool() = default;

    /// `num_buckets` defaults to max(bucket_of)+1. Bucket ids at or above an
    /// explicit `num_buckets`, and buckets without members, are rejected.
    static CandidatePool from_buckets(std::vector<Index> bucket_of,
                                      std::optional<std::size_t> num_buckets = std::nullopt,
                                      std::optional<std::vector<std::string>> stimulus_key = std::nullopt,
                                      std::optional<std::vector<std::int64_t>> window_index = std::nullopt);

    std::size_t size() const noexcept { return bucket_of_.size(); }
    std::size_t num_buckets() const noexcept { return members_.size(); }
    Index bucket_of(std::size_t j) const { return bucket_of_[j]; }
    std::span<const Index> bucket_of() const noexcept { return bucket_of_; }
    std::span<const Index> members(std::size_t s) const { return members_[s]; }
    std::size_t bucket_size(std::size_t s) const { return members_[s].size(); }

    const std::optional<std::vector<std::string>>& stimulus_key() const noexcept { return stimulus_key_; }
    const std::optional<std::vector<std::int64_t>>& window_index() const noexcept { return window_index_; }

    friend bool operator==(const CandidatePool&, const CandidatePool&) = default;

private:
    std::vector<Index> bucket_of_;
    std::vector<std::vector<Index>> members_;
    std::optional<std::vector<std::string>> stimulus_key_;
    std::optional<std::vector<std::int64_t>> window_index_;
};

/// Query side: target candidate, presented-sentence group and optional
/// story/temporal metadata for every query window.
class QuerySet {
public:
    QuerySet() = default;

    static QuerySet from_arrays(std::vector<Index> target_of,
                                std::vector<Index> group_of,
                                std::optional<std::vector<Index>> story_of = std::nullopt,
                                std::optional<std::vector<std::int64_t>> order_of = std::nullopt,
                                std::optional<std::vector<std::string>> stimulus_key_of = std::nullopt);

    /// Same queries with a new grouping. Unused group ids are dropped and the
    /// rest renumbered densely, preserving their order.
    QuerySet with_groups(std::span<const Index> group_of) const;

    /// One group per query.
    QuerySet singleton_groups() const;

    std::size_t size() const noexcept { return target_of_.size(); }
    std::size_t num_groups() const noexcept { return group_members_.size(); }
    Index target_of(std::size_t w) const { return target_of_[w]; }
    std::span<const Index> target_of() const noexcept { return target_of_; }
    Index group_of(std::size_t w) const { return group_of_[w]; }
    std::span<const Index> group_of() const noexcept { return group_of_; }
    std::span<const Index> group_members(std::size_t g) const { return group_members_[g]; }

    const std::optional<std::vector<Index>>& story_of() const noexcept { return story_of_; }
    const std::optional<std::vector<std::int64_t>>& order_of() const noexcept { return order_of_; }
    const std::optional<std::vector<std::string>>& stimulus_key_of() const noexcept { return stimulus_key_of_; }

    friend bool operator==(const QuerySet&, const QuerySet&) = default;

private:
    std::vector<Index> target_of_;
    std::vector<Index> group_of_;
    std::vector<std::vector<Index>> group_members_;
    std::optional<std::vector<Index>> story_of_;
    std::optional<std::vector<std::int64_t>> order_of_;
    std::optional<std::vector<std::string>> stimulus_key_of_;
};

/// Logits plus both manifests, checked for mutual consistency. Only
/// `validate_bundle` constructs one.
class AuditBundle {
public:
    const LogitMatrix& logits() const noexcept { return logits_; }
    const CandidatePool& candidates() const noexcept { return candidates_; }
    const QuerySet& queries() const noexcept { return queries_; }

    std::size_t num_queries() const noexcept { return logits_.rows(); }
    std::size_t num_candidates() const noexcept { return logits_.cols(); }

    /// Same candidates and logits, different query grouping.
    AuditBundle with_queries(QuerySet queries) const;
    AuditBundle with_logits(LogitMatrix logits) const;

    friend bool operator==(const AuditBundle&, const AuditBundle&) = default;

private:
    friend AuditBundle validate_bundle(LogitMatrix, CandidatePool, QuerySet);
    AuditBundle(LogitMatrix l, CandidatePool c, QuerySet q)
        : logits_(std::move(l)), candidates_(std::move(c)), queries_(std::move(q)) {}

    LogitMatrix logits_;
    CandidatePool candidates_;
    QuerySet queries_;
};

AuditBundle validate_bundle(LogitMatrix logits, CandidatePool candidates, QuerySet queries);

std::vector<std::size_t> bucket_sizes(const CandidatePool& candidates);

}  // namespace gcbaudit
