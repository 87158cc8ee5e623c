#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "gcbaudit/core.hpp"

using namespace gcbaudit;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const AuditError& e) {
        return e.code();
    }
    FAIL("expected an AuditError");
    return ErrorCode::io;
}

}  // namespace

TEST_CASE("minimal consistent bundle validates") {
    const auto b = fixtures::make_bundle({{1, 2, 3}, {3, 2, 1}}, {0, 0, 1}, {0, 2}, {0, 0});
    CHECK(b.num_queries() == 2);
    CHECK(b.num_candidates() == 3);
    CHECK(b.candidates().num_buckets() == 2);
}

TEST_CASE("validation reports typed errors") {
    CHECK(code_of([] { fixtures::make_bundle({{1, 2, 3}}, {0, 0, 1}, {3}, {0}); }) == ErrorCode::target_out_of_range);
    CHECK(code_of([] {
              fixtures::make_bundle({{1, std::numeric_limits<float>::quiet_NaN(), 3}}, {0, 0, 1}, {0}, {0});
          }) == ErrorCode::non_finite_logit);
    CHECK(code_of([] {
              fixtures::make_bundle({{1, std::numeric_limits<float>::infinity(), 3}}, {0, 0, 1}, {0}, {0});
          }) == ErrorCode::non_finite_logit);
    CHECK(code_of([] { fixtures::make_bundle({{1, 2, 3}}, {0, 0}, {0}, {0}); }) == ErrorCode::dimension_mismatch);
    CHECK(code_of([] { fixtures::make_bundle({{1, 2}, {1, 2}}, {0, 1}, {0}, {0}); }) == ErrorCode::dimension_mismatch);
    CHECK(code_of([] { fixtures::make_bundle({{1}}, {0}, {0}, {0}); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("candidate pool invariants") {
    CHECK(code_of([] { CandidatePool::from_buckets({0, 2}); }) == ErrorCode::empty_bucket);
    CHECK(code_of([] { CandidatePool::from_buckets({0, 3}, 3); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] {
              CandidatePool::from_buckets({0, 1}, std::nullopt, std::vector<std::string>{"a", "a"},
                                          std::vector<std::int64_t>{4, 4});
          }) == ErrorCode::duplicate_candidate);
    CHECK_NOTHROW(CandidatePool::from_buckets({0, 1}, std::nullopt, std::vector<std::string>{"a", "a"},
                                              std::vector<std::int64_t>{4, 5}));

    const auto pool = CandidatePool::from_buckets({1, 0, 1, 1});
    for (std::size_t s = 0; s < pool.num_buckets(); ++s)
        for (std::size_t j = 0; j < pool.size(); ++j) {
            const auto mem = pool.members(s);
            const bool in = std::find(mem.begin(), mem.end(), j) != mem.end();
            CHECK(in == (pool.bucket_of(j) == s));
        }
}

TEST_CASE("bucket sizes") {
    CHECK(bucket_sizes(CandidatePool::from_buckets({0, 0, 1})) == std::vector<std::size_t>{2, 1});
    CHECK(bucket_sizes(CandidatePool::from_buckets({0, 1, 2})) == std::vector<std::size_t>{1, 1, 1});
    CHECK(bucket_sizes(CandidatePool::from_buckets({1, 1, 1, 0})) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("query set invariants") {
    CHECK(code_of([] { QuerySet::from_arrays({0, 0}, {0, 2}); }) == ErrorCode::empty_group);
    CHECK(code_of([] {
              QuerySet::from_arrays({0, 0}, {0, 1}, std::vector<Index>{0, 0}, std::vector<std::int64_t>{1, 1});
          }) == ErrorCode::invalid_order);
    CHECK_NOTHROW(QuerySet::from_arrays({0, 0}, {0, 1}, std::vector<Index>{0, 1}, std::vector<std::int64_t>{1, 1}));
}

TEST_CASE("regrouping renumbers densely and keeps order") {
    const auto q = QuerySet::from_arrays({0, 0, 0, 0}, {0, 1, 2, 3});
    const std::vector<Index> g{3, 3, 1, 1};
    const auto r = q.with_groups(g);
    CHECK(r.num_groups() == 2);
    CHECK(std::vector<Index>(r.group_of().begin(), r.group_of().end()) == std::vector<Index>{1, 1, 0, 0});
    CHECK(q.with_groups(q.group_of()) == q);
    const auto s = q.singleton_groups();
    CHECK(s.num_groups() == 4);
}

TEST_CASE("replacing logits re-validates") {
    const auto b = fixtures::worked_instance();
    LogitMatrix bad(2, 4, 0.0f);
    bad(1, 1) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(b.with_logits(bad), AuditError);
    CHECK_THROWS_AS(b.with_queries(QuerySet::from_arrays({0}, {0})), AuditError);
}
