#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "gcbaudit/perturb.hpp"
#include "gcbaudit/scoring.hpp"
#include "gcbaudit/synth.hpp"

using namespace gcbaudit;

namespace {

// One story, two groups of three windows in temporal order.
QuerySet two_groups() {
    return QuerySet::from_arrays({0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 1, 1}, std::vector<Index>(6, 0),
                                 std::vector<std::int64_t>{0, 1, 2, 3, 4, 5});
}

std::vector<Index> groups_of(const QuerySet& q) { return {q.group_of().begin(), q.group_of().end()}; }

}  // namespace

TEST_CASE("p = 0 is the identity") {
    const auto q = two_groups();
    for (auto kind : {PerturbKind::neighbour_once, PerturbKind::random_within_story}) {
        const auto r = perturb_groups(q, {kind, 0.0, 9});
        CHECK(r.queries == q);
        CHECK(r.moved == 0);
    }
}

TEST_CASE("neighbour_once moves only boundary windows") {
    const auto r = perturb_groups(two_groups(), {PerturbKind::neighbour_once, 1.0, 1});
    // The last window of group 0 moves forward, the first of group 1 backward.
    CHECK(r.moved == 2);
    CHECK(groups_of(r.queries) == std::vector<Index>{0, 0, 1, 0, 1, 1});
}

TEST_CASE("neighbour_once on a three-group story") {
    const auto q = QuerySet::from_arrays(std::vector<Index>(9, 0), {0, 0, 0, 1, 1, 1, 2, 2, 2}, std::vector<Index>(9, 0),
                                         std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    const auto r = perturb_groups(q, {PerturbKind::neighbour_once, 1.0, 1});
    CHECK(r.moved == 4);
    CHECK(groups_of(r.queries) == std::vector<Index>{0, 0, 1, 0, 1, 2, 1, 2, 2});
}

TEST_CASE("random_within_story") {
    SUBCASE("single-group story is skipped and counted") {
        const auto q = QuerySet::from_arrays({0, 0}, {0, 0}, std::vector<Index>{0, 0});
        const auto r = perturb_groups(q, {PerturbKind::random_within_story, 1.0, 3});
        CHECK(r.queries == q);
        CHECK(r.skipped_single_group_stories == 1);
    }
    SUBCASE("p = 1 moves every window to another group of its story") {
        const auto q = QuerySet::from_arrays(std::vector<Index>(8, 0), {0, 0, 1, 1, 2, 2, 3, 3},
                                             std::vector<Index>{0, 0, 0, 0, 1, 1, 1, 1});
        const auto r = perturb_groups(q, {PerturbKind::random_within_story, 1.0, 3});
        CHECK(r.moved == 8);
        CHECK(r.queries.target_of().size() == 8);
    }
    SUBCASE("metadata and probability checks") {
        const auto bare = QuerySet::from_arrays({0, 0}, {0, 1});
        CHECK_THROWS_AS(perturb_groups(bare, {PerturbKind::random_within_story, 0.5, 1}), AuditError);
        CHECK_THROWS_AS(perturb_groups(bare, {PerturbKind::neighbour_once, 0.5, 1}), AuditError);
        CHECK_THROWS_AS(perturb_groups(two_groups(), {PerturbKind::neighbour_once, 1.5, 1}), AuditError);
    }
}

TEST_CASE("perturbation is deterministic and leaves targets alone") {
    SynthConfig sc;
    sc.num_queries = 300;
    const auto b = generate(sc);
    for (auto kind : {PerturbKind::neighbour_once, PerturbKind::random_within_story}) {
        const auto a = perturb_groups(b.queries(), {kind, 0.5, 42});
        const auto c = perturb_groups(b.queries(), {kind, 0.5, 42});
        CHECK(a.queries == c.queries);
        CHECK(std::equal(a.queries.target_of().begin(), a.queries.target_of().end(), b.queries().target_of().begin()));
        CHECK(compute_ranks(b.with_queries(a.queries)) == compute_ranks(b));
    }
}

TEST_CASE("attenuation of one row") {
    const std::vector<float> row{0, 1, 2, 3};
    const std::vector<Index> rev{3, 2, 1, 0};
    // Z and its reversal cancel exactly, leaving the mean.
    for (float v : attenuate_row(row, 0.5, rev)) CHECK(v == doctest::Approx(1.5));

    // Hand transcription with a different permutation.
    const std::vector<Index> perm{1, 0, 3, 2};
    const double mu = 1.5, sd = std::sqrt(1.25);
    const auto out = attenuate_row(row, 0.25, perm);
    for (std::size_t j = 0; j < 4; ++j) {
        const double z = (row[j] - mu) / sd, zp = (row[perm[j]] - mu) / sd;
        CHECK(out[j] == doctest::Approx(mu + sd * (0.5 * z + std::sqrt(0.75) * zp)));
    }
    const std::vector<float> flat{2, 2, 2};
    CHECK(attenuate_row(flat, 0.3, std::vector<Index>{2, 0, 1}) == flat);
}

TEST_CASE("attenuate_logits") {
    SynthConfig sc;
    sc.num_queries = 50;
    const auto b = generate(sc);
    CHECK(attenuate_logits(b.logits(), {1.0, 5}) == b.logits());

    const auto zero = attenuate_logits(b.logits(), {0.0, 5});
    for (std::size_t w = 0; w < 50; ++w) {
        std::vector<float> a(b.logits().row(w).begin(), b.logits().row(w).end());
        std::vector<float> c(zero.row(w).begin(), zero.row(w).end());
        std::sort(a.begin(), a.end());
        std::sort(c.begin(), c.end());
        for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(c[j] == doctest::Approx(a[j]).epsilon(1e-5));
    }

    // Mean is preserved per row; the spread only in expectation.
    const auto half = attenuate_logits(b.logits(), {0.5, 5});
    double ratio = 0.0;
    for (std::size_t w = 0; w < 50; ++w) {
        const auto m0 = row_moments(b.logits().row(w));
        const auto m1 = row_moments(half.row(w));
        REQUIRE(m1.mean == doctest::Approx(m0.mean).epsilon(1e-5).scale(1.0));
        ratio += m1.stddev / m0.stddev;
    }
    CHECK(ratio / 50 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(attenuate_logits(b.logits(), {0.5, 5}) == half);
    CHECK_THROWS_AS(attenuate_logits(b.logits(), {1.5, 5}), AuditError);
}

TEST_CASE("attenuation sweep") {
    SynthConfig sc;
    sc.num_queries = 200;
    const auto b = generate(sc);
    CHECK(attenuation_sweep(b, GcbConfig{}, std::vector<double>{}, 1).empty());
    const auto pts = attenuation_sweep(b, GcbConfig{}, std::vector<double>{1.0}, 1);
    REQUIRE(pts.size() == 1);
    const std::size_t one[] = {1};
    CHECK(pts[0].base_r1 == compute_metrics(compute_ranks(b), one).recall(1));
    CHECK(pts[0].gcb_r1 == compute_metrics(compute_ranks(apply_gcb(b, GcbConfig{}), b.queries().target_of()), one).recall(1));
}
