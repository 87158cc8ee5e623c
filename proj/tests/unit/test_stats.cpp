#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gcbaudit/parallel.hpp"
#include "gcbaudit/stats.hpp"

using namespace gcbaudit;

TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3}, up{10, 20, 30}, down{30, 20, 10};
    CHECK(*spearman(x, up) == doctest::Approx(1.0));
    CHECK(*spearman(x, down) == doctest::Approx(-1.0));
    const std::vector<double> a{1, 2, 3, 4}, b{2, 1, 4, 3};
    CHECK(*spearman(a, b) == doctest::Approx(0.6));
    const std::vector<double> flat{1, 1, 1};
    CHECK_FALSE(spearman(x, flat).has_value());

    // Invariant under strictly monotone transforms; ties use mid-ranks.
    const std::vector<double> c{0.1, 5, 5, 2, 9}, d{3, 1, 4, 1, 5};
    std::vector<double> c3;
    for (double v : c) c3.push_back(std::exp(v));
    CHECK(*spearman(c, d) == *spearman(c3, d));
    CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), AuditError);
}

TEST_CASE("spearman test p-value") {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(i);
        y.push_back(i % 7);
    }
    const auto r = spearman_test(x, y);
    REQUIRE(r.rho.has_value());
    CHECK(r.n == 50);
    CHECK(*r.p_value > 0.0);
    CHECK(*r.p_value <= 1.0);
    const auto perfect = spearman_test(x, x);
    CHECK(*perfect.p_value < 1e-10);
}

TEST_CASE("bucket-size inflation correlation") {
    // Queries 0-2 target a size-1 bucket, 3-5 a size-3 bucket; gains only in the large one.
    const auto b = fixtures::make_bundle({{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}},
                                         {0, 1, 1, 1}, {0, 0, 0, 1, 2, 3}, {0, 0, 0, 1, 1, 1});
    const RankVector before{{2, 2, 2, 2, 2, 2}};
    const auto none = bucket_size_inflation_correlation(b, before, before);
    CHECK_FALSE(none.rho.has_value());
    const auto pos = bucket_size_inflation_correlation(b, before, RankVector{{2, 2, 2, 1, 1, 2}});
    CHECK(*pos.rho > 0.0);
    const auto bal = bucket_size_inflation_correlation(b, before, RankVector{{1, 2, 2, 1, 2, 2}});
    CHECK(*bal.rho == doctest::Approx(0.0));
}

TEST_CASE("paired cluster bootstrap") {
    const std::vector<Index> clusters{0, 0, 1, 1, 2, 2};
    SUBCASE("identical inputs") {
        const RankVector r{{1, 2, 3, 1, 5, 1}};
        for (auto metric : {BootstrapMetric::recall(1), BootstrapMetric::reciprocal_rank()}) {
            const auto res = paired_cluster_bootstrap(r, r, clusters, metric, {2000, 0.95, 4});
            CHECK(res.point_delta == 0.0);
            CHECK(res.ci_low == 0.0);
            CHECK(res.ci_high == 0.0);
            CHECK(res.p_value == 1.0);
        }
    }
    SUBCASE("uniform improvement") {
        const RankVector before{{2, 2, 2, 2, 2, 2}}, after{{1, 1, 1, 1, 1, 1}};
        const auto res = paired_cluster_bootstrap(before, after, clusters, BootstrapMetric::recall(1), {1000, 0.95, 4});
        CHECK(res.point_delta == 1.0);
        CHECK(res.ci_low == 1.0);
        CHECK(res.ci_high == 1.0);
        CHECK(res.p_value == doctest::Approx(1.0 / 1000));
    }
    SUBCASE("single cluster") {
        const RankVector before{{2, 1}}, after{{1, 1}};
        const std::vector<Index> one{0, 0};
        const auto res = paired_cluster_bootstrap(before, after, one, BootstrapMetric::recall(1), {500, 0.9, 1});
        CHECK(res.ci_low == res.point_delta);
        CHECK(res.ci_high == res.point_delta);
    }
    SUBCASE("seeded and thread-count independent") {
        const RankVector before{{2, 1, 3, 1, 1, 4}}, after{{1, 1, 1, 2, 1, 1}};
        const BootstrapConfig cfg{3000, 0.95, 77};
        set_thread_count(1);
        const auto a = paired_cluster_bootstrap(before, after, clusters, BootstrapMetric::reciprocal_rank(), cfg);
        set_thread_count(4);
        const auto c = paired_cluster_bootstrap(before, after, clusters, BootstrapMetric::reciprocal_rank(), cfg);
        set_thread_count(1);
        CHECK(a.ci_low == c.ci_low);
        CHECK(a.ci_high == c.ci_high);
        CHECK(a.p_value == c.p_value);
        CHECK(a.ci_low <= a.point_delta);
        CHECK(a.point_delta <= a.ci_high);
    }
    SUBCASE("bad input") {
        const RankVector r{{1, 1}};
        CHECK_THROWS_AS(paired_cluster_bootstrap(r, r, clusters, BootstrapMetric::recall(1), {}), AuditError);
        CHECK_THROWS_AS(paired_cluster_bootstrap(r, r, std::vector<Index>{0, 0}, BootstrapMetric::recall(1), {0, 0.95, 1}),
                        AuditError);
    }
}
