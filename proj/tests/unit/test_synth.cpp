#include <doctest.h>

#include <cmath>
#include <set>

#include "gcbaudit/gcb.hpp"
#include "gcbaudit/stats.hpp"
#include "gcbaudit/synth.hpp"

using namespace gcbaudit;

TEST_CASE("generator structure") {
    SynthConfig c;
    c.num_queries = 95;
    const auto b = generate(c);
    CHECK(b.num_queries() == 95);
    CHECK(b.num_candidates() == 500);
    CHECK(b.candidates().num_buckets() == 50);
    CHECK(b.queries().num_groups() == 10);
    for (std::size_t g = 0; g < b.queries().num_groups(); ++g) {
        const auto members = b.queries().group_members(g);
        const Index bucket = b.candidates().bucket_of(b.queries().target_of(members[0]));
        std::set<Index> targets;
        for (Index w : members) {
            CHECK(b.candidates().bucket_of(b.queries().target_of(w)) == bucket);
            targets.insert(b.queries().target_of(w));
        }
        CHECK(targets.size() == std::min<std::size_t>(members.size(), b.candidates().bucket_size(bucket)));
    }
    CHECK(generate(c) == b);
    c.seed = 8;
    CHECK_FALSE(generate(c) == b);
}

TEST_CASE("config validation") {
    SynthConfig c;
    c.num_candidates = 1;
    CHECK_THROWS_AS(generate(c), AuditError);
    c = {};
    c.num_buckets = 600;
    CHECK_THROWS_AS(generate(c), AuditError);
    c = {};
    c.noise_sigma = 0;
    CHECK_THROWS_AS(generate(c), AuditError);
}

TEST_CASE("sweeps share structure and noise") {
    SynthConfig c;
    c.num_queries = 100;
    const auto one = generate_sweep(c, std::vector<double>{0.0});
    REQUIRE(one.size() == 1);
    const auto twin = generate_sweep(c, std::vector<double>{2.0, 2.0});
    CHECK(twin[0] == twin[1]);
    const auto pair = generate_sweep(c, std::vector<double>{0.0, 2.0});
    CHECK(pair[0].queries() == pair[1].queries());
    CHECK(pair[0].candidates() == pair[1].candidates());
}

TEST_CASE("signal strength raises base R@1") {
    const std::vector<double> strengths{0, 1, 2, 4};
    std::vector<double> mean(strengths.size(), 0.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthConfig c;
        c.num_queries = 400;
        c.seed = seed;
        const auto bundles = generate_sweep(c, strengths);
        for (std::size_t i = 0; i < bundles.size(); ++i) mean[i] += compute_metrics(compute_ranks(bundles[i])).recall(1);
    }
    for (std::size_t i = 1; i < mean.size(); ++i) CHECK(mean[i] >= mean[i - 1]);
}

TEST_CASE("chance calibration without signal") {
    const std::size_t n = 100;
    double total = 0.0;
    const std::size_t seeds = 20, b = 1000;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        SynthConfig c;
        c.num_queries = b;
        c.num_candidates = n;
        c.num_buckets = 10;
        c.target_strength = 0;
        c.bucket_affinity = 0;
        c.seed = seed;
        total += compute_metrics(compute_ranks(generate(c))).recall(1);
    }
    const double p = 1.0 / n;
    const double se = std::sqrt(p * (1 - p) / (seeds * b));
    CHECK(std::abs(total / seeds - p) < 3 * se);
}
