#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "gcbaudit/gcb.hpp"
#include "gcbaudit/scoring.hpp"
#include "gcbaudit/synth.hpp"
#include "naive_gcb.hpp"

using namespace gcbaudit;

namespace {

GcbConfig worked_config() {
    GcbConfig c;
    c.top_k = 4;
    c.gate_quantile = 0.5;
    c.evidence_m = 1;
    c.selected_buckets = 1;
    c.gamma = 1.0;
    c.normalizer = Normalizer::none;
    return c;
}

std::vector<double> row_of(const ScoreMatrix& m, std::size_t r) { return {m.row(r).begin(), m.row(r).end()}; }

}  // namespace

TEST_CASE("local evidence") {
    const std::vector<float> row{3, 1, 2, 0};
    auto cfg = worked_config();
    auto ev = extract_evidence(row, cfg);
    CHECK(ev.threshold == 1.5);
    CHECK(ev.topk == std::vector<Index>{0, 2, 1, 3});
    CHECK(ev.retained == std::vector<Index>{0, 2});
    CHECK(ev.excess == std::vector<double>{1.5, 0.5});

    cfg.gate_enabled = false;
    ev = extract_evidence(row, cfg);
    CHECK(ev.retained.size() == 4);
    std::map<Index, double> by_index;
    for (std::size_t i = 0; i < ev.retained.size(); ++i) by_index[ev.retained[i]] = ev.excess[i];
    CHECK(by_index == std::map<Index, double>{{0, 1.5}, {1, -0.5}, {2, 0.5}, {3, -1.5}});

    cfg.subtract_threshold = false;
    ev = extract_evidence(row, cfg);
    CHECK(ev.excess.front() == 3.0);

    const std::vector<float> flat{2, 2, 2, 2, 2};
    cfg = worked_config();
    cfg.gate_quantile = 0.9;
    ev = extract_evidence(flat, cfg);
    CHECK(ev.threshold == 2.0);
    for (double e : ev.excess) CHECK(e == 0.0);

    cfg.top_k = 2;
    CHECK(extract_evidence(row, cfg).topk.size() == 2);
}

TEST_CASE("pooled bucket support on the worked instance") {
    const auto b = fixtures::worked_instance();
    const auto sup = compute_support(b, worked_config());
    REQUIRE(sup.groups.size() == 1);
    CHECK(sup.groups[0].support[0] == doctest::Approx(1.75));
    CHECK(sup.groups[0].support[1] == doctest::Approx(0.5));
    CHECK(sup.groups[0].selected == std::vector<Index>{0});
}

TEST_CASE("bucket_count normaliser") {
    const auto b = fixtures::make_bundle({{2, 2, 2, 2}}, {0, 0, 0, 0}, {0}, {0});
    auto cfg = worked_config();
    cfg.normalizer = Normalizer::bucket_count;
    cfg.gate_enabled = false;
    cfg.subtract_threshold = false;
    const auto sup = compute_support(b, cfg);
    CHECK(sup.groups[0].support[0] == doctest::Approx(0.5));
}

TEST_CASE("no retained evidence leaves the logits alone") {
    const auto b = fixtures::make_bundle({{1, 1, 1, 1}}, {0, 0, 1, 1}, {0}, {0});
    const auto sup = compute_support(b, worked_config());
    CHECK(sup.groups[0].selected.empty());
    CHECK(sup.groups[0].support == std::vector<double>{0.0, 0.0});
    CHECK(apply_gcb(b, worked_config()) == ScoreMatrix::converted_from(b.logits()));
}

TEST_CASE("worked instance bias, pruning and bucket hits") {
    const auto b = fixtures::worked_instance();
    const auto out = apply_gcb(b, worked_config());
    CHECK(row_of(out, 0) == std::vector<double>{4.75, 2.75, 2, 0});
    CHECK(row_of(out, 1) == std::vector<double>{4.25, 2.25, 1, 0});

    const auto pruned = apply_hard_pruning(b, worked_config());
    CHECK(row_of(pruned, 0) == std::vector<double>{3, 1, kPrunedScore, kPrunedScore});
    CHECK(bucket_hit_mask(b, worked_config()) == std::vector<bool>{true, true});

    auto cfg = worked_config();
    cfg.gamma = 0.0;
    CHECK(apply_gcb(b, cfg) == ScoreMatrix::converted_from(b.logits()));
}

TEST_CASE("single-window grouping") {
    const auto b = fixtures::worked_instance();
    const auto cfg = worked_config();
    const auto single = apply_gcb_single(b, cfg);
    // Row 0 alone: tau=1.5, bucket 0 support 1.5; row 1 alone: tau=0.75, support 1.75.
    CHECK(row_of(single, 0) == std::vector<double>{4.5, 2.5, 2, 0});
    CHECK(row_of(single, 1) == std::vector<double>{4.25, 2.25, 1, 0});
    CHECK(single == apply_gcb(b.with_queries(b.queries().singleton_groups()), cfg));

    const auto one = fixtures::make_bundle({{3, 1, 2, 0}}, {0, 0, 1, 1}, {0}, {0});
    CHECK(apply_gcb_single(one, cfg) == apply_gcb(one, cfg));
}

TEST_CASE("pruning with every bucket selected keeps all values") {
    const auto b = fixtures::make_bundle({{3, 1, 2, 0}}, {0, 0, 1, 1}, {0}, {0});
    auto cfg = worked_config();
    cfg.selected_buckets = 2;
    cfg.gate_quantile = 0.1;
    CHECK(apply_hard_pruning(b, cfg) == ScoreMatrix::converted_from(b.logits()));
    CHECK(bucket_hit_mask(b, cfg) == std::vector<bool>{true});
}

TEST_CASE("configuration validation") {
    GcbConfig c;
    CHECK_NOTHROW(validate(c));
    c.gate_quantile = 1.0;
    CHECK_THROWS_AS(validate(c), AuditError);
    c = {};
    c.top_k = 0;
    CHECK_THROWS_AS(validate(c), AuditError);
    c = {};
    c.gamma = -0.1;
    CHECK_THROWS_AS(validate(c), AuditError);
    c = {};
    c.evidence_m = 0;
    CHECK_THROWS_AS(validate(c), AuditError);
    CHECK(parse_normalizer("kept_count") == Normalizer::kept_count);
    CHECK(parse_aggregator("lse") == Aggregator::lse_top_m);
    CHECK_THROWS_AS(parse_normalizer("sqrt"), AuditError);
}

TEST_CASE("matches the naive transcription on random small bundles") {
    std::mt19937_64 gen(2024);
    const char* norms[] = {"none", "bucket_sqrt", "bucket_count", "kept_count"};
    const Normalizer norm_enum[] = {Normalizer::none, Normalizer::bucket_sqrt, Normalizer::bucket_count,
                                    Normalizer::kept_count};
    for (int it = 0; it < 200; ++it) {
        const auto b = fixtures::random_bundle(gen);
        const int ni = it % 4;
        const bool lse = (it / 4) % 2;
        const bool gate = (it / 8) % 2;
        GcbConfig cfg;
        cfg.top_k = 1 + gen() % b.num_candidates();
        cfg.gate_quantile = 0.05 + 0.9 * std::uniform_real_distribution<double>()(gen);
        cfg.evidence_m = 1 + gen() % 4;
        cfg.selected_buckets = 1 + gen() % 4;
        cfg.gamma = 2.0 * std::uniform_real_distribution<double>()(gen);
        cfg.normalizer = norm_enum[ni];
        cfg.aggregator = lse ? Aggregator::lse_top_m : Aggregator::mean_top_m;
        cfg.gate_enabled = gate;

        naive::Config nc{cfg.top_k, cfg.gate_quantile, cfg.evidence_m, cfg.selected_buckets, cfg.gamma,
                         norms[ni], lse ? "lse_top_m" : "mean_top_m", gate};
        naive::Rows L;
        for (std::size_t w = 0; w < b.num_queries(); ++w) L.emplace_back(b.logits().row(w).begin(), b.logits().row(w).end());
        const std::vector<int> buckets(b.candidates().bucket_of().begin(), b.candidates().bucket_of().end());
        const std::vector<int> groups(b.queries().group_of().begin(), b.queries().group_of().end());
        const auto expect = naive::apply(L, buckets, groups, nc);
        const auto got = apply_gcb(b, cfg);
        for (std::size_t w = 0; w < b.num_queries(); ++w)
            for (std::size_t j = 0; j < b.num_candidates(); ++j) REQUIRE(std::abs(got(w, j) - expect[w][j]) < 1e-5);
    }
}

TEST_CASE("bias is bucket-constant and linear in gamma") {
    auto cfg = SynthConfig{};
    cfg.num_queries = 200;
    cfg.num_candidates = 120;
    cfg.num_buckets = 12;
    const auto b = generate(cfg);
    GcbConfig g;
    const auto sup = compute_support(b, g);
    const auto base = ScoreMatrix::converted_from(b.logits());
    const auto one = apply_bias(b, sup, 0.5);
    const auto two = apply_bias(b, sup, 1.0);
    for (std::size_t w = 0; w < b.num_queries(); ++w)
        for (std::size_t j = 0; j < b.num_candidates(); ++j) {
            const double d1 = one(w, j) - base(w, j);
            const double d2 = two(w, j) - base(w, j);
            REQUIRE(d2 == doctest::Approx(2.0 * d1).epsilon(1e-12));
        }
    const auto before = b.logits();
    (void)apply_gcb(b, g);
    (void)apply_hard_pruning(b, g);
    CHECK(std::memcmp(before.values().data(), b.logits().values().data(), before.values().size() * sizeof(float)) == 0);
}
