#include "gcbaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcbaudit/parallel.hpp"
#include "gcbaudit/rng.hpp"

namespace gcbaudit {

void validate(const SynthConfig& cfg) {
    auto fail = [](const std::string& msg) { throw AuditError(ErrorCode::invalid_argument, msg); };
    if (cfg.num_queries < 1) fail("num_queries must be >= 1");
    if (cfg.num_candidates < 2) fail("num_candidates must be >= 2");
    if (cfg.num_buckets < 1) fail("num_buckets must be >= 1");
    if (cfg.num_buckets > cfg.num_candidates) fail("num_buckets exceeds num_candidates");
    if (cfg.group_size < 1) fail("group_size must be >= 1");
    if (cfg.num_stories < 1) fail("num_stories must be >= 1");
    if (!(cfg.target_strength >= 0.0) || !(cfg.bucket_affinity >= 0.0)) fail("signal strengths must be >= 0");
    if (!(cfg.noise_sigma > 0.0)) fail("noise_sigma must be > 0");
}

AuditBundle generate(const SynthConfig& cfg) {
    validate(cfg);
    const std::size_t b = cfg.num_queries;
    const std::size_t n = cfg.num_candidates;
    const std::size_t m = cfg.num_buckets;

    std::vector<Index> bucket_of(n);
    std::vector<std::string> cand_key(n);
    std::vector<std::int64_t> window_index(n);
    for (std::size_t j = 0; j < n; ++j) {
        bucket_of[j] = static_cast<Index>(j * m / n);
        cand_key[j] = "synth-sentence-" + std::to_string(bucket_of[j]);
        window_index[j] = static_cast<std::int64_t>(j);
    }
    auto candidates = CandidatePool::from_buckets(bucket_of, m, cand_key, window_index);

    const std::size_t num_groups = (b + cfg.group_size - 1) / cfg.group_size;
    const std::size_t stories = std::min(cfg.num_stories, num_groups);
    Rng structure(derive_seed(cfg.seed, streams::synth_structure));

    std::vector<Index> target_of(b), group_of(b), story_of(b);
    std::vector<std::int64_t> order_of(b);
    std::vector<std::string> query_key(b);
    std::vector<std::int64_t> next_order(stories, 0);
    for (std::size_t g = 0; g < num_groups; ++g) {
        const auto bucket = static_cast<Index>(structure.below(m));
        const auto members = candidates.members(bucket);
        std::vector<Index> pick(members.begin(), members.end());
        structure.shuffle(pick.begin(), pick.end());
        const auto story = static_cast<Index>(g * stories / num_groups);
        const std::size_t begin = g * cfg.group_size;
        const std::size_t end = std::min(b, begin + cfg.group_size);
        for (std::size_t w = begin; w < end; ++w) {
            target_of[w] = pick[(w - begin) % pick.size()];
            group_of[w] = static_cast<Index>(g);
            story_of[w] = story;
            order_of[w] = next_order[story]++;
            query_key[w] = cand_key[target_of[w]] + "/" + std::to_string(target_of[w]);
        }
    }
    auto queries = QuerySet::from_arrays(target_of, group_of, story_of, order_of, query_key);

    LogitMatrix logits(b, n);
    parallel_for(b, [&](std::size_t w) {
        Rng noise(derive_seed(cfg.seed, streams::synth_noise, w));
        const Index target = target_of[w];
        const Index target_bucket = bucket_of[target];
        auto row = logits.row(w);
        for (std::size_t j = 0; j < n; ++j) {
            double v = cfg.noise_sigma * noise.normal();
            if (j == target) v += cfg.target_strength;
            if (bucket_of[j] == target_bucket) v += cfg.bucket_affinity;
            row[j] = static_cast<float>(v);
        }
    });
    return validate_bundle(std::move(logits), std::move(candidates), std::move(queries));
}

std::vector<AuditBundle> generate_sweep(const SynthConfig& cfg, std::span<const double> strengths) {
    std::vector<AuditBundle> out;
    out.reserve(strengths.size());
    for (double a : strengths) {
        SynthConfig c = cfg;
        c.target_strength = a;
        out.push_back(generate(c));
    }
    return out;
}

}  // namespace gcbaudit
