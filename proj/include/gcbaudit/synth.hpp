#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcbaudit/core.hpp"

namespace gcbaudit {

/// Planted-signal score model:
///   logit(w, j) = a * [j == target(w)] + b * [bucket(j) == bucket(target(w))] + noise
/// with i.i.d. Gaussian noise. Every query group shares one target bucket.
struct SynthConfig {
    std::size_t num_queries = 2000;
    std::size_t num_candidates = 500;
    std::size_t num_buckets = 50;
    std::size_t group_size = 10;
    std::size_t num_stories = 20;
    double target_strength = 2.0;
    double bucket_affinity = 1.0;
    double noise_sigma = 1.0;
    std::uint64_t seed = 7;

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

void validate(const SynthConfig& cfg);

/// Candidates are split into contiguous buckets whose sizes differ by at
/// most one. Queries form consecutive groups of `group_size` (the last may
/// be shorter); groups are dealt contiguously into stories and ordered in
/// time within each story. Each group draws a bucket, and its queries take
/// distinct targets from that bucket, cycling when the group is larger.
AuditBundle generate(const SynthConfig& cfg);

/// One bundle per target strength. Structure and noise come from the same
/// seed for every strength, so bundles differ only in the planted signal
/// and equal strengths give identical bundles.
std::vector<AuditBundle> generate_sweep(const SynthConfig& cfg, std::span<const double> strengths);

}  // namespace gcbaudit
