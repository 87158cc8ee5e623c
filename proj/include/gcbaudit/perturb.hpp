#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcbaudit/core.hpp"
#include "gcbaudit/gcb.hpp"

namespace gcbaudit {

enum class PerturbKind {
    neighbour_once,       // boundary windows jump once to the adjacent group
    random_within_story,  // any window jumps to another group of its story
};

std::string_view to_string(PerturbKind k);
PerturbKind parse_perturb_kind(std::string_view text);

struct PerturbConfig {
    PerturbKind kind = PerturbKind::random_within_story;
    double p = 0.0;
    std::uint64_t seed = 0;
};

struct PerturbResult {
    QuerySet queries;
    std::size_t moved = 0;
    std::size_t skipped_single_group_stories = 0;  // random_within_story only
};

/// Reassigns query windows between sentence groups; targets are untouched.
///
/// neighbour_once: within each story, groups are ordered by their earliest
/// window. The earliest window of a group moves to the previous group and
/// the latest window moves to the next group, each with probability p.
/// Decisions are taken on the original grouping, so moves never cascade.
/// Story-initial and story-final boundaries have only one neighbour.
///
/// random_within_story: each window moves with probability p to a group
/// drawn uniformly from the other groups of its story.
///
/// Groups emptied by the moves disappear and ids are re-densified.
PerturbResult perturb_groups(const QuerySet& queries, const PerturbConfig& cfg);

struct AttenuationConfig {
    double alpha = 1.0;
    std::uint64_t seed = 0;
};

struct RowMoments {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

RowMoments row_moments(std::span<const float> row);

/// mu + sigma * (sqrt(alpha) * Z + sqrt(1 - alpha) * Z_perm), where Z is the
/// standardised row and Z_perm the standardised row re-indexed by
/// `permutation` (out[j] uses row[permutation[j]]). Constant rows pass
/// through unchanged.
std::vector<float> attenuate_row(std::span<const float> row, double alpha, std::span<const Index> permutation);

/// Applies attenuate_row with an independent uniform permutation per row,
/// seeded by (seed, row index). alpha = 1 returns the input unchanged.
LogitMatrix attenuate_logits(const LogitMatrix& logits, const AttenuationConfig& cfg);

struct AttenuationPoint {
    double alpha = 0.0;
    double base_r1 = 0.0;
    double gcb_r1 = 0.0;
    double delta_r1 = 0.0;
    double base_mrr = 0.0;
    double gcb_mrr = 0.0;
    double delta_mrr = 0.0;
};

/// Attenuates the logits at each alpha and reruns base and GCB retrieval
/// with the grouping and configuration held fixed.
std::vector<AttenuationPoint> attenuation_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                                std::span<const double> alphas, std::uint64_t seed);

}  // namespace gcbaudit
