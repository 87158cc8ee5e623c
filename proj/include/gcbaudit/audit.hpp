#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gcbaudit/core.hpp"
#include "gcbaudit/gcb.hpp"
#include "gcbaudit/oracle.hpp"
#include "gcbaudit/perturb.hpp"
#include "gcbaudit/scoring.hpp"
#include "gcbaudit/stats.hpp"

namespace gcbaudit {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct AuditOptions {
    std::vector<std::size_t> ks = kDefaultKs;
    std::vector<RankInterval> intervals = kDefaultRankIntervals;
    std::optional<BootstrapConfig> bootstrap;
    std::vector<std::size_t> length_bin_edges;  // empty: no length table
};

struct AuditReport {
    GcbConfig config;
    AuditOptions options;
    std::size_t num_queries = 0;
    std::size_t num_candidates = 0;
    std::size_t num_buckets = 0;
    std::size_t num_groups = 0;

    RankVector base_ranks;
    RankVector gcb_ranks;
    MetricsReport base;
    MetricsReport gcb;
    MetricsReport gcb_single;
    MetricsReport no_gate;
    MetricsReport hard_prune;
    FlipCounts flips;
    std::vector<RankIntervalCorrection> rank_buckets;
    OracleReport oracle;
    HeadroomDecomposition headroom;
    CorrelationResult bucket_size_correlation;
    std::vector<LengthBin> length_bins;
    std::optional<BootstrapResult> bootstrap_r1;
    std::optional<BootstrapResult> bootstrap_mrr;
};

/// Base vs GCB audit with ablations, flip and rank-bucket diagnostics, the
/// oracle report and the headroom decomposition.
AuditReport run_audit(const AuditBundle& bundle, const GcbConfig& cfg, const AuditOptions& options = {});

struct GammaSweepRow {
    double gamma = 0.0;
    double delta_r1 = 0.0;
    std::size_t bad_to_good = 0;
    std::size_t good_to_bad = 0;
    std::optional<double> b2g_per_g2b;
    double g2b_over_base_hit = 0.0;  // fraction of baseline hits demoted
    double top1_changed = 0.0;       // fraction of queries whose argmax candidate changes
};

/// Index of the largest score in each row; ties go to the smaller index.
template <typename T>
std::vector<Index> argmax_rows(const Matrix<T>& m) {
    std::vector<Index> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        Index best = 0;
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] > row[best]) best = static_cast<Index>(j);
        }
        out[r] = best;
    }
    return out;
}

/// Only gamma varies; bucket support is computed once.
std::vector<GammaSweepRow> run_gamma_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                           std::span<const double> gammas);

struct PoolSweepRow {
    std::size_t pool_size = 0;
    std::size_t num_buckets = 0;
    MetricsReport base;
    MetricsReport gcb;
    double delta_r1 = 0.0;
    double delta_mrr = 0.0;
};

/// Restricts the candidate pool to a uniform subsample that always keeps
/// every target, rebuilds the buckets and reruns base and GCB retrieval.
AuditBundle subsample_pool(const AuditBundle& bundle, std::size_t pool_size, std::uint64_t seed);

std::vector<PoolSweepRow> run_pool_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                         std::span<const std::size_t> pool_sizes, std::uint64_t seed,
                                         std::span<const std::size_t> ks = kDefaultKs);

struct OpCountDims {
    std::uint64_t queries = 0;     // Q
    std::uint64_t candidates = 0;  // N
    std::uint64_t dim = 0;         // D
    std::uint64_t steps = 0;       // T
};

struct GcbCounters {
    std::uint64_t retained_total = 0;
    double retained_per_query = 0.0;
    std::uint64_t unique_buckets_total = 0;
    double unique_buckets_per_query = 0.0;
    std::uint64_t fuse_adds_total = 0;
    std::uint64_t fuse_adds_per_query = 0;
    std::uint64_t bucket_writes_total = 0;
    double bucket_writes_per_query = 0.0;
};

struct OpCountReport {
    OpCountDims dims;
    std::uint64_t per_query_macs = 0;
    std::uint64_t total_macs = 0;
    std::optional<GcbCounters> gcb;
};

/// Exact integer similarity MAC counts; throws on 64-bit overflow.
OpCountReport opcount(const OpCountDims& dims, const GcbSupport* support = nullptr);

/// Three significant figures, e.g. 539688960 -> "5.40e+08".
std::string scientific3(double value);
/// Same rounding written as "5.40x10^8".
std::string scientific3_pretty(double value);

// JSON views. Field order is fixed, so dumps are byte-stable.
Json to_json(const GcbConfig& cfg);
GcbConfig gcb_config_from_json(const Json& j, GcbConfig base = {});
Json to_json(const MetricsReport& m);
Json to_json(const FlipCounts& f);
Json to_json(const BootstrapResult& b);
Json to_json(const CorrelationResult& c);
Json to_json(const HeadroomDecomposition& h);
Json to_json(const OracleReport& o);
Json to_json(const AuditReport& r);
Json to_json(const OpCountReport& r);

/// Table-shaped reports carry their rows under "rows" (flat objects).
Json gamma_sweep_report(const GcbConfig& cfg, std::span<const GammaSweepRow> rows);
Json pool_sweep_report(const GcbConfig& cfg, std::uint64_t seed, std::span<const PoolSweepRow> rows);
Json attenuation_report(const GcbConfig& cfg, std::uint64_t seed, std::span<const AttenuationPoint> rows);

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(std::string_view text);

/// JSON: two-space indented dump plus newline. CSV: header row plus one line
/// per entry of "rows"; reports without rows cannot be written as CSV.
std::string render_report(const Json& report, ReportFormat format);
void emit_report(const Json& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace gcbaudit
