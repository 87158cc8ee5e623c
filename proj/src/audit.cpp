#include "gcbaudit/audit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gcbaudit/rng.hpp"

namespace gcbaudit {

AuditReport run_audit(const AuditBundle& bundle, const GcbConfig& cfg, const AuditOptions& options) {
    validate(cfg);
    const auto targets = bundle.queries().target_of();
    AuditReport rep;
    rep.config = cfg;
    rep.options = options;
    rep.num_queries = bundle.num_queries();
    rep.num_candidates = bundle.num_candidates();
    rep.num_buckets = bundle.candidates().num_buckets();
    rep.num_groups = bundle.queries().num_groups();

    const auto support = compute_support(bundle, cfg, Grouping::sentence);
    rep.base_ranks = compute_ranks(bundle);
    rep.gcb_ranks = compute_ranks(apply_bias(bundle, support, cfg.gamma), targets);
    rep.base = compute_metrics(rep.base_ranks, options.ks);
    rep.gcb = compute_metrics(rep.gcb_ranks, options.ks);

    const auto single = compute_support(bundle, cfg, Grouping::singleton);
    rep.gcb_single = compute_metrics(compute_ranks(apply_bias(bundle, single, cfg.gamma), targets), options.ks);
    GcbConfig gateless = cfg;
    gateless.gate_enabled = false;
    const auto no_gate = compute_support(bundle, gateless, Grouping::sentence);
    rep.no_gate = compute_metrics(compute_ranks(apply_bias(bundle, no_gate, cfg.gamma), targets), options.ks);
    rep.hard_prune = compute_metrics(compute_ranks(apply_pruning(bundle, support), targets), options.ks);

    rep.flips = flip_analysis(rep.base_ranks, rep.gcb_ranks);
    rep.rank_buckets = rank_bucket_correction(rep.base_ranks, rep.gcb_ranks, options.intervals);
    rep.oracle = oracle_within_bucket(bundle, options.ks);
    rep.headroom = decompose_headroom(bundle, support, cfg.gamma, options.intervals);
    if (bundle.num_queries() >= 2) {
        rep.bucket_size_correlation = bucket_size_inflation_correlation(bundle, rep.base_ranks, rep.gcb_ranks);
    } else {
        rep.bucket_size_correlation.n = bundle.num_queries();
    }
    if (!options.length_bin_edges.empty()) {
        rep.length_bins = length_binned_delta(rep.base_ranks, rep.gcb_ranks, bundle.queries(), options.length_bin_edges);
    }
    if (options.bootstrap) {
        const auto clusters = bundle.queries().group_of();
        rep.bootstrap_r1 = paired_cluster_bootstrap(rep.base_ranks, rep.gcb_ranks, clusters,
                                                    BootstrapMetric::recall(1), *options.bootstrap);
        rep.bootstrap_mrr = paired_cluster_bootstrap(rep.base_ranks, rep.gcb_ranks, clusters,
                                                     BootstrapMetric::reciprocal_rank(), *options.bootstrap);
    }
    return rep;
}

std::vector<GammaSweepRow> run_gamma_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                           std::span<const double> gammas) {
    for (double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) throw AuditError(ErrorCode::invalid_argument, "gamma must be finite and >= 0");
    }
    const auto targets = bundle.queries().target_of();
    const auto support = compute_support(bundle, cfg, Grouping::sentence);
    const auto base = compute_ranks(bundle);
    const auto base_top = argmax_rows(bundle.logits());
    const std::size_t base_hits = count_top1(base);
    const double b = static_cast<double>(bundle.num_queries());

    std::vector<GammaSweepRow> rows;
    for (double gamma : gammas) {
        const auto scores = apply_bias(bundle, support, gamma);
        const auto ranks = compute_ranks(scores, targets);
        const auto top = argmax_rows(scores);
        const auto flips = flip_analysis(base, ranks);
        GammaSweepRow row;
        row.gamma = gamma;
        row.delta_r1 = (static_cast<double>(count_top1(ranks)) - static_cast<double>(base_hits)) / b;
        row.bad_to_good = flips.bad_to_good;
        row.good_to_bad = flips.good_to_bad;
        if (flips.good_to_bad > 0) {
            row.b2g_per_g2b = static_cast<double>(flips.bad_to_good) / static_cast<double>(flips.good_to_bad);
        }
        row.g2b_over_base_hit =
            base_hits > 0 ? static_cast<double>(flips.good_to_bad) / static_cast<double>(base_hits) : 0.0;
        std::size_t changed = 0;
        for (std::size_t w = 0; w < top.size(); ++w) changed += top[w] != base_top[w] ? 1 : 0;
        row.top1_changed = static_cast<double>(changed) / b;
        rows.push_back(row);
    }
    return rows;
}

AuditBundle subsample_pool(const AuditBundle& bundle, std::size_t pool_size, std::uint64_t seed) {
    const std::size_t n = bundle.num_candidates();
    if (pool_size > n) {
        throw AuditError(ErrorCode::invalid_argument,
                         "pool size " + std::to_string(pool_size) + " exceeds N=" + std::to_string(n));
    }
    if (pool_size == n) return bundle;

    const auto& queries = bundle.queries();
    std::vector<bool> is_target(n, false);
    for (Index t : queries.target_of()) is_target[t] = true;
    std::vector<Index> keep, others;
    for (std::size_t j = 0; j < n; ++j) (is_target[j] ? keep : others).push_back(static_cast<Index>(j));
    if (pool_size < keep.size()) {
        throw AuditError(ErrorCode::invalid_argument, "pool size " + std::to_string(pool_size) +
                                                          " is below the number of distinct targets (" +
                                                          std::to_string(keep.size()) + ")");
    }
    Rng rng(derive_seed(seed, streams::pool_sweep, pool_size));
    rng.shuffle(others.begin(), others.end());
    keep.insert(keep.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(pool_size - keep.size()));
    std::sort(keep.begin(), keep.end());

    const auto& pool = bundle.candidates();
    std::vector<Index> old_to_new(n, 0);
    std::vector<Index> buckets;
    std::optional<std::vector<std::string>> keys;
    std::optional<std::vector<std::int64_t>> windows;
    if (pool.stimulus_key()) keys.emplace();
    if (pool.window_index()) windows.emplace();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        old_to_new[keep[i]] = static_cast<Index>(i);
        buckets.push_back(pool.bucket_of(keep[i]));
        if (keys) keys->push_back((*pool.stimulus_key())[keep[i]]);
        if (windows) windows->push_back((*pool.window_index())[keep[i]]);
    }
    std::vector<Index> used(buckets);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (auto& s : buckets) s = static_cast<Index>(std::lower_bound(used.begin(), used.end(), s) - used.begin());

    LogitMatrix logits(bundle.num_queries(), keep.size());
    for (std::size_t w = 0; w < bundle.num_queries(); ++w) {
        const auto src = bundle.logits().row(w);
        auto dst = logits.row(w);
        for (std::size_t i = 0; i < keep.size(); ++i) dst[i] = src[keep[i]];
    }
    std::vector<Index> targets(queries.size());
    for (std::size_t w = 0; w < targets.size(); ++w) targets[w] = old_to_new[queries.target_of(w)];
    std::vector<Index> groups(queries.group_of().begin(), queries.group_of().end());

    return validate_bundle(std::move(logits), CandidatePool::from_buckets(std::move(buckets), std::nullopt, keys, windows),
                           QuerySet::from_arrays(std::move(targets), std::move(groups), queries.story_of(),
                                                 queries.order_of(), queries.stimulus_key_of()));
}

std::vector<PoolSweepRow> run_pool_sweep(const AuditBundle& bundle, const GcbConfig& cfg,
                                         std::span<const std::size_t> pool_sizes, std::uint64_t seed,
                                         std::span<const std::size_t> ks) {
    std::vector<PoolSweepRow> rows;
    for (std::size_t size : pool_sizes) {
        const auto sub = subsample_pool(bundle, size, seed);
        const auto support = compute_support(sub, cfg, Grouping::sentence);
        PoolSweepRow row;
        row.pool_size = size;
        row.num_buckets = sub.candidates().num_buckets();
        const auto base_ranks = compute_ranks(sub);
        const auto gcb_ranks = compute_ranks(apply_bias(sub, support, cfg.gamma), sub.queries().target_of());
        row.base = compute_metrics(base_ranks, ks);
        row.gcb = compute_metrics(gcb_ranks, ks);
        row.delta_r1 = (static_cast<double>(count_top1(gcb_ranks)) - static_cast<double>(count_top1(base_ranks))) /
                       static_cast<double>(sub.num_queries());
        row.delta_mrr = row.gcb.mrr - row.base.mrr;
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw AuditError(ErrorCode::invalid_argument, "operation count overflows 64 bits");
    return out;
}

}  // namespace

OpCountReport opcount(const OpCountDims& dims, const GcbSupport* support) {
    if (dims.queries == 0 || dims.candidates == 0 || dims.dim == 0 || dims.steps == 0) {
        throw AuditError(ErrorCode::invalid_argument, "operation-count dimensions must be positive");
    }
    OpCountReport rep;
    rep.dims = dims;
    rep.per_query_macs = checked_mul(checked_mul(dims.candidates, dims.dim), dims.steps);
    rep.total_macs = checked_mul(rep.per_query_macs, dims.queries);
    if (support) {
        if (support->retained_per_query.size() != dims.queries) {
            throw AuditError(ErrorCode::dimension_mismatch, "GCB counters cover a different number of queries");
        }
        GcbCounters c;
        const double q = static_cast<double>(dims.queries);
        c.retained_total = std::accumulate(support->retained_per_query.begin(), support->retained_per_query.end(),
                                           std::uint64_t{0});
        c.unique_buckets_total = std::accumulate(support->unique_buckets_per_query.begin(),
                                                 support->unique_buckets_per_query.end(), std::uint64_t{0});
        for (const auto& g : support->groups) c.bucket_writes_total += g.selected.size();
        c.fuse_adds_per_query = dims.candidates;
        c.fuse_adds_total = checked_mul(dims.queries, dims.candidates);
        c.retained_per_query = static_cast<double>(c.retained_total) / q;
        c.unique_buckets_per_query = static_cast<double>(c.unique_buckets_total) / q;
        c.bucket_writes_per_query = static_cast<double>(c.bucket_writes_total) / q;
        rep.gcb = c;
    }
    return rep;
}

std::string scientific3(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", value);
    return buf;
}

std::string scientific3_pretty(double value) {
    const std::string s = scientific3(value);
    const auto e = s.find('e');
    const int exponent = std::stoi(s.substr(e + 1));
    return s.substr(0, e) + "×10^" + std::to_string(exponent);
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json interval_json(const RankInterval& iv) {
    Json j;
    j["lo"] = iv.lo;
    j["hi"] = iv.hi ? Json(*iv.hi) : Json(nullptr);
    return j;
}

Json delta_json(const MetricsReport& before, const MetricsReport& after) {
    Json j;
    Json recall = Json::object();
    for (const auto& [k, v] : after.recall_at) recall[std::to_string(k)] = v - before.recall_at.at(k);
    j["recall"] = recall;
    j["mrr"] = after.mrr - before.mrr;
    j["medr"] = after.medr - before.medr;
    return j;
}

Json envelope(std::string_view kind) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["report"] = kind;
    return j;
}

}  // namespace

Json to_json(const GcbConfig& cfg) {
    Json j;
    j["top_k"] = cfg.top_k;
    j["gate_quantile"] = cfg.gate_quantile;
    j["evidence_m"] = cfg.evidence_m;
    j["selected_buckets"] = cfg.selected_buckets;
    j["gamma"] = cfg.gamma;
    j["normalizer"] = to_string(cfg.normalizer);
    j["aggregator"] = to_string(cfg.aggregator);
    j["gate_enabled"] = cfg.gate_enabled;
    j["subtract_threshold"] = cfg.subtract_threshold;
    return j;
}

GcbConfig gcb_config_from_json(const Json& j, GcbConfig cfg) {
    if (!j.is_object()) throw AuditError(ErrorCode::parse, "GCB config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "top_k") cfg.top_k = value.get<std::size_t>();
            else if (key == "gate_quantile") cfg.gate_quantile = value.get<double>();
            else if (key == "evidence_m") cfg.evidence_m = value.get<std::size_t>();
            else if (key == "selected_buckets") cfg.selected_buckets = value.get<std::size_t>();
            else if (key == "gamma") cfg.gamma = value.get<double>();
            else if (key == "normalizer") cfg.normalizer = parse_normalizer(value.get<std::string>());
            else if (key == "aggregator") cfg.aggregator = parse_aggregator(value.get<std::string>());
            else if (key == "gate_enabled") cfg.gate_enabled = value.get<bool>();
            else if (key == "subtract_threshold") cfg.subtract_threshold = value.get<bool>();
            else throw AuditError(ErrorCode::parse, "unknown GCB config field '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw AuditError(ErrorCode::parse, std::string("bad GCB config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

Json to_json(const MetricsReport& m) {
    Json j;
    j["num_queries"] = m.num_queries;
    Json recall = Json::object();
    for (const auto& [k, v] : m.recall_at) recall[std::to_string(k)] = v;
    j["recall"] = recall;
    j["mrr"] = m.mrr;
    j["medr"] = m.medr;
    return j;
}

Json to_json(const FlipCounts& f) {
    Json j;
    j["good_to_bad"] = f.good_to_bad;
    j["bad_to_good"] = f.bad_to_good;
    j["net"] = f.net;
    j["balance"] = optional_number(f.balance);
    return j;
}

Json to_json(const BootstrapResult& b) {
    Json j;
    j["point_delta"] = b.point_delta;
    j["ci_low"] = b.ci_low;
    j["ci_high"] = b.ci_high;
    j["p_value"] = b.p_value;
    j["num_clusters"] = b.num_clusters;
    j["num_resamples"] = b.num_resamples;
    return j;
}

Json to_json(const CorrelationResult& c) {
    Json j;
    j["rho"] = optional_number(c.rho);
    j["p_value"] = optional_number(c.p_value);
    j["n"] = c.n;
    return j;
}

Json to_json(const HeadroomDecomposition& h) {
    Json j;
    j["oracle_headroom_r1"] = h.oracle_headroom_r1;
    j["gcb_recovered_r1"] = h.gcb_recovered_r1;
    Json rows = Json::array();
    for (const auto& r : h.rows) {
        Json row;
        row["subset"] = r.subset;
        row["count"] = r.count;
        row["bucket_hit_rate"] = optional_number(r.bucket_hit_rate);
        row["base_r1"] = optional_number(r.base_r1);
        row["gcb_r1"] = optional_number(r.gcb_r1);
        row["hard_prune_r1"] = optional_number(r.prune_r1);
        row["oracle_r1"] = optional_number(r.oracle_r1);
        rows.push_back(row);
    }
    j["subsets"] = rows;
    Json ranks = Json::array();
    for (const auto& r : h.by_baseline_rank) {
        Json row;
        row["interval"] = interval_json(r.interval);
        row["total"] = r.total;
        row["corrected"] = r.corrected;
        row["correction_rate"] = optional_number(r.correction_rate);
        row["bucket_hit_rate"] = optional_number(r.bucket_hit_rate);
        row["oracle_r1"] = optional_number(r.oracle_r1);
        ranks.push_back(row);
    }
    j["by_baseline_rank"] = ranks;
    return j;
}

Json to_json(const OracleReport& o) {
    Json j;
    j["metrics"] = to_json(o.metrics);
    j["headroom_r1"] = o.headroom_r1;
    return j;
}

Json to_json(const AuditReport& r) {
    Json j = envelope("audit");
    Json config;
    config["gcb"] = to_json(r.config);
    config["ks"] = r.options.ks;
    Json intervals = Json::array();
    for (const auto& iv : r.options.intervals) intervals.push_back(interval_json(iv));
    config["rank_intervals"] = intervals;
    if (r.options.bootstrap) {
        Json b;
        b["num_resamples"] = r.options.bootstrap->num_resamples;
        b["confidence"] = r.options.bootstrap->confidence;
        b["seed"] = r.options.bootstrap->seed;
        config["bootstrap"] = b;
    } else {
        config["bootstrap"] = nullptr;
    }
    config["length_bin_edges"] = r.options.length_bin_edges;
    j["config"] = config;

    Json bundle;
    bundle["num_queries"] = r.num_queries;
    bundle["num_candidates"] = r.num_candidates;
    bundle["num_buckets"] = r.num_buckets;
    bundle["num_groups"] = r.num_groups;
    j["bundle"] = bundle;

    j["base"] = to_json(r.base);
    j["gcb"] = to_json(r.gcb);
    j["delta"] = delta_json(r.base, r.gcb);
    Json ablations;
    ablations["gcb_single"] = to_json(r.gcb_single);
    ablations["no_gate"] = to_json(r.no_gate);
    ablations["hard_prune"] = to_json(r.hard_prune);
    j["ablations"] = ablations;
    j["flips"] = to_json(r.flips);

    Json buckets = Json::array();
    for (const auto& rb : r.rank_buckets) {
        Json row;
        row["interval"] = interval_json(rb.interval);
        row["total"] = rb.total;
        row["corrected"] = rb.corrected;
        row["rate"] = optional_number(rb.rate);
        buckets.push_back(row);
    }
    j["rank_buckets"] = buckets;
    j["oracle"] = to_json(r.oracle);
    j["headroom"] = to_json(r.headroom);
    j["bucket_size_correlation"] = to_json(r.bucket_size_correlation);

    Json bins = Json::array();
    for (const auto& b : r.length_bins) {
        Json row;
        row["lo"] = b.lo;
        row["hi"] = b.hi ? Json(*b.hi) : Json(nullptr);
        row["num_groups"] = b.num_groups;
        row["num_queries"] = b.num_queries;
        row["r1_before"] = b.r1_before;
        row["r1_after"] = b.r1_after;
        row["delta_r1"] = b.delta;
        bins.push_back(row);
    }
    j["length_bins"] = bins;

    if (r.bootstrap_r1) {
        Json b;
        b["r@1"] = to_json(*r.bootstrap_r1);
        b["mrr"] = to_json(*r.bootstrap_mrr);
        j["bootstrap"] = b;
    } else {
        j["bootstrap"] = nullptr;
    }
    return j;
}

Json to_json(const OpCountReport& r) {
    Json j = envelope("opcount");
    Json dims;
    dims["Q"] = r.dims.queries;
    dims["N"] = r.dims.candidates;
    dims["D"] = r.dims.dim;
    dims["T"] = r.dims.steps;
    j["dims"] = dims;
    Json sim;
    sim["per_query_macs"] = r.per_query_macs;
    sim["total_macs"] = r.total_macs;
    sim["per_query_macs_sci"] = scientific3(static_cast<double>(r.per_query_macs));
    sim["total_macs_sci"] = scientific3(static_cast<double>(r.total_macs));
    sim["per_query_macs_display"] = scientific3_pretty(static_cast<double>(r.per_query_macs));
    sim["total_macs_display"] = scientific3_pretty(static_cast<double>(r.total_macs));
    j["similarity"] = sim;
    if (r.gcb) {
        const auto& c = *r.gcb;
        Json g;
        g["retained_elements_total"] = c.retained_total;
        g["retained_elements_per_query"] = c.retained_per_query;
        g["unique_buckets_total"] = c.unique_buckets_total;
        g["unique_buckets_per_query"] = c.unique_buckets_per_query;
        g["fuse_adds_total"] = c.fuse_adds_total;
        g["fuse_adds_per_query"] = c.fuse_adds_per_query;
        g["bucket_writes_total"] = c.bucket_writes_total;
        g["bucket_writes_per_query"] = c.bucket_writes_per_query;
        j["gcb"] = g;
    } else {
        j["gcb"] = nullptr;
    }
    return j;
}

Json gamma_sweep_report(const GcbConfig& cfg, std::span<const GammaSweepRow> rows) {
    Json j = envelope("gamma_sweep");
    j["config"] = Json{{"gcb", to_json(cfg)}};
    Json out = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["gamma"] = r.gamma;
        row["delta_r1"] = r.delta_r1;
        row["bad_to_good"] = r.bad_to_good;
        row["good_to_bad"] = r.good_to_bad;
        row["b2g_per_g2b"] = optional_number(r.b2g_per_g2b);
        row["g2b_over_base_hit"] = r.g2b_over_base_hit;
        row["top1_changed"] = r.top1_changed;
        out.push_back(row);
    }
    j["rows"] = out;
    return j;
}

Json pool_sweep_report(const GcbConfig& cfg, std::uint64_t seed, std::span<const PoolSweepRow> rows) {
    Json j = envelope("pool_sweep");
    j["config"] = Json{{"gcb", to_json(cfg)}, {"seed", seed}};
    Json out = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["pool_size"] = r.pool_size;
        row["num_buckets"] = r.num_buckets;
        for (const auto& [k, v] : r.base.recall_at) row["base_r@" + std::to_string(k)] = v;
        row["base_mrr"] = r.base.mrr;
        row["base_medr"] = r.base.medr;
        for (const auto& [k, v] : r.gcb.recall_at) row["gcb_r@" + std::to_string(k)] = v;
        row["gcb_mrr"] = r.gcb.mrr;
        row["gcb_medr"] = r.gcb.medr;
        row["delta_r1"] = r.delta_r1;
        row["delta_mrr"] = r.delta_mrr;
        out.push_back(row);
    }
    j["rows"] = out;
    return j;
}

Json attenuation_report(const GcbConfig& cfg, std::uint64_t seed, std::span<const AttenuationPoint> rows) {
    Json j = envelope("attenuation_sweep");
    j["config"] = Json{{"gcb", to_json(cfg)}, {"seed", seed}};
    Json out = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["alpha"] = r.alpha;
        row["base_r1"] = r.base_r1;
        row["gcb_r1"] = r.gcb_r1;
        row["delta_r1"] = r.delta_r1;
        row["base_mrr"] = r.base_mrr;
        row["gcb_mrr"] = r.gcb_mrr;
        row["delta_mrr"] = r.delta_mrr;
        out.push_back(row);
    }
    j["rows"] = out;
    return j;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    throw AuditError(ErrorCode::invalid_argument, "unknown report format '" + std::string(text) + "' (use json or csv)");
}

namespace {

std::string csv_cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + "\"";
    }
    return v.dump();
}

}  // namespace

std::string render_report(const Json& report, ReportFormat format) {
    if (format == ReportFormat::json) return report.dump(2) + "\n";
    if (!report.contains("rows") || !report["rows"].is_array()) {
        throw AuditError(ErrorCode::invalid_argument, "this report is not table-shaped; use --format json");
    }
    const auto& rows = report["rows"];
    std::ostringstream out;
    if (rows.empty()) return "";
    bool first = true;
    for (const auto& [key, value] : rows.front().items()) {
        out << (first ? "" : ",") << key;
        first = false;
    }
    out << '\n';
    for (const auto& row : rows) {
        first = true;
        for (const auto& [key, value] : rows.front().items()) {
            out << (first ? "" : ",") << (row.contains(key) ? csv_cell(row[key]) : "");
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

void emit_report(const Json& report, ReportFormat format, const std::filesystem::path& path) {
    const auto text = render_report(report, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw AuditError(ErrorCode::io, "failed writing " + path.string());
}

}  // namespace gcbaudit
