#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gcbaudit/audit.hpp"
#include "gcbaudit/io.hpp"
#include "gcbaudit/parallel.hpp"
#include "gcbaudit/synth.hpp"

using namespace gcbaudit;

namespace {

struct BundleArgs {
    std::string bundle;  // prefix shorthand for the three files below
    std::string logits, candidates, queries;

    AuditBundle load() const {
        if (!bundle.empty()) {
            if (!logits.empty() || !candidates.empty() || !queries.empty()) {
                throw AuditError(ErrorCode::invalid_argument, "--bundle cannot be combined with --logits/--candidates/--queries");
            }
            const auto p = bundle_paths(bundle);
            return load_bundle(p.logits, p.candidates, p.queries);
        }
        if (logits.empty() || candidates.empty() || queries.empty()) {
            throw AuditError(ErrorCode::invalid_argument, "need --logits, --candidates and --queries (or --bundle)");
        }
        return load_bundle(logits, candidates, queries);
    }
};

// Inline GCB flags override the --config file, which overrides the defaults.
struct GcbArgs {
    std::string config;
    std::optional<std::size_t> top_k, evidence_m, selected;
    std::optional<double> quantile, gamma;
    std::optional<std::string> normalizer, aggregator;
    bool no_gate = false;
    bool raw_excess = false;

    GcbConfig resolve() const {
        GcbConfig cfg;
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw AuditError(ErrorCode::io, "cannot open config " + config);
            Json j;
            try {
                j = Json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw AuditError(ErrorCode::parse, config + ": " + e.what());
            }
            if (j.contains("gcb")) j = j["gcb"];
            cfg = gcb_config_from_json(j, cfg);
        }
        if (top_k) cfg.top_k = *top_k;
        if (evidence_m) cfg.evidence_m = *evidence_m;
        if (selected) cfg.selected_buckets = *selected;
        if (quantile) cfg.gate_quantile = *quantile;
        if (gamma) cfg.gamma = *gamma;
        if (normalizer) cfg.normalizer = parse_normalizer(*normalizer);
        if (aggregator) cfg.aggregator = parse_aggregator(*aggregator);
        if (no_gate) cfg.gate_enabled = false;
        if (raw_excess) cfg.subtract_threshold = false;
        validate(cfg);
        return cfg;
    }
};

struct OutputArgs {
    std::string out;
    std::string format = "json";

    void emit(const Json& report) const {
        const auto fmt = parse_report_format(format);
        if (out.empty() || out == "-") {
            std::cout << render_report(report, fmt);
            std::cout.flush();
        } else {
            emit_report(report, fmt, out);
        }
    }
};

void add_bundle_flags(CLI::App* cmd, BundleArgs& b) {
    cmd->add_option("--bundle", b.bundle, "Prefix of <p>.gcbl, <p>.candidates.jsonl, <p>.queries.jsonl");
    cmd->add_option("--logits", b.logits, "Logit matrix (.gcbl)");
    cmd->add_option("--candidates", b.candidates, "Candidate manifest (JSONL)");
    cmd->add_option("--queries", b.queries, "Query manifest (JSONL)");
}

void add_gcb_flags(CLI::App* cmd, GcbArgs& g) {
    cmd->add_option("--config", g.config, "GCB configuration JSON file");
    cmd->add_option("--top-k", g.top_k, "Candidates kept per window (K)");
    cmd->add_option("--quantile", g.quantile, "Gate quantile (q)");
    cmd->add_option("--evidence-m", g.evidence_m, "Evidence values aggregated per bucket (m)");
    cmd->add_option("--selected", g.selected, "Buckets receiving the bias (S)");
    cmd->add_option("--gamma", g.gamma, "Bias gain");
    cmd->add_option("--normalizer", g.normalizer, "none | bucket_sqrt | bucket_count | kept_count");
    cmd->add_option("--aggregator", g.aggregator, "mean_top_m | lse_top_m");
    cmd->add_flag("--no-gate", g.no_gate, "Disable the quantile gate");
    cmd->add_flag("--raw-excess", g.raw_excess, "With --no-gate, pool raw logits instead of L - tau");
}

void add_output_flags(CLI::App* cmd, OutputArgs& o) {
    cmd->add_option("--out", o.out, "Report path (default: stdout)");
    cmd->add_option("--format", o.format, "json | csv");
}

Json envelope(std::string_view kind) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["report"] = kind;
    return j;
}

Json bundle_summary(const AuditBundle& b) {
    Json j;
    j["num_queries"] = b.num_queries();
    j["num_candidates"] = b.num_candidates();
    j["num_buckets"] = b.candidates().num_buckets();
    j["num_groups"] = b.queries().num_groups();
    return j;
}

Json error_object(std::string_view code, std::string_view message) {
    Json j;
    j["error"]["code"] = code;
    j["error"]["message"] = message;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit group-context bias on retrieval logit exports"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)");

    BundleArgs bundle;
    GcbArgs gcb;
    OutputArgs output;
    std::uint64_t seed = 0;
    std::function<void()> action;

    auto* validate_cmd = app.add_subcommand("validate", "Load and validate a bundle");
    add_bundle_flags(validate_cmd, bundle);
    add_output_flags(validate_cmd, output);
    validate_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            Json j = envelope("validate");
            j["valid"] = true;
            j["bundle"] = bundle_summary(b);
            const auto sizes = bucket_sizes(b.candidates());
            j["bucket_size_min"] = *std::min_element(sizes.begin(), sizes.end());
            j["bucket_size_max"] = *std::max_element(sizes.begin(), sizes.end());
            output.emit(j);
        };
    });

    std::vector<std::size_t> ks = kDefaultKs;
    auto* metrics_cmd = app.add_subcommand("metrics", "Baseline R@K, MRR and MedR");
    add_bundle_flags(metrics_cmd, bundle);
    add_output_flags(metrics_cmd, output);
    metrics_cmd->add_option("--ks", ks, "Recall cut-offs");
    metrics_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            Json j = envelope("metrics");
            j["config"]["ks"] = ks;
            j["bundle"] = bundle_summary(b);
            j["base"] = to_json(compute_metrics(compute_ranks(b), ks));
            output.emit(j);
        };
    });

    std::size_t resamples = 0;
    double confidence = 0.95;
    std::vector<std::size_t> length_edges;
    std::string scores_out;
    auto* gcb_cmd = app.add_subcommand("gcb", "Full GCB audit: metrics, ablations, flips, oracle, headroom");
    add_bundle_flags(gcb_cmd, bundle);
    add_gcb_flags(gcb_cmd, gcb);
    add_output_flags(gcb_cmd, output);
    gcb_cmd->add_option("--ks", ks, "Recall cut-offs");
    gcb_cmd->add_option("--bootstrap", resamples, "Bootstrap resamples (0: skip)");
    gcb_cmd->add_option("--confidence", confidence, "Bootstrap interval level");
    gcb_cmd->add_option("--seed", seed, "Bootstrap seed");
    gcb_cmd->add_option("--length-bins", length_edges, "Lower edges of group-length bins");
    gcb_cmd->add_option("--scores-out", scores_out, "Also write GCB scores as a .gcbl file");
    gcb_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            AuditOptions opts;
            opts.ks = ks;
            opts.length_bin_edges = length_edges;
            if (resamples > 0) opts.bootstrap = BootstrapConfig{resamples, confidence, seed};
            const auto rep = run_audit(b, cfg, opts);
            if (!scores_out.empty()) write_logits(scores_out, apply_gcb(b, cfg));
            output.emit(to_json(rep));
        };
    });

    auto* oracle_cmd = app.add_subcommand("oracle", "Within-bucket oracle diagnostic");
    add_bundle_flags(oracle_cmd, bundle);
    add_output_flags(oracle_cmd, output);
    oracle_cmd->add_option("--ks", ks, "Recall cut-offs");
    oracle_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            Json j = envelope("oracle");
            j["config"]["ks"] = ks;
            j["bundle"] = bundle_summary(b);
            j["base"] = to_json(compute_metrics(compute_ranks(b), ks));
            j["oracle"] = to_json(oracle_within_bucket(b, ks));
            output.emit(j);
        };
    });

    auto* decompose_cmd = app.add_subcommand("decompose", "Headroom decomposition of the oracle-GCB gap");
    add_bundle_flags(decompose_cmd, bundle);
    add_gcb_flags(decompose_cmd, gcb);
    add_output_flags(decompose_cmd, output);
    decompose_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            Json j = envelope("decompose");
            j["config"]["gcb"] = to_json(cfg);
            j["bundle"] = bundle_summary(b);
            j["headroom"] = to_json(decompose_headroom(b, cfg, kDefaultRankIntervals));
            output.emit(j);
        };
    });

    std::string kind = "random_within_story";
    double p = 0.0;
    std::string queries_out;
    auto* perturb_cmd = app.add_subcommand("perturb", "Reassign windows between groups and re-audit");
    add_bundle_flags(perturb_cmd, bundle);
    add_gcb_flags(perturb_cmd, gcb);
    add_output_flags(perturb_cmd, output);
    perturb_cmd->add_option("--kind", kind, "neighbour_once | random_within_story");
    perturb_cmd->add_option("--p", p, "Move probability")->required();
    perturb_cmd->add_option("--seed", seed, "Perturbation seed");
    perturb_cmd->add_option("--queries-out", queries_out, "Write the perturbed query manifest");
    perturb_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            const PerturbConfig pc{parse_perturb_kind(kind), p, seed};
            const auto res = perturb_groups(b.queries(), pc);
            const auto moved = b.with_queries(res.queries);
            if (!queries_out.empty()) write_queries(queries_out, res.queries);
            const auto before = compute_ranks(b);
            const auto after = compute_ranks(moved);
            Json j = envelope("perturb");
            j["config"]["gcb"] = to_json(cfg);
            j["config"]["kind"] = to_string(pc.kind);
            j["config"]["p"] = p;
            j["config"]["seed"] = seed;
            j["moved"] = res.moved;
            j["skipped_single_group_stories"] = res.skipped_single_group_stories;
            j["num_groups_before"] = b.queries().num_groups();
            j["num_groups_after"] = moved.queries().num_groups();
            j["base_invariant"] = before.ranks == after.ranks;
            const auto targets = b.queries().target_of();
            const auto original = compute_metrics(compute_ranks(apply_gcb(b, cfg), targets));
            const auto perturbed = compute_metrics(compute_ranks(apply_gcb(moved, cfg), targets));
            j["base"] = to_json(compute_metrics(after));
            j["gcb_original"] = to_json(original);
            j["gcb_perturbed"] = to_json(perturbed);
            j["delta_r1_original"] = original.recall(1) - compute_metrics(before).recall(1);
            j["delta_r1_perturbed"] = perturbed.recall(1) - compute_metrics(after).recall(1);
            output.emit(j);
        };
    });

    std::vector<double> alphas{1.0, 0.75, 0.5, 0.25, 0.1, 0.0};
    std::string logits_out;
    auto* attenuate_cmd = app.add_subcommand("attenuate", "Evidence attenuation sweep");
    add_bundle_flags(attenuate_cmd, bundle);
    add_gcb_flags(attenuate_cmd, gcb);
    add_output_flags(attenuate_cmd, output);
    attenuate_cmd->add_option("--alphas", alphas, "Attenuation levels in [0, 1]");
    attenuate_cmd->add_option("--seed", seed, "Permutation seed");
    attenuate_cmd->add_option("--logits-out", logits_out, "Write attenuated logits (single alpha only)");
    attenuate_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            if (!logits_out.empty()) {
                if (alphas.size() != 1) throw AuditError(ErrorCode::invalid_argument, "--logits-out needs exactly one alpha");
                write_logits(logits_out, attenuate_logits(b.logits(), AttenuationConfig{alphas[0], seed}));
            }
            output.emit(attenuation_report(cfg, seed, attenuation_sweep(b, cfg, alphas, seed)));
        };
    });

    std::size_t boot_resamples = 10000;
    auto* bootstrap_cmd = app.add_subcommand("bootstrap", "Paired cluster bootstrap of GCB minus baseline");
    add_bundle_flags(bootstrap_cmd, bundle);
    add_gcb_flags(bootstrap_cmd, gcb);
    add_output_flags(bootstrap_cmd, output);
    bootstrap_cmd->add_option("--resamples", boot_resamples, "Bootstrap resamples");
    bootstrap_cmd->add_option("--confidence", confidence, "Interval level");
    bootstrap_cmd->add_option("--seed", seed, "Bootstrap seed");
    bootstrap_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            const BootstrapConfig bc{boot_resamples, confidence, seed};
            const auto before = compute_ranks(b);
            const auto after = compute_ranks(apply_gcb(b, cfg), b.queries().target_of());
            const auto clusters = b.queries().group_of();
            Json j = envelope("bootstrap");
            j["config"]["gcb"] = to_json(cfg);
            j["config"]["num_resamples"] = boot_resamples;
            j["config"]["confidence"] = confidence;
            j["config"]["seed"] = seed;
            j["bundle"] = bundle_summary(b);
            j["r@1"] = to_json(paired_cluster_bootstrap(before, after, clusters, BootstrapMetric::recall(1), bc));
            j["mrr"] = to_json(paired_cluster_bootstrap(before, after, clusters, BootstrapMetric::reciprocal_rank(), bc));
            output.emit(j);
        };
    });

    std::vector<double> gammas{0.0, 0.2, 0.4, 0.7, 1.0, 1.4};
    auto* gamma_cmd = app.add_subcommand("gamma-sweep", "Vary only the bias gain");
    add_bundle_flags(gamma_cmd, bundle);
    add_gcb_flags(gamma_cmd, gcb);
    add_output_flags(gamma_cmd, output);
    gamma_cmd->add_option("--gammas", gammas, "Gains to evaluate");
    gamma_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            output.emit(gamma_sweep_report(cfg, run_gamma_sweep(b, cfg, gammas)));
        };
    });

    std::vector<std::size_t> sizes;
    auto* pool_cmd = app.add_subcommand("pool-sweep", "Subsample the candidate pool and re-audit");
    add_bundle_flags(pool_cmd, bundle);
    add_gcb_flags(pool_cmd, gcb);
    add_output_flags(pool_cmd, output);
    pool_cmd->add_option("--sizes", sizes, "Pool sizes")->required();
    pool_cmd->add_option("--seed", seed, "Subsampling seed");
    pool_cmd->callback([&] {
        action = [&] {
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            output.emit(pool_sweep_report(cfg, seed, run_pool_sweep(b, cfg, sizes, seed)));
        };
    });

    SynthConfig synth;
    std::string prefix;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-signal bundle");
    add_output_flags(synth_cmd, output);
    synth_cmd->add_option("--prefix", prefix, "Write <prefix>.gcbl and manifests")->required();
    synth_cmd->add_option("--num-queries", synth.num_queries, "B");
    synth_cmd->add_option("--num-candidates", synth.num_candidates, "N");
    synth_cmd->add_option("--num-buckets", synth.num_buckets, "M");
    synth_cmd->add_option("--group-size", synth.group_size, "Windows per group");
    synth_cmd->add_option("--num-stories", synth.num_stories, "Stories");
    synth_cmd->add_option("--target-strength", synth.target_strength, "a");
    synth_cmd->add_option("--bucket-affinity", synth.bucket_affinity, "b");
    synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "sigma");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->callback([&] {
        action = [&] {
            const auto b = generate(synth);
            save_bundle(prefix, b);
            const auto paths = bundle_paths(prefix);
            Json j = envelope("synth");
            Json c;
            c["num_queries"] = synth.num_queries;
            c["num_candidates"] = synth.num_candidates;
            c["num_buckets"] = synth.num_buckets;
            c["group_size"] = synth.group_size;
            c["num_stories"] = synth.num_stories;
            c["target_strength"] = synth.target_strength;
            c["bucket_affinity"] = synth.bucket_affinity;
            c["noise_sigma"] = synth.noise_sigma;
            c["seed"] = synth.seed;
            j["config"] = c;
            j["bundle"] = bundle_summary(b);
            j["files"] = {paths.logits.string(), paths.candidates.string(), paths.queries.string()};
            output.emit(j);
        };
    });

    OpCountDims dims;
    auto* op_cmd = app.add_subcommand("opcount", "Exact similarity MACs and GCB counters");
    add_bundle_flags(op_cmd, bundle);
    add_gcb_flags(op_cmd, gcb);
    add_output_flags(op_cmd, output);
    op_cmd->add_option("-Q,--num-queries", dims.queries, "Q (taken from the bundle when given)");
    op_cmd->add_option("-N,--num-candidates", dims.candidates, "N (taken from the bundle when given)");
    op_cmd->add_option("-D,--dim", dims.dim, "Feature dimension")->required();
    op_cmd->add_option("-T,--steps", dims.steps, "Time steps")->required();
    op_cmd->callback([&] {
        action = [&] {
            const bool have_bundle =
                !bundle.bundle.empty() || !bundle.logits.empty() || !bundle.candidates.empty() || !bundle.queries.empty();
            if (!have_bundle) {
                output.emit(to_json(opcount(dims)));
                return;
            }
            const auto b = bundle.load();
            const auto cfg = gcb.resolve();
            dims.queries = b.num_queries();
            dims.candidates = b.num_candidates();
            const auto support = compute_support(b, cfg, Grouping::sentence);
            Json j = to_json(opcount(dims, &support));
            j["config"] = Json{{"gcb", to_json(cfg)}};
            output.emit(j);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_object("usage", e.what()).dump() << '\n';
        return 2;
    }

    try {
        set_thread_count(threads == 0 ? std::thread::hardware_concurrency() : threads);
        if (action) action();
    } catch (const AuditError& e) {
        const bool usage = e.code() == ErrorCode::invalid_argument;
        std::cerr << error_object(to_string(e.code()), e.what()).dump() << '\n';
        return usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << error_object("internal", e.what()).dump() << '\n';
        return 1;
    }
    return 0;
}
