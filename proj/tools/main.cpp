// peerfair: audit binary decision systems for group bias by comparing each
// protected instance against its identification-coefficient peers.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "peerfair/common.hpp"
#include "peerfair/report.hpp"
#include "peerfair/synth.hpp"

namespace fs = std::filesystem;
using namespace peerfair;

namespace {

struct CommonArgs {
    std::string data_path;
    std::string schema_path;
    std::string config_path;
    std::string out_dir = "peerfair_out";
    std::string seed_flag;
    std::string test_statistic;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool data_required = true) {
    cmd->add_option("--data", args.data_path, "input CSV file")->required(data_required);
    cmd->add_option("--schema", args.schema_path, "schema JSON file")
        ->required(data_required);
    cmd->add_option("--config", args.config_path, "audit config JSON file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed_flag, "RNG seed (overrides config and env)");
    cmd->add_option("--test-statistic", args.test_statistic,
                    "z statistic variant: grand_mean | dispersion");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

// Precedence: flag > PEERFAIR_SEED env > config file > default.
AuditConfig resolve_config(const CommonArgs& args) {
    AuditConfig config;
    if (!args.config_path.empty()) {
        config = AuditConfig::from_json_file(args.config_path);
    }
    if (const char* env = std::getenv("PEERFAIR_SEED")) {
        config.seed = std::strtoull(env, nullptr, 10);
    }
    if (!args.seed_flag.empty()) {
        config.seed = std::strtoull(args.seed_flag.c_str(), nullptr, 10);
    }
    if (!args.test_statistic.empty()) {
        config.test_statistic = test_statistic_from_string(args.test_statistic);
    }
    config.validate();
    return config;
}

Dataset load_inputs(const CommonArgs& args, LoadStats* stats) {
    if (!fs::exists(args.schema_path)) {
        throw UsageError("schema file not found: '" + args.schema_path + "'");
    }
    if (!fs::exists(args.data_path)) {
        throw UsageError("data file not found: '" + args.data_path + "'");
    }
    return load_dataset(args.data_path, args.schema_path, stats);
}

RunManifest manifest_for(const CommonArgs& args, const AuditConfig& config) {
    return make_manifest(config, fingerprint_file(args.data_path),
                         fingerprint_file(args.schema_path));
}

void print_pipeline_summary(const PipelineResult& result) {
    const auto& audit = result.audit;
    std::cout << "instances audited: " << audit.results.size()
              << "  (auditable " << audit.auditable_count() << ", unknown "
              << audit.count(Category::Unknown) << ")\n";
    for (Category c : {Category::ExtremelyDiscriminated, Category::SlightlyDiscriminated,
                       Category::FairlyTreated, Category::SlightlyPrivileged,
                       Category::ExtremelyPrivileged, Category::Unknown}) {
        std::cout << "  " << to_string(c) << ": " << audit.count(c) << "\n";
    }
    if (std::isfinite(result.put)) {
        std::cout << "PUT (unfair / auditable): " << result.put << "\n";
    }
    std::cout << "delta: " << result.delta << "  (sigma_minus " << result.ic.sigma_minus
              << ")\n";
}

int cmd_audit(const CommonArgs& args) {
    const AuditConfig config = resolve_config(args);
    Dataset dataset = load_inputs(args, nullptr);
    PipelineOptions options;
    options.threads = args.threads;
    const PipelineResult result = run_pipeline(dataset, config, options);
    const RunManifest manifest = manifest_for(args, config);

    const fs::path out(args.out_dir);
    write_text_file(out / "report.json", audit_report_to_json(manifest, result, dataset));
    write_text_file(out / "scatter.csv", scatter_csv(result.audit.results));
    write_text_file(out / "category_rejection.csv",
                    category_stats_csv(category_rejection_stats(result.audit.results)));
    write_text_file(out / "ic.csv", ic_to_csv(result.ic));
    write_text_file(out / "peers.csv", peers_to_csv(result.peers));
    write_text_file(out / "explanations.csv", explanations_to_csv(result.explanations));
    write_text_file(out / "explanation_aggregate.csv",
                    explanation_aggregate_to_csv(result.explanations));

    print_pipeline_summary(result);
    std::cout << "report written to " << (out / "report.json").string() << "\n";
    return 0;
}

int cmd_explain(const CommonArgs& args) {
    const AuditConfig config = resolve_config(args);
    Dataset dataset = load_inputs(args, nullptr);
    PipelineOptions options;
    options.threads = args.threads;
    const PipelineResult result = run_pipeline(dataset, config, options);

    const fs::path out(args.out_dir);
    write_text_file(out / "explanations.csv", explanations_to_csv(result.explanations));
    write_text_file(out / "explanation_aggregate.csv",
                    explanation_aggregate_to_csv(result.explanations));
    std::cout << "eligible (fairly treated, rejected): " << result.explanations.eligible
              << "\nexplained: " << result.explanations.records.size()
              << "\nskipped (too few accepted peers): "
              << result.explanations.skipped_few_peers << "\n";
    for (const auto& row : result.explanations.aggregate) {
        std::cout << "  " << row.feature << ": " << row.percent << "% flagged ("
                  << row.flagged << "/" << row.tested << ")\n";
    }
    return 0;
}

int cmd_imbalance(const CommonArgs& args, const std::vector<double>& omegas, int repeats,
                  bool freeze_delta, bool reuse_hyperparams, bool five_way) {
    const AuditConfig config = resolve_config(args);
    Dataset dataset = load_inputs(args, nullptr);
    ImbalanceOptions options;
    options.omegas = omegas;
    if (options.omegas.empty()) {
        options.omegas = {0.3633, 0.3133, 0.2633, 0.2133, 0.1633, 0.1133};
    }
    options.repeats = repeats;
    options.freeze_delta = freeze_delta;
    options.reuse_hyperparams = reuse_hyperparams;
    options.five_way = five_way;
    options.threads = args.threads;

    const ImbalanceReport report = run_imbalance_study(dataset, config, options);
    const RunManifest manifest = manifest_for(args, config);
    const fs::path out(args.out_dir);
    write_text_file(out / "imbalance.csv", imbalance_to_csv(report));
    write_text_file(out / "imbalance.json", imbalance_report_to_json(manifest, report));

    std::cout << "baseline omega " << report.baseline_omega << ", PUT "
              << report.baseline_put << "\n";
    for (const auto& level : report.levels) {
        std::cout << "  omega " << level.omega_target << ": PUT " << level.put_mean
                  << " +- " << level.put_sd << ", IOR " << level.ior_mean << " +- "
                  << level.ior_sd;
        if (!level.note.empty()) std::cout << "  [" << level.note << "]";
        std::cout << "\n";
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& preset, int n,
              std::uint64_t seed, double direct_bias, const std::string& out_prefix) {
    SynthSpec spec;
    if (!spec_path.empty()) {
        spec = SynthSpec::from_json_file(spec_path);
    } else if (preset == "sme") {
        spec = SynthSpec::sme_preset(n, seed);
        spec.direct_bias = direct_bias;
    } else if (preset == "null") {
        spec = SynthSpec::null_preset(n, seed);
        spec.direct_bias = direct_bias;
    } else {
        throw UsageError("synth: provide --spec FILE or --preset sme|null");
    }

    auto [dataset, truth] = generate(spec);
    const fs::path prefix(out_prefix);
    if (prefix.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(prefix.parent_path(), ec);
    }
    const fs::path csv_path = prefix.string() + ".csv";
    const fs::path schema_path = prefix.string() + ".schema.json";
    const fs::path truth_path = prefix.string() + ".truth.csv";
    write_dataset_csv(dataset, csv_path);
    write_text_file(schema_path, dataset.schema().to_json_text());
    write_truth_csv(truth, truth_path);
    std::cout << "generated " << dataset.size() << " instances ("
              << dataset.count_protected() << " protected, "
              << dataset.count_favourable() << " favourable)\n"
              << "wrote " << csv_path.string() << ", " << schema_path.string() << ", "
              << truth_path.string() << "\n";
    return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir) {
    const std::string text = read_text_file(report_path);
    const fs::path out(out_dir);
    write_text_file(out / "scatter.csv", report_json_to_scatter_csv(text));
    write_text_file(out / "category_rejection.csv", report_json_to_category_csv(text));
    std::cout << "wrote " << (out / "scatter.csv").string() << " and "
              << (out / "category_rejection.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"peer-comparison fairness auditing for binary decision systems"};
    app.require_subcommand(1);

    CommonArgs audit_args;
    auto* audit_cmd = app.add_subcommand("audit", "run the full audit pipeline");
    add_common(audit_cmd, audit_args);

    CommonArgs explain_args;
    auto* explain_cmd =
        app.add_subcommand("explain", "explain fairly-treated rejections via peers");
    add_common(explain_cmd, explain_args);

    CommonArgs imbalance_args;
    std::vector<double> omegas;
    int repeats = 5;
    bool freeze_delta = false;
    bool reuse_hyperparams = false;
    bool five_way = false;
    auto* imbalance_cmd =
        app.add_subcommand("imbalance", "stability study under group under-sampling");
    add_common(imbalance_cmd, imbalance_args);
    imbalance_cmd->add_option("--omegas", omegas, "target protected shares")
        ->delimiter(',');
    imbalance_cmd->add_option("--repeats", repeats, "repeats per level (default 5)");
    imbalance_cmd->add_flag("--freeze-delta", freeze_delta,
                            "reuse the baseline delta instead of re-resolving it");
    imbalance_cmd->add_flag("--reuse-hyperparams", reuse_hyperparams,
                            "skip grid search in variant runs");
    imbalance_cmd->add_flag("--five-way", five_way,
                            "compare full five-way categories in the IOR");

    std::string synth_spec_path, synth_preset, synth_prefix = "synthetic";
    int synth_n = 4159;
    std::uint64_t synth_seed = 1;
    double synth_bias = 0.0;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--spec", synth_spec_path, "generator spec JSON file");
    synth_cmd->add_option("--preset", synth_preset, "built-in spec: sme | null");
    synth_cmd->add_option("--n", synth_n, "instance count (presets)");
    synth_cmd->add_option("--seed", synth_seed, "generator seed (presets)");
    synth_cmd->add_option("--bias", synth_bias,
                          "direct outcome-logit bias for the protected group (presets)");
    synth_cmd->add_option("--out-prefix", synth_prefix,
                          "output prefix for .csv/.schema.json/.truth.csv");

    std::string report_path, report_out = "peerfair_out";
    auto* report_cmd =
        app.add_subcommand("report", "convert a report JSON into plot-ready CSVs");
    report_cmd->add_option("--report", report_path, "audit report JSON")->required();
    report_cmd->add_option("--out", report_out, "output directory");

    try {
        app.parse(argc, argv);
        if (audit_cmd->parsed()) return cmd_audit(audit_args);
        if (explain_cmd->parsed()) return cmd_explain(explain_args);
        if (imbalance_cmd->parsed()) {
            return cmd_imbalance(imbalance_args, omegas, repeats, freeze_delta,
                                 reuse_hyperparams, five_way);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_spec_path, synth_preset, synth_n, synth_seed,
                             synth_bias, synth_prefix);
        }
        if (report_cmd->parsed()) return cmd_report(report_path, report_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
