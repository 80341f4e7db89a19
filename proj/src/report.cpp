#include "peerfair/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "peerfair/common.hpp"

namespace peerfair {

using nlohmann::ordered_json;

std::string fingerprint_bytes(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string fingerprint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fingerprint_bytes(buf.str());
}

std::string iso_utc_timestamp() {
    std::time_t t = std::time(nullptr);
    // Reproducible-build convention: a pinned epoch yields byte-identical
    // reports across runs.
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest make_manifest(const AuditConfig& config, const std::string& dataset_fingerprint,
                          const std::string& schema_fingerprint) {
    RunManifest m;
    m.version = kVersion;
    m.created_at = iso_utc_timestamp();
    m.dataset_fingerprint = dataset_fingerprint;
    m.schema_fingerprint = schema_fingerprint;
    m.seed = config.seed;
    m.config = config;
    return m;
}

namespace {

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["version"] = m.version;
    j["created_at"] = m.created_at;
    j["dataset_fingerprint"] = m.dataset_fingerprint;
    j["schema_fingerprint"] = m.schema_fingerprint;
    j["seed"] = m.seed;
    j["config"] = ordered_json::parse(m.config.to_json_text());
    return j;
}

ordered_json selection_to_json(const ModelSelectionReport& r) {
    ordered_json j;
    j["target"] = r.target == ModelTarget::Outcome ? "outcome" : "protected";
    j["grid"] = r.grid;
    j["mean_cv_auc"] = r.mean_cv_auc;
    j["folds_used"] = r.folds_used;
    j["chosen_strength"] = r.chosen_strength;
    if (std::isfinite(r.test_auc)) {
        j["test_auc"] = r.test_auc;
    } else {
        j["test_auc"] = nullptr;
    }
    j["skipped_folds"] = r.skipped_folds;
    return j;
}

}  // namespace

std::string audit_report_to_json(const RunManifest& manifest, const PipelineResult& result,
                                 const Dataset& dataset) {
    ordered_json j;
    j["manifest"] = manifest_to_json(manifest);
    j["model_selection"] = ordered_json::array(
        {selection_to_json(result.outcome_report), selection_to_json(result.propensity_report)});

    ordered_json summary;
    summary["instances"] = dataset.size();
    summary["protected"] = dataset.count_protected();
    summary["marginal"] = result.marginal;
    summary["sigma_minus"] = result.ic.sigma_minus;
    summary["delta"] = result.delta;
    ordered_json cats;
    for (Category c : {Category::ExtremelyDiscriminated, Category::SlightlyDiscriminated,
                       Category::FairlyTreated, Category::SlightlyPrivileged,
                       Category::ExtremelyPrivileged, Category::Unknown}) {
        cats[to_string(c)] = result.audit.count(c);
    }
    summary["categories"] = cats;
    summary["auditable"] = result.audit.auditable_count();
    if (std::isfinite(result.put)) {
        summary["put"] = result.put;
    } else {
        summary["put"] = nullptr;
    }
    summary["subset_bound_checked"] = result.audit.subset_bound_checked;
    summary["subset_bound_violations"] = result.audit.subset_bound_violations;
    summary["propensity_clamped"] = result.ic.clamped;
    summary["explained"] = result.explanations.records.size();
    summary["explanation_skipped_few_peers"] = result.explanations.skipped_few_peers;
    j["summary"] = summary;

    ordered_json rows = ordered_json::array();
    for (const auto& r : result.audit.results) {
        ordered_json row;
        row["id"] = r.id;
        row["observed_y"] = r.observed_y;
        row["p_a"] = r.p_a;
        row["peer_count"] = r.peer_count;
        row["category"] = to_string(r.category);
        if (r.auditable()) {
            row["peer_mean"] = r.peer_mean;
            row["peer_sd"] = r.peer_sd;
            row["z"] = std::isfinite(r.z) ? ordered_json(r.z)
                                          : ordered_json(r.z > 0 ? "inf" : "-inf");
            row["p_value"] = r.p_value;
            row["peer_rejection_rate"] = r.peer_rejection_rate;
        }
        rows.push_back(std::move(row));
    }
    j["instances"] = rows;
    return j.dump(2) + "\n";
}

std::string scatter_csv(const std::vector<AuditResult>& results) {
    std::ostringstream out;
    out << "id,p_a,peer_mean,category\n";
    out.precision(17);
    for (const auto& r : results) {
        if (!r.auditable()) continue;
        out << r.id << ',' << r.p_a << ',' << r.peer_mean << ',' << to_string(r.category)
            << '\n';
    }
    return out.str();
}

std::string category_stats_csv(const std::vector<CategoryRejectionRow>& rows) {
    std::ostringstream out;
    out << "category,members,rejection_rate,peer_rejection_mean,peer_rejection_sd\n";
    out.precision(17);
    for (const auto& row : rows) {
        out << to_string(row.category) << ',' << row.members << ',' << row.rejection_rate
            << ',' << row.peer_rejection_mean << ',' << row.peer_rejection_sd << '\n';
    }
    return out.str();
}

namespace {

std::vector<AuditResult> results_from_report(const std::string& report_json) {
    ordered_json j;
    try {
        j = ordered_json::parse(report_json);
    } catch (const std::exception& e) {
        throw UsageError(std::string("report: invalid JSON: ") + e.what());
    }
    std::vector<AuditResult> results;
    for (const auto& row : j.at("instances")) {
        AuditResult r;
        r.id = row.at("id").get<std::string>();
        r.observed_y = row.at("observed_y").get<int>();
        r.p_a = row.at("p_a").get<double>();
        r.peer_count = row.at("peer_count").get<int>();
        r.category = category_from_string(row.at("category").get<std::string>());
        if (r.auditable()) {
            r.peer_mean = row.at("peer_mean").get<double>();
            r.peer_sd = row.at("peer_sd").get<double>();
            r.p_value = row.at("p_value").get<double>();
            r.peer_rejection_rate = row.at("peer_rejection_rate").get<double>();
            if (row.at("z").is_string()) {
                r.z = row.at("z").get<std::string>() == "inf"
                          ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
            } else {
                r.z = row.at("z").get<double>();
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace

std::string report_json_to_scatter_csv(const std::string& report_json) {
    return scatter_csv(results_from_report(report_json));
}

std::string report_json_to_category_csv(const std::string& report_json) {
    return category_stats_csv(category_rejection_stats(results_from_report(report_json)));
}

std::string imbalance_report_to_json(const RunManifest& manifest,
                                     const ImbalanceReport& report) {
    ordered_json j;
    j["manifest"] = manifest_to_json(manifest);
    j["baseline_omega"] = report.baseline_omega;
    j["baseline_put"] = report.baseline_put;
    j["baseline_audited"] = report.baseline_audited;
    j["levels"] = ordered_json::array();
    for (const auto& level : report.levels) {
        ordered_json jl;
        jl["omega_target"] = level.omega_target;
        jl["omega_realized"] = level.omega_realized;
        jl["repeats"] = level.repeats;
        jl["put_mean"] = level.put_mean;
        jl["put_sd"] = level.put_sd;
        jl["ior_mean"] = level.ior_mean;
        jl["ior_sd"] = level.ior_sd;
        jl["audited_mean"] = level.audited_mean;
        if (!level.note.empty()) jl["note"] = level.note;
        j["levels"].push_back(std::move(jl));
    }
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace peerfair
