#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "peerfair/pipeline.hpp"
#include "peerfair/robustness.hpp"

namespace peerfair {

inline constexpr const char* kVersion = "0.1.0";

// Reproducibility envelope embedded in every output document. Two runs with
// equal manifests produce byte-identical per-instance results; the worker
// thread count is deliberately excluded.
struct RunManifest {
    std::string version;
    std::string created_at;        // ISO-8601 UTC; honours SOURCE_DATE_EPOCH
    std::string dataset_fingerprint;
    std::string schema_fingerprint;
    std::uint64_t seed = 0;
    AuditConfig config;
};

RunManifest make_manifest(const AuditConfig& config, const std::string& dataset_fingerprint,
                          const std::string& schema_fingerprint);

std::string fingerprint_bytes(const std::string& bytes);
std::string fingerprint_file(const std::filesystem::path& path);
std::string iso_utc_timestamp();  // SOURCE_DATE_EPOCH override, else now

// Full audit report document (manifest + summary + per-instance records).
std::string audit_report_to_json(const RunManifest& manifest, const PipelineResult& result,
                                 const Dataset& dataset);

// Projections used by the report subcommand; operate on the JSON document.
std::string report_json_to_scatter_csv(const std::string& report_json);
std::string report_json_to_category_csv(const std::string& report_json);

std::string scatter_csv(const std::vector<AuditResult>& results);
std::string category_stats_csv(const std::vector<CategoryRejectionRow>& rows);

std::string imbalance_report_to_json(const RunManifest& manifest,
                                     const ImbalanceReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace peerfair
