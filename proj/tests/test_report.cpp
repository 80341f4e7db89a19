#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "peerfair/common.hpp"
#include "peerfair/report.hpp"
#include "peerfair/synth.hpp"

#include <json.hpp>

using namespace peerfair;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("report");

TEST_CASE("fingerprints are stable and content sensitive") {
    CHECK(fingerprint_bytes("abc") == fingerprint_bytes("abc"));
    CHECK(fingerprint_bytes("abc") != fingerprint_bytes("abd"));
    CHECK(fingerprint_bytes("").size() == 16);
}

TEST_CASE("timestamp honours SOURCE_DATE_EPOCH") {
    setenv("SOURCE_DATE_EPOCH", "0", 1);
    CHECK(iso_utc_timestamp() == "1970-01-01T00:00:00Z");
    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    CHECK(iso_utc_timestamp() == "2023-11-14T22:13:20Z");
    unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("audit report document carries manifest, summary and instances") {
    auto [ds, truth] = generate(SynthSpec::sme_preset(900, 2));
    AuditConfig config;
    config.seed = 2;
    PipelineResult result = run_pipeline(ds, config);
    RunManifest manifest = make_manifest(config, "feeddeadbeef0123", "0123feeddeadbeef");
    const std::string text = audit_report_to_json(manifest, result, ds);

    auto j = nlohmann::json::parse(text);
    CHECK(j.at("manifest").at("seed") == 2);
    CHECK(j.at("manifest").at("dataset_fingerprint") == "feeddeadbeef0123");
    CHECK(j.at("manifest").at("config").at("n_subsets") == 100);
    CHECK(j.at("summary").at("categories").size() == 6);
    CHECK(j.at("instances").size() == ds.count_protected());
    std::size_t with_stats = 0;
    for (const auto& row : j.at("instances")) {
        if (row.contains("peer_mean")) {
            ++with_stats;
        } else {
            CHECK(row.at("category") == "unknown");
        }
    }
    CHECK(with_stats == j.at("summary").at("auditable").get<std::size_t>());

    // Round-trip through the projection helpers.
    const std::string scatter = report_json_to_scatter_csv(text);
    CHECK(scatter.rfind("id,p_a,peer_mean,category\n", 0) == 0);
    CHECK(std::count(scatter.begin(), scatter.end(), '\n') ==
          static_cast<long>(with_stats) + 1);
    const std::string cats = report_json_to_category_csv(text);
    CHECK(cats.rfind("category,members,", 0) == 0);
}

TEST_CASE("imbalance report JSON carries levels") {
    AuditConfig config;
    RunManifest manifest = make_manifest(config, "aa", "bb");
    ImbalanceReport report;
    report.baseline_omega = 0.41;
    report.baseline_put = 0.9;
    ImbalanceLevel level;
    level.omega_target = 0.31;
    level.repeats = 5;
    level.put_mean = 0.88;
    level.ior_mean = 0.95;
    report.levels.push_back(level);
    auto j = nlohmann::json::parse(imbalance_report_to_json(manifest, report));
    CHECK(j.at("levels").size() == 1);
    CHECK(j.at("levels")[0].at("ior_mean") == 0.95);
}

TEST_CASE("text file round-trip") {
    const fs::path path = fs::temp_directory_path() / "peerfair_report_test.txt";
    write_text_file(path, "hello\n");
    CHECK(read_text_file(path) == "hello\n");
    fs::remove(path);
    CHECK_THROWS_AS(read_text_file(path), UsageError);
}

TEST_SUITE_END();
