#include <doctest.h>

#include <filesystem>
#include <set>

#include "peerfair/common.hpp"
#include "peerfair/encoder.hpp"
#include "peerfair/synth.hpp"
#include "test_util.hpp"

using namespace peerfair;
using namespace peerfair::testutil;

namespace {

// 10 features so missing-cell percentages are easy to read.
FeatureSchema ten_feature_schema() {
    FeatureSchema schema;
    schema.protected_column = "group";
    schema.protected_value = "p";
    schema.outcome_column = "outcome";
    schema.favourable_value = "yes";
    for (int i = 0; i < 10; ++i) {
        FeatureSpec f;
        f.name = "f" + std::to_string(i);
        f.kind = FeatureKind::Binary;
        f.levels = {"no", "yes"};
        schema.features.push_back(f);
    }
    return schema;
}

std::string ten_feature_header() {
    std::string h;
    for (int i = 0; i < 10; ++i) h += "f" + std::to_string(i) + ",";
    return h + "group,outcome\n";
}

std::string full_row(const std::string& group, const std::string& outcome) {
    std::string r;
    for (int i = 0; i < 10; ++i) r += "yes,";
    return r + group + "," + outcome + "\n";
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("rows beyond the 20% missing threshold are dropped") {
    std::string csv = ten_feature_header();
    csv += full_row("p", "yes");
    csv += ",,,yes,yes,yes,yes,yes,yes,yes,p,no\n";   // 30% missing -> dropped
    csv += ",,yes,yes,yes,yes,yes,yes,yes,yes,u,yes\n";  // exactly 20% -> kept
    csv += full_row("u", "no");

    LoadStats stats;
    Dataset ds = load_dataset_text(csv, ten_feature_schema(), &stats);
    CHECK(ds.size() == 3);
    CHECK(stats.rows_read == 4);
    CHECK(stats.rows_dropped_missing == 1);
    CHECK(stats.cells_imputed == 2);
}

TEST_CASE("categorical gaps are imputed with the mode, continuous with the median") {
    // Ten features so two missing cells stay at the 20% threshold.
    FeatureSchema schema = ten_feature_schema();
    schema.features[9].kind = FeatureKind::Continuous;
    schema.features[9].levels.clear();
    std::string csv = ten_feature_header();
    auto row = [](const std::string& f0, const std::string& amount,
                  const std::string& group, const std::string& outcome) {
        return f0 + ",yes,yes,yes,yes,yes,yes,yes,yes," + amount + "," + group + "," +
               outcome + "\n";
    };
    csv += row("yes", "1.0", "p", "yes");
    csv += row("yes", "2.0", "p", "no");
    csv += row("no", "9.0", "u", "yes");
    csv += row("", "", "u", "yes");  // both gaps imputed
    LoadStats stats;
    Dataset ds = load_dataset_text(csv, schema, &stats);
    REQUIRE(ds.size() == 4);
    CHECK(stats.cells_imputed == 2);
    // mode of f0 is "yes" (2 of 3), median of the continuous column is 2.0
    CHECK(ds.instance(3).x[0] == 1.0);
    CHECK(ds.instance(3).x[9] == 2.0);
}

TEST_CASE("ingestion diagnostics are distinct") {
    auto schema = ten_feature_schema();
    SUBCASE("missing column") {
        std::string csv = "f0,group,outcome\nyes,p,yes\n";
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("missing column"), UsageError);
    }
    SUBCASE("duplicate column") {
        std::string csv = "f0," + ten_feature_header();
        csv += "yes," + full_row("p", "yes");
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("duplicate column"), UsageError);
    }
    SUBCASE("unknown categorical level") {
        std::string csv = ten_feature_header();
        csv += full_row("p", "yes");
        csv += "maybe,yes,yes,yes,yes,yes,yes,yes,yes,yes,u,no\n";
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("unknown level"), UsageError);
    }
    SUBCASE("protected column non-binary") {
        std::string csv = ten_feature_header();
        csv += full_row("p", "yes");
        csv += full_row("u", "no");
        csv += full_row("w", "yes");
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("protected column"), UsageError);
    }
    SUBCASE("outcome column non-binary") {
        std::string csv = ten_feature_header();
        csv += full_row("p", "yes");
        csv += full_row("u", "no");
        csv += full_row("u", "maybe");
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("outcome column"), UsageError);
    }
    SUBCASE("empty after filtering") {
        std::string csv = ten_feature_header();
        csv += ",,,,,,,,,,p,yes\n";
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, schema, nullptr),
                             doctest::Contains("empty after ingestion"), Error);
    }
    SUBCASE("duplicate ids") {
        auto s2 = small_schema();
        std::string csv =
            "id,flag_a,flag_b,grade,amount,group,outcome\n"
            "a,yes,no,low,1.0,p,yes\n"
            "a,no,no,mid,2.0,u,no\n";
        CHECK_THROWS_WITH_AS(load_dataset_text(csv, s2, nullptr),
                             doctest::Contains("duplicate instance id"), Error);
    }
}

TEST_CASE("ingestion is idempotent on a clean dataset") {
    auto [ds, truth] = generate(SynthSpec::null_preset(300, 11));
    const std::string csv = dataset_to_csv(ds);
    LoadStats stats;
    Dataset again = load_dataset_text(csv, ds.schema(), &stats);
    CHECK(stats.rows_dropped_missing == 0);
    CHECK(stats.rows_dropped_unusable == 0);
    CHECK(stats.cells_imputed == 0);
    CHECK(again.size() == ds.size());
}

TEST_CASE("generate -> write -> load round-trips the encoded matrix exactly") {
    auto [ds, truth] = generate(SynthSpec::sme_preset(500, 3));
    Dataset reloaded = load_dataset_text(dataset_to_csv(ds), ds.schema(), nullptr);
    REQUIRE(reloaded.size() == ds.size());
    Encoder enc = Encoder::fit(ds);
    Eigen::MatrixXd a = enc.design(ds, true);
    Eigen::MatrixXd b = enc.design(reloaded, true);
    CHECK(a == b);  // bit-identical: levels and %.17g continuous round-trip
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds.instance(i).id == reloaded.instance(i).id);
        CHECK(ds.instance(i).y == reloaded.instance(i).y);
        CHECK(ds.instance(i).is_protected == reloaded.instance(i).is_protected);
    }
}

TEST_CASE("encoding is bijective on observed instances") {
    auto [ds, truth] = generate(SynthSpec::sme_preset(400, 5));
    Encoder enc = Encoder::fit(ds);
    for (const auto& inst : ds.instances()) {
        const auto decoded = enc.decode(enc.encode(inst, false));
        REQUIRE(decoded.size() == inst.x.size());
        for (std::size_t f = 0; f < decoded.size(); ++f) {
            if (ds.schema().feature(f).is_categorical()) {
                CHECK(decoded[f] == inst.x[f]);
            } else {
                CHECK(decoded[f] == doctest::Approx(inst.x[f]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("quoted CSV fields survive a write/load cycle") {
    FeatureSchema schema;
    schema.protected_column = "group";
    schema.protected_value = "p";
    schema.outcome_column = "outcome";
    schema.favourable_value = "yes";
    FeatureSpec f;
    f.name = "notes";
    f.kind = FeatureKind::Nominal;
    f.levels = {"ok", "has,comma", "has \"quote\""};
    schema.features = {f};
    std::string csv =
        "notes,group,outcome\n"
        "ok,p,yes\n"
        "\"has,comma\",u,no\n"
        "\"has \"\"quote\"\"\",u,yes\n";
    Dataset ds = load_dataset_text(csv, schema, nullptr);
    REQUIRE(ds.size() == 3);
    CHECK(ds.instance(1).x[0] == 1.0);
    CHECK(ds.instance(2).x[0] == 2.0);
    Dataset again = load_dataset_text(dataset_to_csv(ds), ds.schema(), nullptr);
    CHECK(again.instance(1).x[0] == 1.0);
    CHECK(again.instance(2).x[0] == 2.0);
}

TEST_CASE("split is a stratified partition") {
    auto [ds, truth] = generate(SynthSpec::sme_preset(1000, 7));
    auto [train, test] = split(ds, 0.8, 42);
    CHECK(train.size() + test.size() == ds.size());

    std::set<std::string> seen;
    for (const auto& inst : train.instances()) seen.insert(inst.id);
    for (const auto& inst : test.instances()) {
        CHECK(seen.insert(inst.id).second);  // disjoint
    }
    CHECK(seen.size() == ds.size());  // union covers everything

    // Stratum proportions preserved within one instance per (s, y) cell.
    auto count_cell = [](const Dataset& d, bool s, int y) {
        std::size_t n = 0;
        for (const auto& inst : d.instances()) {
            n += inst.is_protected == s && inst.y == y ? 1 : 0;
        }
        return n;
    };
    for (bool s : {false, true}) {
        for (int y : {0, 1}) {
            const double total = static_cast<double>(count_cell(ds, s, y));
            const double got = static_cast<double>(count_cell(train, s, y));
            CHECK(std::abs(got - 0.8 * total) <= 1.0);
        }
    }

    // Outcome rates within two points of the full-dataset rate.
    const double overall =
        static_cast<double>(ds.count_favourable()) / static_cast<double>(ds.size());
    const double train_rate =
        static_cast<double>(train.count_favourable()) / static_cast<double>(train.size());
    const double test_rate =
        static_cast<double>(test.count_favourable()) / static_cast<double>(test.size());
    CHECK(std::abs(train_rate - overall) < 0.02);
    CHECK(std::abs(test_rate - overall) < 0.02);
}

TEST_CASE("split is deterministic per seed") {
    auto [ds, truth] = generate(SynthSpec::null_preset(400, 9));
    auto [a_train, a_test] = split(ds, 0.8, 7);
    auto [b_train, b_test] = split(ds, 0.8, 7);
    REQUIRE(a_train.size() == b_train.size());
    for (std::size_t i = 0; i < a_train.size(); ++i) {
        CHECK(a_train.instance(i).id == b_train.instance(i).id);
    }
    auto [c_train, c_test] = split(ds, 0.8, 8);
    bool identical = c_train.size() == a_train.size();
    if (identical) {
        identical = false;
        for (std::size_t i = 0; i < a_train.size(); ++i) {
            if (a_train.instance(i).id != c_train.instance(i).id) {
                identical = false;
                break;
            }
            identical = true;
        }
    }
    CHECK_FALSE(identical);
}

TEST_CASE("split rejects strata too small to reach both parts") {
    FeatureSchema schema = small_schema();
    std::vector<Instance> rows;
    rows.push_back(make_instance("a", {0, 0, 0, 1.0}, true, 1));
    rows.push_back(make_instance("b", {0, 0, 0, 1.0}, true, 1));
    rows.push_back(make_instance("c", {0, 0, 0, 1.0}, false, 0));  // lone (u, 0)
    rows.push_back(make_instance("d", {0, 0, 0, 1.0}, false, 1));
    rows.push_back(make_instance("e", {0, 0, 0, 1.0}, false, 1));
    Dataset ds(schema, rows);
    CHECK_THROWS_AS(split(ds, 0.8, 1), Error);
}

TEST_SUITE_END();
