#include <doctest.h>

#include <cmath>
#include <set>

#include "peerfair/common.hpp"
#include "peerfair/explain.hpp"
#include "peerfair/pipeline.hpp"
#include "peerfair/synth.hpp"
#include "test_util.hpp"

using namespace peerfair;
using namespace peerfair::testutil;

namespace {

std::vector<const Instance*> pointers(const std::vector<Instance>& v) {
    std::vector<const Instance*> out;
    for (const auto& inst : v) out.push_back(&inst);
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("explain");

TEST_CASE("all-tied feature gives q = 0.5 and no flag") {
    FeatureSchema schema = small_schema();
    Instance inst = make_instance("a", {1, 0, 1, 2.0}, true, 0);
    std::vector<Instance> peers(20, make_instance("p", {1, 0, 1, 2.0}, false, 1));
    auto record = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    REQUIRE(record.has_value());
    // Eligible: flag_a (higher), grade (higher), amount (higher); flag_b is intrinsic.
    REQUIRE(record->tested.size() == 3);
    for (const auto& flag : record->tested) {
        CHECK(flag.q == 0.5);
        CHECK_FALSE(flag.worse);
    }
}

TEST_CASE("instance strictly worse than every peer gives q = 0") {
    FeatureSchema schema = small_schema();
    Instance inst = make_instance("a", {0, 0, 0, 1.0}, true, 0);
    std::vector<Instance> peers;
    for (int i = 0; i < 40; ++i) {
        peers.push_back(make_instance("p" + std::to_string(i), {1, 0, 2, 5.0}, false, 1));
    }
    auto record = explain_instance(inst, pointers(peers), schema, 1e-9, 10);
    REQUIRE(record.has_value());
    for (const auto& flag : record->tested) {
        CHECK(flag.q == 0.0);
        CHECK(flag.worse);  // flagged at any alpha
    }
}

TEST_CASE("direction lower counts high values as worse") {
    FeatureSchema schema = small_schema();
    schema.features[1].intrinsic = false;  // flag_b: better when lower
    Instance inst = make_instance("a", {1, 1, 2, 5.0}, true, 0);
    std::vector<Instance> peers;
    for (int i = 0; i < 20; ++i) {
        peers.push_back(make_instance("p" + std::to_string(i), {1, 0, 2, 5.0}, false, 1));
    }
    auto record = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    REQUIRE(record.has_value());
    const auto& flag_b = record->tested[1];
    CHECK(flag_b.feature == "flag_b");
    CHECK(flag_b.q == 0.0);  // value 1 is worse than every peer's 0
    CHECK(flag_b.worse);
}

TEST_CASE("flipping better_direction flips q to 1 - q") {
    FeatureSchema schema = small_schema();
    Rng rng(4);
    Instance inst = make_instance("a", {1, 0, 1, 0.3}, true, 0);
    std::vector<Instance> peers;
    for (int i = 0; i < 25; ++i) {
        peers.push_back(make_instance("p" + std::to_string(i),
                                      {rng.bernoulli(0.5) ? 1.0 : 0.0, 0,
                                       static_cast<double>(rng.uniform_int(3)),
                                       rng.normal()},
                                      false, 1));
    }
    auto up = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    schema.features[0].better = Direction::Lower;
    schema.features[2].better = Direction::Lower;
    schema.features[3].better = Direction::Lower;
    auto down = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    REQUIRE(up.has_value());
    REQUIRE(down.has_value());
    for (std::size_t f = 0; f < up->tested.size(); ++f) {
        CHECK(up->tested[f].q + down->tested[f].q == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("q is invariant under order-preserving ordinal relabeling") {
    FeatureSchema schema = small_schema();
    Instance inst = make_instance("a", {0, 0, 1, 0.0}, true, 0);
    std::vector<Instance> peers;
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
        peers.push_back(make_instance("p" + std::to_string(i),
                                      {0, 0, static_cast<double>(rng.uniform_int(3)), 0.0},
                                      false, 1));
    }
    auto before = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    // Relabel ordinal ranks {0,1,2} -> {0,10,20}: order preserved.
    Instance inst2 = inst;
    inst2.x[2] *= 10.0;
    std::vector<Instance> peers2 = peers;
    for (auto& p : peers2) p.x[2] *= 10.0;
    auto after = explain_instance(inst2, pointers(peers2), schema, 0.05, 10);
    REQUIRE(before.has_value());
    REQUIRE(after.has_value());
    CHECK(before->tested[1].q == after->tested[1].q);
}

TEST_CASE("too few accepted peers skips the instance") {
    FeatureSchema schema = small_schema();
    Instance inst = make_instance("a", {1, 0, 1, 2.0}, true, 0);
    std::vector<Instance> peers(9, make_instance("p", {1, 0, 1, 2.0}, false, 1));
    CHECK_FALSE(explain_instance(inst, pointers(peers), schema, 0.05, 10).has_value());
}

TEST_CASE("no eligible features yields an annotated empty record") {
    FeatureSchema schema = small_schema();
    for (auto& f : schema.features) f.intrinsic = true;
    Instance inst = make_instance("a", {1, 0, 1, 2.0}, true, 0);
    std::vector<Instance> peers(12, make_instance("p", {1, 0, 1, 2.0}, false, 1));
    auto record = explain_instance(inst, pointers(peers), schema, 0.05, 10);
    REQUIRE(record.has_value());
    CHECK(record->tested.empty());
    CHECK(record->note == "no eligible features");
}

TEST_CASE("aggregation computes per-feature percentages") {
    std::vector<ExplanationRecord> records(4);
    for (std::size_t i = 0; i < 4; ++i) {
        records[i].id = "r" + std::to_string(i);
        FeatureFlag f;
        f.feature = "risk";
        f.worse = i < 3;  // flagged in 3 of 4
        records[i].tested.push_back(f);
    }
    auto report = aggregate_explanations(records);
    REQUIRE(report.aggregate.size() == 1);
    CHECK(report.aggregate[0].percent == 75.0);
    CHECK(report.aggregate[0].flagged == 3);
    CHECK(report.aggregate[0].tested == 4);
}

TEST_CASE("zero explained instances produce an explicit note") {
    auto report = aggregate_explanations({});
    CHECK(report.records.empty());
    CHECK(report.aggregate.empty());
    CHECK(report.note == "no explained instances");
}

TEST_CASE("gating: only fairly-treated rejections are explained") {
    auto [ds, truth] = generate(SynthSpec::sme_preset(1500, 37));
    AuditConfig config;
    config.seed = 7;
    // Dispersion keeps a healthy fairly-treated share for the gate to act on.
    config.test_statistic = TestStatistic::Dispersion;
    PipelineResult result = run_pipeline(ds, config);
    std::set<std::string> explained_ids;
    for (const auto& record : result.explanations.records) {
        explained_ids.insert(record.id);
    }
    for (const auto& r : result.audit.results) {
        const bool eligible = r.category == Category::FairlyTreated && r.observed_y == 0;
        if (!eligible) CHECK(explained_ids.count(r.id) == 0);
    }
    CHECK(result.explanations.eligible >=
          result.explanations.records.size() + result.explanations.skipped_few_peers);
}

TEST_CASE("planted degradation is recovered in the aggregate") {
    // Cohort built directly: every explained instance is degraded on one
    // ordinal feature only; all other features tie with the peers.
    FeatureSchema schema = small_schema();
    std::vector<ExplanationRecord> records;
    Rng rng(13);
    for (int i = 0; i < 25; ++i) {
        Instance inst = make_instance("e" + std::to_string(i), {1, 0, 0, 2.0}, true, 0);
        std::vector<Instance> peers;
        for (int j = 0; j < 40; ++j) {
            // Peers share flag_a and amount, but hold better grades.
            peers.push_back(make_instance("p" + std::to_string(j),
                                          {1, 0, 1.0 + (j % 2), 2.0}, false, 1));
        }
        auto record = explain_instance(inst, pointers(peers), schema, 0.05, 10);
        REQUIRE(record.has_value());
        records.push_back(std::move(*record));
    }
    auto report = aggregate_explanations(std::move(records));
    for (const auto& row : report.aggregate) {
        if (row.feature == "grade") {
            CHECK(row.percent >= 80.0);
        } else {
            CHECK(row.percent < 20.0);
        }
    }
}

TEST_CASE("explanation CSV layouts") {
    std::vector<ExplanationRecord> records(1);
    records[0].id = "x";
    FeatureFlag f;
    f.feature = "risk";
    f.value = 2;
    f.q = 0.01;
    f.worse = true;
    records[0].tested.push_back(f);
    auto report = aggregate_explanations(std::move(records));
    CHECK(explanations_to_csv(report).rfind("instance_id,feature,value,q,flagged\n", 0) == 0);
    CHECK(explanation_aggregate_to_csv(report).rfind("feature,percent_flagged,flagged,tested\n",
                                                     0) == 0);
}

TEST_SUITE_END();
