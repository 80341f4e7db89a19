#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "peerfair/audit.hpp"

namespace peerfair {

// Per-feature comparison for one fairly-treated, rejected instance.
struct FeatureFlag {
    std::string feature;
    double value = 0.0;   // level-mapped value of the instance
    double q = 0.5;       // mid-rank tail probability among accepted peers
    bool worse = false;   // q <= alpha
};

struct ExplanationRecord {
    std::string id;
    std::vector<FeatureFlag> tested;
    std::string note;  // set when skipped or no eligible features
};

struct ExplanationAggregateRow {
    std::string feature;
    std::size_t flagged = 0;
    std::size_t tested = 0;
    double percent = 0.0;
};

struct ExplanationReport {
    std::vector<ExplanationRecord> records;   // explained instances only
    std::vector<ExplanationAggregateRow> aggregate;
    std::size_t eligible = 0;            // fairly treated with y = 0
    std::size_t skipped_few_peers = 0;   // < min accepted peers
    std::string note;
};

// Tests eligible features (non-intrinsic, direction != none) of one instance
// against its accepted peers. q = (#peers strictly worse + 0.5 #ties) / #peers
// on the better-is-higher scale; flag when q <= alpha. Returns nullopt when
// fewer than min_accepted peers are available.
std::optional<ExplanationRecord> explain_instance(
    const Instance& instance, const std::vector<const Instance*>& accepted_peers,
    const FeatureSchema& schema, double alpha, int min_accepted);

ExplanationReport aggregate_explanations(std::vector<ExplanationRecord> records);

// Applies the workflow gate: explanations exist only for instances with
// category FairlyTreated and observed y = 0, compared against their delta-peers
// with observed y = 1.
ExplanationReport explain_all(const Dataset& dataset, const PeerSet& peers,
                              const std::vector<AuditResult>& results,
                              const AuditConfig& config);

std::string explanations_to_csv(const ExplanationReport& report);
std::string explanation_aggregate_to_csv(const ExplanationReport& report);

}  // namespace peerfair
