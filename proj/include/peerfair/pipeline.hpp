#pragma once

#include <memory>

#include "peerfair/audit.hpp"
#include "peerfair/explain.hpp"

namespace peerfair {

struct PipelineOptions {
    int threads = 1;  // 0 = hardware concurrency; not part of run identity
    // Skip grid search and reuse previously selected strengths (imbalance
    // study option).
    std::optional<double> fixed_outcome_strength;
    std::optional<double> fixed_propensity_strength;
    bool run_explanations = true;
};

// One end-to-end audit: split, select f and g, identification coefficients,
// delta, peers, per-instance tests, explanation gate.
struct PipelineResult {
    Encoder encoder;
    ProbabilityModel outcome_model;
    ProbabilityModel propensity_model;
    ModelSelectionReport outcome_report;
    ModelSelectionReport propensity_report;
    double marginal = 0.0;
    ICTable ic;
    double delta = 0.0;
    PeerSet peers;
    AuditRun audit;
    ExplanationReport explanations;
    double put = 0.0;  // unfair / auditable; NaN when nothing is auditable
};

PipelineResult run_pipeline(const Dataset& dataset, const AuditConfig& config,
                            const PipelineOptions& options = {});

// (#categories outside {FairlyTreated, Unknown}) / (#categories != Unknown).
double compute_put(const std::vector<AuditResult>& results);

}  // namespace peerfair
