#pragma once

#include "peerfair/pipeline.hpp"

namespace peerfair {

// Uniformly removes protected instances (unprotected rows untouched) until the
// protected share is within one instance of target_omega.
Dataset undersample_to_omega(const Dataset& dataset, double target_omega,
                             std::uint64_t seed);

// Fraction of commonly audited instances (non-Unknown in both runs) whose
// label is unchanged; three-way by default, five-way on request.
double compute_ior(const std::vector<AuditResult>& baseline,
                   const std::vector<AuditResult>& variant, bool five_way = false);

struct ImbalanceLevel {
    double omega_target = 0.0;
    double omega_realized = 0.0;  // mean over repeats
    double put_mean = 0.0;
    double put_sd = 0.0;
    double ior_mean = 0.0;
    double ior_sd = 0.0;
    int repeats = 0;
    std::size_t audited_mean = 0;
    std::string note;  // set when skipped or repeats == 1
};

struct ImbalanceReport {
    double baseline_omega = 0.0;
    double baseline_put = 0.0;
    std::size_t baseline_audited = 0;
    std::vector<ImbalanceLevel> levels;
};

struct ImbalanceOptions {
    std::vector<double> omegas;  // targets, each below the baseline omega
    int repeats = 5;
    bool freeze_delta = false;       // reuse the baseline delta in variants
    bool reuse_hyperparams = false;  // skip grid search in variants
    bool five_way = false;           // IOR over the full five-way labels
    int threads = 1;
};

// Baseline audit plus one full pipeline run per (omega, repeat); PUT and IOR
// aggregated per level.
ImbalanceReport run_imbalance_study(const Dataset& dataset, const AuditConfig& config,
                                    const ImbalanceOptions& options);

std::string imbalance_to_csv(const ImbalanceReport& report);

}  // namespace peerfair
