#include "peerfair/pipeline.hpp"

#include <cmath>

#include "peerfair/common.hpp"

namespace peerfair {

double compute_put(const std::vector<AuditResult>& results) {
    std::size_t auditable = 0;
    std::size_t unfair = 0;
    for (const auto& r : results) {
        if (r.category == Category::Unknown) continue;
        ++auditable;
        unfair += r.category != Category::FairlyTreated ? 1 : 0;
    }
    if (auditable == 0) throw Error("compute_put: no auditable instances");
    return static_cast<double>(unfair) / static_cast<double>(auditable);
}

PipelineResult run_pipeline(const Dataset& dataset, const AuditConfig& config,
                            const PipelineOptions& options) {
    config.validate();

    auto [train, test] = split(dataset, config.train_fraction, config.seed);

    PipelineResult out;
    // Encoding layout and standardization statistics come from the training
    // split only; the same encoder scores every instance afterwards.
    out.encoder = Encoder::fit(train);

    auto fit_role = [&](ModelTarget target, std::optional<double> fixed_strength)
        -> std::pair<ProbabilityModel, ModelSelectionReport> {
        const std::vector<double> grid =
            fixed_strength ? std::vector<double>{*fixed_strength} : config.strength_grid;
        auto fitted = select_model(train, out.encoder, target, grid, config.cv_folds,
                                   derive_seed(config.seed, target == ModelTarget::Outcome
                                                                ? 0xF00Dull
                                                                : 0x9E0Full));
        // Held-out AUC on the test split, for the selection report.
        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(test.size());
        labels.reserve(test.size());
        for (const auto& inst : test.instances()) {
            scores.push_back(fitted.first.predict(out.encoder, inst));
            labels.push_back(target == ModelTarget::Outcome ? inst.y
                                                            : (inst.is_protected ? 1 : 0));
        }
        try {
            fitted.second.test_auc = auc(scores, labels);
        } catch (const Error&) {
            // single-class test split: leave NaN
        }
        return fitted;
    };

    std::tie(out.outcome_model, out.outcome_report) =
        fit_role(ModelTarget::Outcome, options.fixed_outcome_strength);
    std::tie(out.propensity_model, out.propensity_report) =
        fit_role(ModelTarget::Protected, options.fixed_propensity_strength);

    // The marginal and the coefficients are whole-dataset quantities; every
    // instance is audited, including training ones.
    out.marginal = compute_marginal(dataset);
    out.ic = compute_ic(dataset, out.encoder, out.propensity_model, out.marginal);
    out.delta = config.delta_abs ? *config.delta_abs
                                 : resolve_delta(out.ic, config.delta_multiplier);
    out.peers = identify_peers(out.ic, out.delta, config.min_peers);
    out.audit = audit_all(dataset, out.encoder, out.outcome_model, out.ic, out.peers,
                          config, options.threads);
    if (options.run_explanations) {
        out.explanations = explain_all(dataset, out.peers, out.audit.results, config);
    }
    try {
        out.put = compute_put(out.audit.results);
    } catch (const Error&) {
        out.put = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace peerfair
