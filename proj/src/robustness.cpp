#include "peerfair/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "peerfair/common.hpp"

namespace peerfair {

Dataset undersample_to_omega(const Dataset& dataset, double target_omega,
                             std::uint64_t seed) {
    if (!(target_omega > 0.0 && target_omega < 1.0)) {
        throw UsageError("undersample: target omega must be inside (0,1)");
    }
    const std::size_t n_protected = dataset.count_protected();
    const std::size_t n_unprotected = dataset.count_unprotected();
    const double current =
        static_cast<double>(n_protected) / static_cast<double>(dataset.size());
    if (target_omega > current) {
        throw Error("undersample: target omega above the current protected share; "
                    "only under-sampling of the protected group is supported");
    }

    // Keep m protected rows so that m / (m + u) is as close to the target as a
    // single instance allows; u is untouched.
    const double u = static_cast<double>(n_unprotected);
    const double exact = target_omega * u / (1.0 - target_omega);
    std::size_t keep = 0;
    double best = std::numeric_limits<double>::infinity();
    for (double candidate : {std::floor(exact), std::ceil(exact)}) {
        if (candidate < 0.0) continue;
        const auto m = static_cast<std::size_t>(candidate);
        if (m > n_protected) continue;
        const double omega = static_cast<double>(m) / (static_cast<double>(m) + u);
        if (std::abs(omega - target_omega) < best) {
            best = std::abs(omega - target_omega);
            keep = m;
        }
    }
    if (keep < 50) {
        throw Error("undersample: target omega leaves fewer than 50 protected instances");
    }
    if (keep == n_protected) return dataset;  // target equals the current share

    std::vector<std::size_t> protected_idx;
    protected_idx.reserve(n_protected);
    std::vector<std::size_t> kept_idx;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.instance(i).is_protected) {
            protected_idx.push_back(i);
        } else {
            kept_idx.push_back(i);
        }
    }
    Rng rng(derive_seed(seed, 0x5A3D1Eull));
    rng.shuffle(protected_idx);
    kept_idx.insert(kept_idx.end(), protected_idx.begin(),
                    protected_idx.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(kept_idx.begin(), kept_idx.end());
    return dataset.subset(kept_idx);
}

double compute_ior(const std::vector<AuditResult>& baseline,
                   const std::vector<AuditResult>& variant, bool five_way) {
    std::map<std::string, Category> baseline_cat;
    for (const auto& r : baseline) {
        if (r.auditable()) baseline_cat.emplace(r.id, r.category);
    }
    std::size_t common = 0;
    std::size_t unchanged = 0;
    for (const auto& r : variant) {
        if (!r.auditable()) continue;
        auto it = baseline_cat.find(r.id);
        if (it == baseline_cat.end()) continue;
        ++common;
        const bool same = five_way ? r.category == it->second
                                   : coarse(r.category) == coarse(it->second);
        unchanged += same ? 1 : 0;
    }
    if (common == 0) {
        throw Error("compute_ior: no commonly audited instances between the runs");
    }
    return static_cast<double>(unchanged) / static_cast<double>(common);
}

ImbalanceReport run_imbalance_study(const Dataset& dataset, const AuditConfig& config,
                                    const ImbalanceOptions& options) {
    if (options.repeats < 1) throw UsageError("imbalance: repeats must be >= 1");
    if (options.omegas.empty()) throw UsageError("imbalance: no target omegas");

    PipelineOptions pipeline_options;
    pipeline_options.threads = options.threads;
    pipeline_options.run_explanations = false;

    const PipelineResult baseline = run_pipeline(dataset, config, pipeline_options);

    ImbalanceReport report;
    report.baseline_omega = baseline.marginal;
    report.baseline_put = baseline.put;
    report.baseline_audited = baseline.audit.auditable_count();

    for (std::size_t level_idx = 0; level_idx < options.omegas.size(); ++level_idx) {
        const double target = options.omegas[level_idx];
        ImbalanceLevel level;
        level.omega_target = target;
        std::vector<double> puts, iors, omegas;
        std::size_t audited_sum = 0;
        for (int rep = 0; rep < options.repeats; ++rep) {
            try {
                Dataset variant_data = undersample_to_omega(
                    dataset, target,
                    derive_seed(config.seed, 0x01BAull + level_idx,
                                static_cast<std::uint64_t>(rep)));
                AuditConfig variant_config = config;
                // Per-variant seed: each repeat is an independent end-to-end run.
                variant_config.seed =
                    derive_seed(config.seed, 0x5EEDull + level_idx,
                                static_cast<std::uint64_t>(rep));
                if (options.freeze_delta) variant_config.delta_abs = baseline.delta;
                PipelineOptions variant_options = pipeline_options;
                if (options.reuse_hyperparams) {
                    variant_options.fixed_outcome_strength =
                        baseline.outcome_report.chosen_strength;
                    variant_options.fixed_propensity_strength =
                        baseline.propensity_report.chosen_strength;
                }
                const PipelineResult variant =
                    run_pipeline(variant_data, variant_config, variant_options);
                puts.push_back(variant.put);
                iors.push_back(compute_ior(baseline.audit.results, variant.audit.results,
                                           options.five_way));
                omegas.push_back(variant.marginal);
                audited_sum += variant.audit.auditable_count();
            } catch (const Error& e) {
                level.note = e.what();
                break;
            }
        }
        if (puts.empty()) {
            if (level.note.empty()) level.note = "skipped";
            report.levels.push_back(std::move(level));
            continue;
        }
        level.repeats = static_cast<int>(puts.size());
        level.put_mean = mean(puts);
        level.put_sd = sample_sd(puts);
        level.ior_mean = mean(iors);
        level.ior_sd = sample_sd(iors);
        level.omega_realized = mean(omegas);
        level.audited_mean = audited_sum / puts.size();
        if (puts.size() == 1 && level.note.empty()) {
            level.note = "single repeat: sd reported as 0";
        }
        report.levels.push_back(std::move(level));
    }
    return report;
}

std::string imbalance_to_csv(const ImbalanceReport& report) {
    std::ostringstream out;
    out << "omega,put_mean,put_sd,ior_mean,ior_sd\n";
    out.precision(17);
    for (const auto& level : report.levels) {
        if (level.repeats == 0) continue;
        out << level.omega_target << ',' << level.put_mean << ',' << level.put_sd << ','
            << level.ior_mean << ',' << level.ior_sd << '\n';
    }
    return out.str();
}

}  // namespace peerfair
