#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "peerfair/dataset.hpp"

namespace peerfair {

// Generator column: distribution parameters plus its contribution to the
// group-membership logit (gamma) and the outcome logit (beta). Categorical
// features enter both logits through their level rank.
struct SynthFeature {
    FeatureSpec spec;
    std::vector<double> probs;  // categorical level probabilities, sums to 1
    double mean = 0.0;          // continuous
    double sd = 1.0;
    double gamma = 0.0;
    double beta = 0.0;
};

struct SynthSpec {
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<SynthFeature> features;
    double gamma_intercept = 0.0;
    double beta_intercept = 0.0;
    double direct_bias = 0.0;  // added to the outcome logit when s = s_minus

    std::string protected_column = "group";
    std::string protected_value = "protected";
    std::string unprotected_value = "unprotected";
    std::string outcome_column = "outcome";
    std::string favourable_value = "yes";
    std::string unfavourable_value = "no";
    std::string id_column = "id";

    FeatureSchema schema() const;
    void validate() const;

    std::string to_json_text() const;
    static SynthSpec from_json_text(const std::string& text);
    static SynthSpec from_json_file(const std::filesystem::path& path);

    // Survey-shaped preset: 15 mostly categorical features, group share
    // ~41.3%, favourable rate ~81.5% at n = 4159.
    static SynthSpec sme_preset(int n = 4159, std::uint64_t seed = 1);
    // No group signal anywhere: gamma = 0, direct_bias = 0, mild outcome betas.
    static SynthSpec null_preset(int n, std::uint64_t seed);
    // Null features with a direct outcome penalty b (logit) for the protected group.
    static SynthSpec bias_preset(int n, double direct_bias, std::uint64_t seed);
};

// True conditional probabilities per instance under both group assignments.
struct GroundTruth {
    std::vector<std::string> ids;
    std::vector<double> p_minus;  // P(Y=1 | x, s_minus)
    std::vector<double> p_plus;   // P(Y=1 | x, s_plus)
};

std::pair<Dataset, GroundTruth> generate(const SynthSpec& spec);

struct OracleGapSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double max = 0.0;
};

// Forward declared here to avoid a header cycle; defined in audit.hpp.
struct AuditResult;

// Per auditable instance: |peer_mean - true P(Y=1 | x, s_plus)|.
OracleGapSummary oracle_gap(const GroundTruth& truth,
                            const std::vector<AuditResult>& results);

std::string truth_to_csv(const GroundTruth& truth);
void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace peerfair
