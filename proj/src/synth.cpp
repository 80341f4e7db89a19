#include "peerfair/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "peerfair/audit.hpp"
#include "peerfair/common.hpp"

namespace peerfair {

using nlohmann::ordered_json;

FeatureSchema SynthSpec::schema() const {
    FeatureSchema schema;
    for (const auto& f : features) schema.features.push_back(f.spec);
    schema.protected_column = protected_column;
    schema.protected_value = protected_value;
    schema.unprotected_value = unprotected_value;
    schema.outcome_column = outcome_column;
    schema.favourable_value = favourable_value;
    schema.unfavourable_value = unfavourable_value;
    schema.id_column = id_column;
    schema.validate();
    return schema;
}

void SynthSpec::validate() const {
    if (n < 100) throw UsageError("synth: n must be >= 100");
    if (features.empty()) throw UsageError("synth: no features");
    for (const auto& f : features) {
        if (f.spec.is_categorical()) {
            if (f.probs.size() != f.spec.levels.size()) {
                throw UsageError("synth: feature '" + f.spec.name +
                                 "' needs one probability per level");
            }
            double sum = 0.0;
            for (double p : f.probs) {
                if (p < 0.0) throw UsageError("synth: negative level probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                throw UsageError("synth: level probabilities of '" + f.spec.name +
                                 "' must sum to 1");
            }
        } else if (!(f.sd > 0.0) || !std::isfinite(f.mean)) {
            throw UsageError("synth: continuous feature '" + f.spec.name +
                             "' needs finite mean and sd > 0");
        }
    }
    schema();  // validates column layout
}

std::pair<Dataset, GroundTruth> generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t nf = spec.features.size();

    std::vector<Instance> instances;
    instances.reserve(static_cast<std::size_t>(spec.n));
    GroundTruth truth;
    truth.ids.reserve(static_cast<std::size_t>(spec.n));
    truth.p_minus.reserve(static_cast<std::size_t>(spec.n));
    truth.p_plus.reserve(static_cast<std::size_t>(spec.n));

    for (int i = 0; i < spec.n; ++i) {
        Instance inst;
        std::ostringstream id;
        id << 'i' << std::setw(6) << std::setfill('0') << i;
        inst.id = id.str();
        inst.x.resize(nf);
        double gamma_index = spec.gamma_intercept;
        double beta_index = spec.beta_intercept;
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& feat = spec.features[f];
            double value;
            if (feat.spec.is_categorical()) {
                const double u = rng.uniform01();
                double cum = 0.0;
                std::size_t level = feat.probs.size() - 1;
                for (std::size_t l = 0; l < feat.probs.size(); ++l) {
                    cum += feat.probs[l];
                    if (u < cum) {
                        level = l;
                        break;
                    }
                }
                value = static_cast<double>(level);
            } else {
                value = feat.mean + feat.sd * rng.normal();
            }
            inst.x[f] = value;
            gamma_index += feat.gamma * value;
            beta_index += feat.beta * value;
        }
        inst.is_protected = rng.bernoulli(logistic(gamma_index));
        const double p_minus = logistic(beta_index + spec.direct_bias);
        const double p_plus = logistic(beta_index);
        inst.y = rng.bernoulli(inst.is_protected ? p_minus : p_plus) ? 1 : 0;
        truth.ids.push_back(inst.id);
        truth.p_minus.push_back(p_minus);
        truth.p_plus.push_back(p_plus);
        instances.push_back(std::move(inst));
    }

    try {
        return {Dataset(spec.schema(), std::move(instances)), std::move(truth)};
    } catch (const Error& e) {
        throw Error(std::string("synth: degenerate specification: ") + e.what());
    }
}

OracleGapSummary oracle_gap(const GroundTruth& truth,
                            const std::vector<AuditResult>& results) {
    std::vector<double> gaps;
    for (const auto& res : results) {
        if (!res.auditable()) continue;
        if (res.index >= truth.ids.size() || truth.ids[res.index] != res.id) {
            throw Error("oracle_gap: audit results do not match the generated ids");
        }
        gaps.push_back(std::abs(res.peer_mean - truth.p_plus[res.index]));
    }
    OracleGapSummary summary;
    summary.n = gaps.size();
    if (gaps.empty()) return summary;
    summary.mean = mean(gaps);
    std::sort(gaps.begin(), gaps.end());
    summary.p50 = gaps[gaps.size() / 2];
    summary.p90 = gaps[static_cast<std::size_t>(0.9 * static_cast<double>(gaps.size() - 1))];
    summary.max = gaps.back();
    return summary;
}

std::string truth_to_csv(const GroundTruth& truth) {
    std::ostringstream out;
    out << "id,p_favourable_protected,p_favourable_unprotected\n";
    out.precision(17);
    for (std::size_t i = 0; i < truth.ids.size(); ++i) {
        out << truth.ids[i] << ',' << truth.p_minus[i] << ',' << truth.p_plus[i] << '\n';
    }
    return out.str();
}

void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << truth_to_csv(truth);
}

// ---------------------------------------------------------------------------
// JSON round-trip.
// ---------------------------------------------------------------------------
std::string SynthSpec::to_json_text() const {
    ordered_json j;
    j["n"] = n;
    j["seed"] = seed;
    j["gamma_intercept"] = gamma_intercept;
    j["beta_intercept"] = beta_intercept;
    j["direct_bias"] = direct_bias;
    j["protected_column"] = protected_column;
    j["protected_value"] = protected_value;
    j["unprotected_value"] = unprotected_value;
    j["outcome_column"] = outcome_column;
    j["favourable_value"] = favourable_value;
    j["unfavourable_value"] = unfavourable_value;
    j["id_column"] = id_column;
    j["features"] = ordered_json::array();
    for (const auto& f : features) {
        ordered_json jf;
        jf["name"] = f.spec.name;
        jf["kind"] = to_string(f.spec.kind);
        if (!f.spec.levels.empty()) jf["levels"] = f.spec.levels;
        jf["better_direction"] = to_string(f.spec.better);
        jf["intrinsic"] = f.spec.intrinsic;
        if (f.spec.is_categorical()) {
            jf["probs"] = f.probs;
        } else {
            jf["mean"] = f.mean;
            jf["sd"] = f.sd;
        }
        jf["gamma"] = f.gamma;
        jf["beta"] = f.beta;
        j["features"].push_back(std::move(jf));
    }
    return j.dump(2) + "\n";
}

SynthSpec SynthSpec::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("synth spec: invalid JSON: ") + e.what());
    }
    SynthSpec spec;
    try {
        spec.n = j.at("n").get<int>();
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.gamma_intercept = j.value("gamma_intercept", 0.0);
        spec.beta_intercept = j.value("beta_intercept", 0.0);
        spec.direct_bias = j.value("direct_bias", 0.0);
        spec.protected_column = j.value("protected_column", spec.protected_column);
        spec.protected_value = j.value("protected_value", spec.protected_value);
        spec.unprotected_value = j.value("unprotected_value", spec.unprotected_value);
        spec.outcome_column = j.value("outcome_column", spec.outcome_column);
        spec.favourable_value = j.value("favourable_value", spec.favourable_value);
        spec.unfavourable_value = j.value("unfavourable_value", spec.unfavourable_value);
        spec.id_column = j.value("id_column", spec.id_column);
        for (const auto& jf : j.at("features")) {
            SynthFeature f;
            f.spec.name = jf.at("name").get<std::string>();
            f.spec.kind = feature_kind_from_string(jf.at("kind").get<std::string>());
            if (jf.contains("levels")) {
                f.spec.levels = jf.at("levels").get<std::vector<std::string>>();
            }
            f.spec.better =
                direction_from_string(jf.value("better_direction", std::string("none")));
            f.spec.intrinsic = jf.value("intrinsic", false);
            if (jf.contains("probs")) f.probs = jf.at("probs").get<std::vector<double>>();
            f.mean = jf.value("mean", 0.0);
            f.sd = jf.value("sd", 1.0);
            f.gamma = jf.value("gamma", 0.0);
            f.beta = jf.value("beta", 0.0);
            spec.features.push_back(std::move(f));
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SynthSpec SynthSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("synth spec: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// Presets.
// ---------------------------------------------------------------------------
namespace {

SynthFeature categorical(std::string name, FeatureKind kind,
                         std::vector<std::string> levels, std::vector<double> probs,
                         Direction better, bool intrinsic, double gamma, double beta) {
    SynthFeature f;
    f.spec.name = std::move(name);
    f.spec.kind = kind;
    f.spec.levels = std::move(levels);
    f.spec.better = better;
    f.spec.intrinsic = intrinsic;
    f.probs = std::move(probs);
    double sum = 0.0;
    for (double p : f.probs) sum += p;
    for (double& p : f.probs) p /= sum;
    f.gamma = gamma;
    f.beta = beta;
    return f;
}

SynthFeature continuous(std::string name, double mean, double sd, Direction better,
                        bool intrinsic, double gamma, double beta) {
    SynthFeature f;
    f.spec.name = std::move(name);
    f.spec.kind = FeatureKind::Continuous;
    f.spec.better = better;
    f.spec.intrinsic = intrinsic;
    f.mean = mean;
    f.sd = sd;
    f.gamma = gamma;
    f.beta = beta;
    return f;
}

const std::vector<std::string> kYesNo = {"no", "yes"};

}  // namespace

SynthSpec SynthSpec::sme_preset(int n, std::uint64_t seed) {
    SynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.protected_column = "firm_size";
    spec.protected_value = "micro";
    spec.unprotected_value = "non_micro";
    spec.outcome_column = "loan_decision";
    spec.favourable_value = "approved";
    spec.unfavourable_value = "rejected";
    spec.id_column = "firm_id";

    using FK = FeatureKind;
    using D = Direction;
    auto& fs = spec.features;
    fs.push_back(categorical("previous_turndown", FK::Binary, kYesNo, {0.9094, 0.0906},
                             D::Lower, false, 0.5, -1.2));
    fs.push_back(categorical("finance_qualification", FK::Binary, kYesNo, {0.4566, 0.5434},
                             D::Higher, false, -0.3, 0.3));
    fs.push_back(categorical("written_plan", FK::Binary, kYesNo, {0.3758, 0.6242},
                             D::Higher, false, -0.2, 0.3));
    fs.push_back(categorical("risk_rating", FK::Ordinal,
                             {"minimal", "low", "average", "above_average"},
                             {0.1959, 0.4311, 0.2598, 0.1131}, D::Lower, false, 0.3, -0.55));
    fs.push_back(categorical("product_development", FK::Binary, kYesNo, {0.7025, 0.2975},
                             D::Lower, false, 0.1, -0.2));
    fs.push_back(categorical("business_innovation", FK::Binary, kYesNo, {0.4016, 0.5984},
                             D::Lower, false, 0.1, -0.25));
    fs.push_back(categorical("profitability", FK::Ordinal, {"loss", "broke_even", "profit"},
                             {0.8607, 0.0869, 0.0525}, D::Higher, false, -0.15, 0.35));
    fs.push_back(categorical("turnover_growth", FK::Ordinal,
                             {"declined", "flat", "grown_under_20", "grown_over_20"},
                             {0.1230, 0.3369, 0.4033, 0.1369}, D::Higher, false, -0.2, 0.3));
    fs.push_back(categorical("funds_injection", FK::Binary, kYesNo, {0.6717, 0.3283},
                             D::Lower, false, 0.2, -0.25));
    fs.push_back(categorical("credit_purchase", FK::Binary, kYesNo, {0.1848, 0.8152},
                             D::Higher, false, -0.1, 0.2));
    fs.push_back(categorical("management_accounts", FK::Binary, kYesNo, {0.1906, 0.8094},
                             D::Higher, false, -0.25, 0.35));
    fs.push_back(categorical(
        "sector", FK::Nominal,
        {"construction", "agriculture", "fishing", "health_social", "hospitality",
         "manufacturing", "real_estate", "transport", "wholesale_retail", "other_services"},
        {0.0664, 0.1082, 0.1201, 0.1262, 0.1168, 0.0869, 0.1668, 0.0963, 0.1123, 0.0963},
        D::None, true, 0.02, -0.02));
    fs.push_back(categorical("legal_status", FK::Nominal,
                             {"sole_proprietorship", "partnership", "llp", "llc"},
                             {0.0488, 0.1057, 0.0750, 0.7705}, D::None, true, -0.2, 0.05));
    fs.push_back(categorical("startup", FK::Binary, kYesNo, {0.975, 0.025}, D::None, true,
                             1.0, -0.4));
    fs.push_back(categorical("region_london_se", FK::Binary, kYesNo, {0.2361, 0.7639},
                             D::None, true, -0.05, 0.05));

    // Intercepts calibrated so the realized protected share is ~0.4133 and the
    // favourable rate ~0.8153.
    spec.gamma_intercept = 0.393;
    spec.beta_intercept = 1.339;
    spec.direct_bias = 0.0;
    return spec;
}

SynthSpec SynthSpec::null_preset(int n, std::uint64_t seed) {
    SynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    using FK = FeatureKind;
    using D = Direction;
    auto& fs = spec.features;
    fs.push_back(categorical("f_bin_a", FK::Binary, kYesNo, {0.5, 0.5}, D::Higher, false,
                             0.0, 0.15));
    fs.push_back(categorical("f_bin_b", FK::Binary, kYesNo, {0.5, 0.5}, D::Lower, false,
                             0.0, -0.15));
    fs.push_back(categorical("f_bin_c", FK::Binary, kYesNo, {0.6, 0.4}, D::Higher, false,
                             0.0, 0.12));
    fs.push_back(categorical("f_ord", FK::Ordinal, {"l0", "l1", "l2", "l3"},
                             {0.25, 0.25, 0.25, 0.25}, D::Higher, false, 0.0, 0.08));
    fs.push_back(continuous("f_cont_a", 0.0, 1.0, D::Higher, false, 0.0, 0.1));
    fs.push_back(continuous("f_cont_b", 0.0, 1.0, D::Lower, false, 0.0, -0.1));
    // logit(0.4133): protected share independent of everything.
    spec.gamma_intercept = -0.35033;
    spec.beta_intercept = 0.6;
    spec.direct_bias = 0.0;
    return spec;
}

SynthSpec SynthSpec::bias_preset(int n, double direct_bias, std::uint64_t seed) {
    SynthSpec spec = null_preset(n, seed);
    spec.direct_bias = direct_bias;
    return spec;
}

}  // namespace peerfair
