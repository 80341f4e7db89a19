#include "peerfair/audit.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "peerfair/common.hpp"

namespace peerfair {

using nlohmann::ordered_json;

std::string to_string(Category c) {
    switch (c) {
        case Category::ExtremelyDiscriminated: return "extremely_discriminated";
        case Category::SlightlyDiscriminated: return "slightly_discriminated";
        case Category::FairlyTreated: return "fairly_treated";
        case Category::SlightlyPrivileged: return "slightly_privileged";
        case Category::ExtremelyPrivileged: return "extremely_privileged";
        case Category::Unknown: return "unknown";
    }
    return "unknown";
}

Category category_from_string(const std::string& s) {
    if (s == "extremely_discriminated") return Category::ExtremelyDiscriminated;
    if (s == "slightly_discriminated") return Category::SlightlyDiscriminated;
    if (s == "fairly_treated") return Category::FairlyTreated;
    if (s == "slightly_privileged") return Category::SlightlyPrivileged;
    if (s == "extremely_privileged") return Category::ExtremelyPrivileged;
    if (s == "unknown") return Category::Unknown;
    throw UsageError("unknown category '" + s + "'");
}

CoarseCategory coarse(Category c) {
    switch (c) {
        case Category::ExtremelyDiscriminated:
        case Category::SlightlyDiscriminated: return CoarseCategory::Discriminated;
        case Category::FairlyTreated: return CoarseCategory::Fair;
        case Category::SlightlyPrivileged:
        case Category::ExtremelyPrivileged: return CoarseCategory::Privileged;
        case Category::Unknown: return CoarseCategory::Unknown;
    }
    return CoarseCategory::Unknown;
}

std::string to_string(TestStatistic t) {
    return t == TestStatistic::GrandMean ? "grand_mean" : "dispersion";
}

TestStatistic test_statistic_from_string(const std::string& s) {
    if (s == "grand_mean") return TestStatistic::GrandMean;
    if (s == "dispersion") return TestStatistic::Dispersion;
    throw UsageError("unknown test_statistic '" + s + "'");
}

void AuditConfig::validate() const {
    if (!(delta_multiplier > 0.0)) throw UsageError("config: delta_multiplier must be > 0");
    if (delta_abs && !(*delta_abs > 0.0)) throw UsageError("config: delta_abs must be > 0");
    if (n_subsets < 2) throw UsageError("config: N (n_subsets) must be >= 2");
    if (subset_size < 1) throw UsageError("config: K (subset_size) must be >= 1");
    if (min_peers < 1) throw UsageError("config: min_peers must be >= 1");
    if (subset_size > min_peers) {
        throw UsageError("config: K (subset_size) must not exceed min_peers");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("config: alpha must be in (0,1)");
    if (extreme_factor < 0.0) throw UsageError("config: extreme_factor must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw UsageError("config: train_fraction must be in (0,1)");
    }
    if (cv_folds < 2) throw UsageError("config: cv_folds must be >= 2");
    if (strength_grid.empty()) throw UsageError("config: strength_grid must be non-empty");
    for (double s : strength_grid) {
        if (s < 0.0) throw UsageError("config: strengths must be >= 0");
    }
    if (explain_min_peers < 1) throw UsageError("config: explain_min_peers must be >= 1");
    if (explain_alpha && !(*explain_alpha > 0.0 && *explain_alpha < 1.0)) {
        throw UsageError("config: explain_alpha must be in (0,1)");
    }
}

std::string AuditConfig::to_json_text() const {
    ordered_json j;
    j["delta_multiplier"] = delta_multiplier;
    if (delta_abs) j["delta_abs"] = *delta_abs;
    j["n_subsets"] = n_subsets;
    j["subset_size"] = subset_size;
    j["min_peers"] = min_peers;
    j["alpha"] = alpha;
    j["extreme_factor"] = extreme_factor;
    j["test_statistic"] = to_string(test_statistic);
    j["one_sided"] = one_sided;
    j["seed"] = seed;
    j["train_fraction"] = train_fraction;
    j["cv_folds"] = cv_folds;
    j["strength_grid"] = strength_grid;
    j["explain_min_peers"] = explain_min_peers;
    if (explain_alpha) j["explain_alpha"] = *explain_alpha;
    return j.dump(2) + "\n";
}

AuditConfig AuditConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    AuditConfig c;
    c.delta_multiplier = j.value("delta_multiplier", c.delta_multiplier);
    if (j.contains("delta_abs")) c.delta_abs = j.at("delta_abs").get<double>();
    c.n_subsets = j.value("n_subsets", c.n_subsets);
    c.subset_size = j.value("subset_size", c.subset_size);
    c.min_peers = j.value("min_peers", c.min_peers);
    c.alpha = j.value("alpha", c.alpha);
    c.extreme_factor = j.value("extreme_factor", c.extreme_factor);
    if (j.contains("test_statistic")) {
        c.test_statistic = test_statistic_from_string(j.at("test_statistic").get<std::string>());
    }
    c.one_sided = j.value("one_sided", c.one_sided);
    c.seed = j.value("seed", c.seed);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    if (j.contains("strength_grid")) {
        c.strength_grid = j.at("strength_grid").get<std::vector<double>>();
    }
    c.explain_min_peers = j.value("explain_min_peers", c.explain_min_peers);
    if (j.contains("explain_alpha")) c.explain_alpha = j.at("explain_alpha").get<double>();
    c.validate();
    return c;
}

AuditConfig AuditConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

namespace {

// One uniform K-subset of [0, pool) without replacement (partial Fisher-Yates
// over a caller-owned scratch index array).
void draw_subset(std::vector<std::uint32_t>& scratch, int subset_size, Rng& rng,
                 std::vector<std::uint32_t>& out) {
    const std::size_t m = scratch.size();
    out.clear();
    for (int k = 0; k < subset_size; ++k) {
        const std::size_t j =
            static_cast<std::size_t>(k) +
            static_cast<std::size_t>(rng.uniform_int(m - static_cast<std::size_t>(k)));
        std::swap(scratch[static_cast<std::size_t>(k)], scratch[j]);
        out.push_back(scratch[static_cast<std::size_t>(k)]);
    }
}

}  // namespace

std::vector<double> sample_peer_means(std::span<const double> peer_probs, int subset_size,
                                      int n_subsets, std::uint64_t seed) {
    if (subset_size < 1 || static_cast<std::size_t>(subset_size) > peer_probs.size()) {
        throw Error("sample_peer_means: K exceeds the available peers");
    }
    Rng rng(seed);
    std::vector<std::uint32_t> scratch(peer_probs.size());
    std::iota(scratch.begin(), scratch.end(), 0);
    std::vector<std::uint32_t> subset;
    std::vector<double> t_bars;
    t_bars.reserve(static_cast<std::size_t>(n_subsets));
    for (int i = 0; i < n_subsets; ++i) {
        draw_subset(scratch, subset_size, rng, subset);
        double s = 0.0;
        for (std::uint32_t idx : subset) s += peer_probs[idx];
        t_bars.push_back(s / subset_size);
    }
    return t_bars;
}

ZResult z_test(std::span<const double> t_bars, double p_a, TestStatistic variant,
               bool one_sided) {
    if (t_bars.size() < 2) throw Error("z_test: need at least two sample means");
    const double m = mean(t_bars);
    const double sd = sample_sd(t_bars);
    ZResult r;
    if (sd < 1e-12) {
        if (std::abs(m - p_a) < 1e-12) {
            r.z = 0.0;
            r.p_value = 1.0;
        } else {
            r.z = m > p_a ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
        return r;
    }
    const double base = (m - p_a) / sd;
    r.z = variant == TestStatistic::GrandMean
              ? base * std::sqrt(static_cast<double>(t_bars.size()))
              : base;
    r.p_value = two_sided_p(r.z);
    if (one_sided) r.p_value *= 0.5;  // directional test against the observed side
    return r;
}

Category categorize(double p_a, double peer_mean, double p_value, double alpha,
                    double extreme_factor) {
    if (p_value >= alpha) return Category::FairlyTreated;
    const double gap = std::abs(p_a - peer_mean);
    const bool extreme = gap > extreme_factor * p_a;
    if (p_a < peer_mean) {
        return extreme ? Category::ExtremelyDiscriminated : Category::SlightlyDiscriminated;
    }
    return extreme ? Category::ExtremelyPrivileged : Category::SlightlyPrivileged;
}

std::size_t AuditRun::count(Category c) const {
    std::size_t n = 0;
    for (const auto& r : results) n += r.category == c ? 1 : 0;
    return n;
}

std::size_t AuditRun::auditable_count() const {
    return results.size() - count(Category::Unknown);
}

AuditRun audit_all(const Dataset& dataset, const Encoder& encoder,
                   const ProbabilityModel& outcome_model, const ICTable& ic,
                   const PeerSet& peers, const AuditConfig& config, int threads) {
    config.validate();
    if (ic.rows.size() != dataset.size()) {
        throw Error("audit_all: identification table does not match the dataset");
    }
    if (!outcome_model.includes_protected) {
        throw Error("audit_all: outcome model must include the protected column");
    }

    // Peer probabilities depend only on the peer's own row; score the whole
    // dataset once. T_j = f(x_j, s_plus) uses the peer's own group, which is
    // s_plus for every unprotected row.
    std::vector<double> prob_cache(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        prob_cache[i] = outcome_model.predict(encoder, dataset.instance(i));
    });

    AuditRun run;
    run.results.resize(peers.entries.size());
    std::atomic<std::uint64_t> checked{0};
    std::atomic<std::uint64_t> violations{0};

    parallel_for(peers.entries.size(), threads, [&](std::size_t e) {
        const PeerEntry& entry = peers.entries[e];
        const Instance& inst = dataset.instance(entry.index);
        AuditResult res;
        res.id = entry.id;
        res.index = entry.index;
        res.observed_y = inst.y;
        res.p_a = prob_cache[entry.index];
        res.peer_count = static_cast<int>(entry.peer_indices.size());
        if (entry.status == PeerStatus::Unknown) {
            res.category = Category::Unknown;
            run.results[e] = std::move(res);
            return;
        }

        std::vector<double> peer_probs;
        peer_probs.reserve(entry.peer_indices.size());
        std::size_t rejected = 0;
        for (std::uint32_t j : entry.peer_indices) {
            peer_probs.push_back(prob_cache[j]);
            rejected += dataset.instance(j).y == 0 ? 1 : 0;
        }
        res.peer_rejection_rate =
            static_cast<double>(rejected) / static_cast<double>(entry.peer_indices.size());

        // Per-instance stream: results do not depend on the execution order.
        Rng rng(derive_seed(config.seed, entry.id));
        std::vector<std::uint32_t> scratch(entry.peer_indices.size());
        std::iota(scratch.begin(), scratch.end(), 0);
        std::vector<std::uint32_t> subset;
        const double xi_a = ic.rows[entry.index].xi;
        res.t_bars.reserve(static_cast<std::size_t>(config.n_subsets));
        std::uint64_t local_checked = 0;
        std::uint64_t local_violations = 0;
        for (int i = 0; i < config.n_subsets; ++i) {
            draw_subset(scratch, config.subset_size, rng, subset);
            double sum_p = 0.0;
            double sum_xi = 0.0;
            for (std::uint32_t s : subset) {
                sum_p += peer_probs[s];
                sum_xi += ic.rows[entry.peer_indices[s]].xi;
            }
            res.t_bars.push_back(sum_p / config.subset_size);
            // Synthetic-peer bound: the subset's mean xi stays within delta.
            ++local_checked;
            if (std::abs(xi_a - sum_xi / config.subset_size) > peers.delta) {
                ++local_violations;
            }
        }
        checked.fetch_add(local_checked, std::memory_order_relaxed);
        violations.fetch_add(local_violations, std::memory_order_relaxed);

        res.peer_mean = mean(res.t_bars);
        res.peer_sd = sample_sd(res.t_bars);
        const ZResult zr = z_test(res.t_bars, res.p_a, config.test_statistic,
                                  config.one_sided);
        res.z = zr.z;
        res.p_value = zr.p_value;
        res.category = categorize(res.p_a, res.peer_mean, res.p_value, config.alpha,
                                  config.extreme_factor);
        run.results[e] = std::move(res);
    });

    run.subset_bound_checked = checked.load();
    run.subset_bound_violations = violations.load();
    return run;
}

std::vector<CategoryRejectionRow> category_rejection_stats(
    const std::vector<AuditResult>& results) {
    constexpr Category kOrder[] = {
        Category::ExtremelyDiscriminated, Category::SlightlyDiscriminated,
        Category::FairlyTreated,          Category::SlightlyPrivileged,
        Category::ExtremelyPrivileged,    Category::Unknown,
    };
    std::vector<CategoryRejectionRow> rows;
    for (Category cat : kOrder) {
        CategoryRejectionRow row;
        row.category = cat;
        std::size_t rejected = 0;
        std::vector<double> peer_rates;
        for (const auto& r : results) {
            if (r.category != cat) continue;
            ++row.members;
            rejected += r.observed_y == 0 ? 1 : 0;
            if (r.peer_count > 0 && r.auditable()) peer_rates.push_back(r.peer_rejection_rate);
        }
        if (row.members == 0) continue;  // empty category: row omitted
        row.rejection_rate = static_cast<double>(rejected) / static_cast<double>(row.members);
        if (!peer_rates.empty()) {
            row.peer_rejection_mean = mean(peer_rates);
            row.peer_rejection_sd = sample_sd(peer_rates);
        } else {
            row.note = "no peer statistics";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace peerfair
