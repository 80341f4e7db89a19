#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peerfair/peers.hpp"

namespace peerfair {

enum class Category {
    ExtremelyDiscriminated,
    SlightlyDiscriminated,
    FairlyTreated,
    SlightlyPrivileged,
    ExtremelyPrivileged,
    Unknown,
};

std::string to_string(Category c);
Category category_from_string(const std::string& s);

// Discriminated / Fair / Privileged, extremeness collapsed.
enum class CoarseCategory { Discriminated, Fair, Privileged, Unknown };
CoarseCategory coarse(Category c);

enum class TestStatistic { GrandMean, Dispersion };
std::string to_string(TestStatistic t);
TestStatistic test_statistic_from_string(const std::string& s);

struct AuditConfig {
    double delta_multiplier = 0.3;
    std::optional<double> delta_abs;  // absolute override when sigma_minus = 0
    int n_subsets = 100;              // N
    int subset_size = 30;             // K
    int min_peers = 35;
    double alpha = 0.05;
    double extreme_factor = 0.1;
    TestStatistic test_statistic = TestStatistic::GrandMean;
    bool one_sided = false;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    int cv_folds = 5;
    std::vector<double> strength_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    int explain_min_peers = 10;
    std::optional<double> explain_alpha;  // defaults to alpha

    void validate() const;  // throws UsageError

    std::string to_json_text() const;
    static AuditConfig from_json_text(const std::string& text);
    static AuditConfig from_json_file(const std::filesystem::path& path);
};

struct AuditResult {
    std::string id;
    std::size_t index = 0;  // dataset position
    int observed_y = 0;
    double p_a = 0.0;       // P(favourable | own x, s_minus)
    int peer_count = 0;
    Category category = Category::Unknown;
    // Present only when category != Unknown:
    std::vector<double> t_bars;
    double peer_mean = 0.0;
    double peer_sd = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    double peer_rejection_rate = 0.0;  // fraction of peers with y = 0

    bool auditable() const { return category != Category::Unknown; }
};

// N means of uniform K-subsets drawn without replacement within a subset,
// independently across subsets; deterministic per seed.
std::vector<double> sample_peer_means(std::span<const double> peer_probs, int subset_size,
                                      int n_subsets, std::uint64_t seed);

struct ZResult {
    double z = 0.0;
    double p_value = 1.0;
};

// grand_mean: z = (mean - p_a) / (sd / sqrt(N)); dispersion: z = (mean - p_a) / sd.
// sd is the sample standard deviation of t_bars. One-sided halves the p-value
// in the observed direction.
ZResult z_test(std::span<const double> t_bars, double p_a, TestStatistic variant,
               bool one_sided = false);

Category categorize(double p_a, double peer_mean, double p_value, double alpha,
                    double extreme_factor);

struct AuditRun {
    std::vector<AuditResult> results;  // one per protected instance, dataset order
    std::uint64_t subset_bound_checked = 0;
    std::uint64_t subset_bound_violations = 0;  // |xi_a - mean subset xi| > delta

    std::size_t count(Category c) const;
    std::size_t auditable_count() const;
};

// Full per-instance audit; data-parallel over protected instances with
// per-instance seeds, so output is independent of thread count.
AuditRun audit_all(const Dataset& dataset, const Encoder& encoder,
                   const ProbabilityModel& outcome_model, const ICTable& ic,
                   const PeerSet& peers, const AuditConfig& config, int threads = 1);

struct CategoryRejectionRow {
    Category category = Category::Unknown;
    std::size_t members = 0;
    double rejection_rate = 0.0;       // fraction of members with y = 0
    double peer_rejection_mean = 0.0;  // over members' peer rejection rates
    double peer_rejection_sd = 0.0;
    std::string note;
};

std::vector<CategoryRejectionRow> category_rejection_stats(
    const std::vector<AuditResult>& results);

}  // namespace peerfair
