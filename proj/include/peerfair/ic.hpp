#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "peerfair/model.hpp"

namespace peerfair {

struct ICRow {
    std::string id;
    bool is_protected = false;
    double propensity = 0.0;  // P(S = s_minus | X = x), clamped into (0, 1)
    double xi = 0.0;          // identification coefficient for the row's own group
};

// Per-instance identification coefficients, aligned with dataset order.
struct ICTable {
    double marginal = 0.0;     // empirical P(S = s_minus)
    std::vector<ICRow> rows;
    double sigma_minus = 0.0;  // population sd of xi over the protected group
    std::size_t clamped = 0;   // propensities clamped away from {0, 1}
};

// count(s_minus) / count(all).
double compute_marginal(const Dataset& dataset);

// xi = propensity / marginal for protected rows,
// (1 - propensity) / (1 - marginal) for unprotected rows.
ICTable compute_ic(const Dataset& dataset, const Encoder& encoder,
                   const ProbabilityModel& propensity_model, double marginal);

std::string ic_to_csv(const ICTable& table);
void write_ic_csv(const ICTable& table, const std::filesystem::path& path);

}  // namespace peerfair
