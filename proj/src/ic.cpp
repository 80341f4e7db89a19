#include "peerfair/ic.hpp"

#include <fstream>
#include <sstream>

#include "peerfair/common.hpp"

namespace peerfair {

double compute_marginal(const Dataset& dataset) {
    // Both groups are non-empty by Dataset construction.
    return static_cast<double>(dataset.count_protected()) /
           static_cast<double>(dataset.size());
}

ICTable compute_ic(const Dataset& dataset, const Encoder& encoder,
                   const ProbabilityModel& propensity_model, double marginal) {
    if (!(marginal > 0.0 && marginal < 1.0)) {
        throw Error("compute_ic: marginal must be inside (0,1)");
    }
    if (propensity_model.includes_protected) {
        throw Error("compute_ic: propensity model must not include the protected column");
    }
    ICTable table;
    table.marginal = marginal;
    table.rows.reserve(dataset.size());
    std::vector<double> protected_xi;
    for (const auto& inst : dataset.instances()) {
        ICRow row;
        row.id = inst.id;
        row.is_protected = inst.is_protected;
        double p = propensity_model.predict(encoder, inst);
        if (p <= 1e-6 || p >= 1.0 - 1e-6) {
            p = clamp_probability(p, 1e-6);
            ++table.clamped;
        }
        row.propensity = p;
        row.xi = inst.is_protected ? p / marginal : (1.0 - p) / (1.0 - marginal);
        if (inst.is_protected) protected_xi.push_back(row.xi);
        table.rows.push_back(std::move(row));
    }
    table.sigma_minus = population_sd(protected_xi);
    return table;
}

std::string ic_to_csv(const ICTable& table) {
    std::ostringstream out;
    out << "id,group,propensity,xi\n";
    out.precision(17);
    for (const auto& row : table.rows) {
        out << row.id << ',' << (row.is_protected ? "protected" : "unprotected") << ','
            << row.propensity << ',' << row.xi << '\n';
    }
    return out.str();
}

void write_ic_csv(const ICTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << ic_to_csv(table);
}

}  // namespace peerfair
