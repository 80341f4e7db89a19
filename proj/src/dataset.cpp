#include "peerfair/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "peerfair/common.hpp"

namespace peerfair {

namespace {

// RFC-4180-style CSV: quoted fields may contain commas, quotes ("") and
// newlines. Returns rows of cells; empty cell = missing.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_row = [&] {
        end_cell();
        if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell_started) {
                    in_quotes = true;
                    cell_started = true;
                } else {
                    cell += c;
                }
                break;
            case ',':
                end_cell();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                break;
            default:
                cell += c;
                cell_started = true;
                break;
        }
    }
    if (in_quotes) throw UsageError("csv: unterminated quoted field");
    if (cell_started || !cell.empty() || !row.empty()) end_row();
    return rows;
}

std::string escape_csv(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

double parse_double(const std::string& s, const std::string& column, std::size_t row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("csv row " + std::to_string(row) + ": column '" + column +
                         "': cannot parse '" + s + "' as a number");
    }
}

}  // namespace

Dataset::Dataset(FeatureSchema schema, std::vector<Instance> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
    schema_.validate();
    if (instances_.empty()) throw Error("dataset: empty after ingestion filtering");
    std::set<std::string> ids;
    for (const auto& inst : instances_) {
        if (!ids.insert(inst.id).second) {
            throw Error("dataset: duplicate instance id '" + inst.id + "'");
        }
        if (inst.x.size() != schema_.n_features()) {
            throw Error("dataset: instance '" + inst.id + "' has " +
                        std::to_string(inst.x.size()) + " features, schema expects " +
                        std::to_string(schema_.n_features()));
        }
        for (std::size_t f = 0; f < inst.x.size(); ++f) {
            const auto& spec = schema_.feature(f);
            if (spec.is_categorical()) {
                const double v = inst.x[f];
                if (v != std::floor(v) || v < 0.0 ||
                    v >= static_cast<double>(spec.levels.size())) {
                    throw Error("dataset: instance '" + inst.id + "' feature '" + spec.name +
                                "' outside the declared levels");
                }
            } else if (!std::isfinite(inst.x[f])) {
                throw Error("dataset: instance '" + inst.id + "' feature '" + spec.name +
                            "' is not finite");
            }
        }
        if (inst.y != 0 && inst.y != 1) {
            throw Error("dataset: instance '" + inst.id + "' outcome outside {0,1}");
        }
        n_protected_ += inst.is_protected ? 1 : 0;
        n_favourable_ += inst.y;
    }
    if (n_protected_ == 0) throw Error("dataset: protected group is empty");
    if (n_protected_ == instances_.size()) throw Error("dataset: unprotected group is empty");
}

Dataset Dataset::subset(const std::vector<std::size_t>& keep) const {
    std::vector<Instance> rows;
    rows.reserve(keep.size());
    for (std::size_t i : keep) rows.push_back(instances_.at(i));
    return Dataset(schema_, std::move(rows));
}

Dataset load_dataset_text(const std::string& csv_text, const FeatureSchema& schema_in,
                          LoadStats* stats) {
    FeatureSchema schema = schema_in;
    schema.validate();
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw UsageError("csv: no header row");
    const auto& header = rows.front();

    std::map<std::string, std::size_t> column_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!column_of.emplace(header[i], i).second) {
            throw UsageError("csv: duplicate column '" + header[i] + "'");
        }
    }
    auto require_column = [&](const std::string& name) {
        auto it = column_of.find(name);
        if (it == column_of.end()) throw UsageError("csv: missing column '" + name + "'");
        return it->second;
    };
    const std::size_t protected_col = require_column(schema.protected_column);
    const std::size_t outcome_col = require_column(schema.outcome_column);
    std::size_t id_col = 0;
    const bool has_id = !schema.id_column.empty();
    if (has_id) id_col = require_column(schema.id_column);
    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.n_features());
    for (const auto& f : schema.features) feature_cols.push_back(require_column(f.name));

    LoadStats local;
    const std::size_t nf = schema.n_features();

    // First pass: drop rows with > 20% missing feature cells or an unusable
    // protected/outcome/id cell; collect observed complementary levels.
    struct RawRow {
        std::string id;
        std::vector<std::string> cells;  // feature cells, schema order
        std::string protected_raw;
        std::string outcome_raw;
    };
    std::vector<RawRow> kept;
    std::set<std::string> protected_levels;
    std::set<std::string> outcome_levels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        ++local.rows_read;
        if (row.size() != header.size()) {
            throw UsageError("csv row " + std::to_string(r) + ": expected " +
                             std::to_string(header.size()) + " cells, found " +
                             std::to_string(row.size()));
        }
        std::size_t missing = 0;
        for (std::size_t f = 0; f < nf; ++f) {
            if (row[feature_cols[f]].empty()) ++missing;
        }
        if (missing * 5 > nf) {  // strictly more than 20%
            ++local.rows_dropped_missing;
            continue;
        }
        RawRow raw;
        raw.protected_raw = row[protected_col];
        raw.outcome_raw = row[outcome_col];
        raw.id = has_id ? row[id_col] : "r" + std::to_string(r);
        if (raw.protected_raw.empty() || raw.outcome_raw.empty() || raw.id.empty()) {
            ++local.rows_dropped_unusable;
            continue;
        }
        protected_levels.insert(raw.protected_raw);
        outcome_levels.insert(raw.outcome_raw);
        raw.cells.reserve(nf);
        for (std::size_t f = 0; f < nf; ++f) raw.cells.push_back(row[feature_cols[f]]);
        kept.push_back(std::move(raw));
    }
    if (kept.empty()) throw Error("dataset: empty after ingestion filtering");

    if (protected_levels.size() != 2 || !protected_levels.count(schema.protected_value)) {
        throw UsageError("csv: protected column '" + schema.protected_column +
                         "' is not binary over {" + schema.protected_value +
                         ", other}: found " + std::to_string(protected_levels.size()) +
                         " level(s)");
    }
    if (outcome_levels.size() != 2 || !outcome_levels.count(schema.favourable_value)) {
        throw UsageError("csv: outcome column '" + schema.outcome_column +
                         "' is not binary over {" + schema.favourable_value +
                         ", other}: found " + std::to_string(outcome_levels.size()) +
                         " level(s)");
    }
    for (const auto& level : protected_levels) {
        if (level != schema.protected_value) schema.unprotected_value = level;
    }
    for (const auto& level : outcome_levels) {
        if (level != schema.favourable_value) schema.unfavourable_value = level;
    }

    // Imputation statistics over the surviving rows.
    std::vector<std::map<std::string, std::size_t>> level_counts(nf);
    std::vector<std::vector<double>> continuous_values(nf);
    for (const auto& raw : kept) {
        for (std::size_t f = 0; f < nf; ++f) {
            if (raw.cells[f].empty()) continue;
            const auto& spec = schema.feature(f);
            if (spec.is_categorical()) {
                ++level_counts[f][raw.cells[f]];
            } else {
                continuous_values[f].push_back(
                    parse_double(raw.cells[f], spec.name, 0));
            }
        }
    }
    std::vector<std::string> imputed_level(nf);
    std::vector<double> imputed_value(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& spec = schema.feature(f);
        if (spec.is_categorical()) {
            // Mode; ties resolved by the schema's level order.
            std::size_t best = 0;
            for (const auto& level : spec.levels) {
                auto it = level_counts[f].find(level);
                const std::size_t n = it == level_counts[f].end() ? 0 : it->second;
                if (n > best) {
                    best = n;
                    imputed_level[f] = level;
                }
            }
            if (best == 0) {
                throw Error("dataset: feature '" + spec.name + "' has no observed values");
            }
        } else {
            auto& v = continuous_values[f];
            if (v.empty()) {
                throw Error("dataset: feature '" + spec.name + "' has no observed values");
            }
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            imputed_value[f] = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }
    }

    std::vector<Instance> instances;
    instances.reserve(kept.size());
    std::size_t row_number = 0;
    for (const auto& raw : kept) {
        ++row_number;
        Instance inst;
        inst.id = raw.id;
        inst.is_protected = raw.protected_raw == schema.protected_value;
        inst.y = raw.outcome_raw == schema.favourable_value ? 1 : 0;
        inst.x.resize(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& spec = schema.feature(f);
            std::string cell = raw.cells[f];
            if (cell.empty()) {
                ++local.cells_imputed;
                if (spec.is_categorical()) {
                    cell = imputed_level[f];
                } else {
                    inst.x[f] = imputed_value[f];
                    continue;
                }
            }
            if (spec.is_categorical()) {
                const auto idx = spec.level_index(cell);
                if (!idx) {
                    throw UsageError("csv: unknown level '" + cell + "' for feature '" +
                                     spec.name + "' (instance '" + inst.id + "')");
                }
                inst.x[f] = static_cast<double>(*idx);
            } else {
                inst.x[f] = parse_double(cell, spec.name, row_number);
            }
        }
        instances.push_back(std::move(inst));
    }

    if (stats) *stats = local;
    return Dataset(std::move(schema), std::move(instances));
}

Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path, LoadStats* stats) {
    auto schema = FeatureSchema::from_json_file(schema_path);
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw UsageError("csv: cannot open '" + csv_path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_dataset_text(buf.str(), schema, stats);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw UsageError("split: train_fraction must be inside (0,1)");
    }
    // Strata over (s, y); each non-empty stratum must reach both parts.
    std::array<std::vector<std::size_t>, 4> strata;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& inst = dataset.instance(i);
        strata[(inst.is_protected ? 2 : 0) + inst.y].push_back(i);
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto& stratum = strata[s];
        if (stratum.empty()) continue;
        if (stratum.size() < 2) {
            throw Error("split: stratum (s=" + std::to_string(s / 2) +
                        ", y=" + std::to_string(s % 2) +
                        ") too small to place one instance in each part");
        }
        Rng rng(derive_seed(seed, 0x5A11D0ull + s));
        rng.shuffle(stratum);
        auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(stratum.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, stratum.size() - 1);
        train_idx.insert(train_idx.end(), stratum.begin(), stratum.begin() + n_train);
        test_idx.insert(test_idx.end(), stratum.begin() + n_train, stratum.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

std::string dataset_to_csv(const Dataset& dataset) {
    const auto& schema = dataset.schema();
    std::ostringstream out;
    const bool has_id = !schema.id_column.empty();
    if (has_id) out << escape_csv(schema.id_column) << ',';
    for (const auto& f : schema.features) out << escape_csv(f.name) << ',';
    out << escape_csv(schema.protected_column) << ','
        << escape_csv(schema.outcome_column) << '\n';
    const std::string s_plus =
        schema.unprotected_value.empty() ? "unprotected" : schema.unprotected_value;
    const std::string y_zero =
        schema.unfavourable_value.empty() ? "no" : schema.unfavourable_value;
    for (const auto& inst : dataset.instances()) {
        if (has_id) out << escape_csv(inst.id) << ',';
        for (std::size_t f = 0; f < schema.n_features(); ++f) {
            const auto& spec = schema.feature(f);
            if (spec.is_categorical()) {
                out << escape_csv(spec.levels[static_cast<std::size_t>(inst.x[f])]);
            } else {
                out << format_double(inst.x[f]);
            }
            out << ',';
        }
        out << escape_csv(inst.is_protected ? schema.protected_value : s_plus) << ','
            << escape_csv(inst.y == 1 ? schema.favourable_value : y_zero) << '\n';
    }
    return out.str();
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << dataset_to_csv(dataset);
}

}  // namespace peerfair
