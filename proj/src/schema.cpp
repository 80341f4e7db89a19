#include "peerfair/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "peerfair/common.hpp"

namespace peerfair {

using nlohmann::ordered_json;

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Binary: return "binary";
        case FeatureKind::Ordinal: return "ordinal";
        case FeatureKind::Nominal: return "nominal";
        case FeatureKind::Continuous: return "continuous";
    }
    return "continuous";
}

std::string to_string(Direction dir) {
    switch (dir) {
        case Direction::Higher: return "higher";
        case Direction::Lower: return "lower";
        case Direction::None: return "none";
    }
    return "none";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "binary") return FeatureKind::Binary;
    if (s == "ordinal") return FeatureKind::Ordinal;
    if (s == "nominal") return FeatureKind::Nominal;
    if (s == "continuous") return FeatureKind::Continuous;
    throw UsageError("schema: unknown feature kind '" + s + "'");
}

Direction direction_from_string(const std::string& s) {
    if (s == "higher") return Direction::Higher;
    if (s == "lower") return Direction::Lower;
    if (s == "none") return Direction::None;
    throw UsageError("schema: unknown better_direction '" + s + "'");
}

std::optional<int> FeatureSpec::level_index(const std::string& value) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == value) return static_cast<int>(i);
    }
    return std::nullopt;
}

void FeatureSchema::validate() const {
    if (features.empty()) throw UsageError("schema: no features declared");
    if (protected_column.empty()) throw UsageError("schema: protected_column missing");
    if (protected_value.empty()) throw UsageError("schema: protected_value missing");
    if (outcome_column.empty()) throw UsageError("schema: outcome_column missing");
    if (favourable_value.empty()) throw UsageError("schema: favourable_value missing");

    std::set<std::string> names{protected_column, outcome_column};
    if (!id_column.empty()) names.insert(id_column);
    for (const auto& f : features) {
        if (f.name.empty()) throw UsageError("schema: feature with empty name");
        if (!names.insert(f.name).second) {
            throw UsageError("schema: duplicate column '" + f.name + "'");
        }
        switch (f.kind) {
            case FeatureKind::Binary:
                if (f.levels.size() != 2) {
                    throw UsageError("schema: binary feature '" + f.name +
                                     "' needs exactly 2 levels");
                }
                break;
            case FeatureKind::Ordinal:
            case FeatureKind::Nominal:
                if (f.levels.size() < 2) {
                    throw UsageError("schema: feature '" + f.name + "' needs >= 2 levels");
                }
                break;
            case FeatureKind::Continuous:
                if (!f.levels.empty()) {
                    throw UsageError("schema: continuous feature '" + f.name +
                                     "' must not list levels");
                }
                break;
        }
        if (f.kind == FeatureKind::Nominal && f.better != Direction::None) {
            throw UsageError("schema: nominal feature '" + f.name +
                             "' cannot have a better_direction");
        }
        std::set<std::string> seen;
        for (const auto& level : f.levels) {
            if (!seen.insert(level).second) {
                throw UsageError("schema: duplicate level '" + level + "' in feature '" +
                                 f.name + "'");
            }
        }
    }
}

std::uint64_t FeatureSchema::hash() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto feed = [&h](const std::string& s) {
        h = fnv1a64(s.data(), s.size(), h);
        h = fnv1a64("\x1f", 1, h);
    };
    feed(protected_column);
    feed(protected_value);
    feed(outcome_column);
    feed(favourable_value);
    for (const auto& f : features) {
        feed(f.name);
        feed(to_string(f.kind));
        feed(to_string(f.better));
        feed(f.intrinsic ? "1" : "0");
        for (const auto& level : f.levels) feed(level);
    }
    return h;
}

FeatureSchema FeatureSchema::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("schema: invalid JSON: ") + e.what());
    }
    FeatureSchema schema;
    try {
        schema.protected_column = j.at("protected_column").get<std::string>();
        schema.protected_value = j.at("protected_value").get<std::string>();
        schema.outcome_column = j.at("outcome_column").get<std::string>();
        schema.favourable_value = j.at("favourable_value").get<std::string>();
        schema.id_column = j.value("id_column", std::string{});
        schema.unprotected_value = j.value("unprotected_value", std::string{});
        schema.unfavourable_value = j.value("unfavourable_value", std::string{});
        for (const auto& jf : j.at("features")) {
            FeatureSpec f;
            f.name = jf.at("name").get<std::string>();
            f.kind = feature_kind_from_string(jf.at("kind").get<std::string>());
            if (jf.contains("levels")) {
                f.levels = jf.at("levels").get<std::vector<std::string>>();
            }
            f.better = direction_from_string(jf.value("better_direction", std::string("none")));
            f.intrinsic = jf.value("intrinsic", false);
            schema.features.push_back(std::move(f));
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("schema: ") + e.what());
    }
    schema.validate();
    return schema;
}

FeatureSchema FeatureSchema::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("schema: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string FeatureSchema::to_json_text() const {
    ordered_json j;
    j["protected_column"] = protected_column;
    j["protected_value"] = protected_value;
    j["outcome_column"] = outcome_column;
    j["favourable_value"] = favourable_value;
    if (!id_column.empty()) j["id_column"] = id_column;
    if (!unprotected_value.empty()) j["unprotected_value"] = unprotected_value;
    if (!unfavourable_value.empty()) j["unfavourable_value"] = unfavourable_value;
    j["features"] = ordered_json::array();
    for (const auto& f : features) {
        ordered_json jf;
        jf["name"] = f.name;
        jf["kind"] = to_string(f.kind);
        if (!f.levels.empty()) jf["levels"] = f.levels;
        jf["better_direction"] = to_string(f.better);
        jf["intrinsic"] = f.intrinsic;
        j["features"].push_back(std::move(jf));
    }
    return j.dump(2) + "\n";
}

}  // namespace peerfair
