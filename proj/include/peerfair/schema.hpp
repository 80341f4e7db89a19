#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace peerfair {

enum class FeatureKind { Binary, Ordinal, Nominal, Continuous };
enum class Direction { Higher, Lower, None };

std::string to_string(FeatureKind kind);
std::string to_string(Direction dir);
FeatureKind feature_kind_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

// One column of the audited table.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<std::string> levels;  // ordered; empty for continuous
    Direction better = Direction::None;
    bool intrinsic = false;

    bool is_categorical() const { return kind != FeatureKind::Continuous; }
    // Index of a raw level, if valid for this feature.
    std::optional<int> level_index(const std::string& value) const;
};

// Column layout of a decision dataset: features plus the protected and
// outcome columns. Loaded from a JSON file; see docs/ for the format.
struct FeatureSchema {
    std::vector<FeatureSpec> features;
    std::string protected_column;
    std::string protected_value;   // raw level meaning "protected" (s minus)
    std::string outcome_column;
    std::string favourable_value;  // raw level meaning y = 1
    std::string id_column;         // optional; row index used when empty

    // Raw strings for the complementary levels; optional in schema files and
    // filled from the data during ingestion. Used when writing CSV back out.
    std::string unprotected_value;
    std::string unfavourable_value;

    void validate() const;  // throws UsageError on structural problems
    const FeatureSpec& feature(std::size_t i) const { return features[i]; }
    std::size_t n_features() const { return features.size(); }

    // Hash of the full column layout; used to detect model/schema mismatch.
    std::uint64_t hash() const;

    static FeatureSchema from_json_file(const std::filesystem::path& path);
    static FeatureSchema from_json_text(const std::string& text);
    std::string to_json_text() const;
};

}  // namespace peerfair
