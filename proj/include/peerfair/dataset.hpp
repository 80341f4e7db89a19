#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "peerfair/schema.hpp"

namespace peerfair {

// One row after ingestion. Feature values are level-mapped:
// binary -> {0,1}, ordinal/nominal -> level rank, continuous -> raw value.
struct Instance {
    std::string id;
    std::vector<double> x;
    bool is_protected = false;  // s == s_minus
    int y = 0;                  // 1 = favourable outcome
};

struct LoadStats {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_missing = 0;   // > 20% feature cells missing
    std::size_t rows_dropped_unusable = 0;  // missing protected/outcome cell
    std::size_t cells_imputed = 0;
};

// Validated, immutable collection of instances sharing one schema.
class Dataset {
public:
    Dataset(FeatureSchema schema, std::vector<Instance> instances);

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<Instance>& instances() const { return instances_; }
    const Instance& instance(std::size_t i) const { return instances_[i]; }
    std::size_t size() const { return instances_.size(); }

    std::size_t count_protected() const { return n_protected_; }
    std::size_t count_unprotected() const { return instances_.size() - n_protected_; }
    std::size_t count_favourable() const { return n_favourable_; }

    // Restricted copy; keep[i] refers to instance positions.
    Dataset subset(const std::vector<std::size_t>& keep) const;

private:
    FeatureSchema schema_;
    std::vector<Instance> instances_;
    std::size_t n_protected_ = 0;
    std::size_t n_favourable_ = 0;
};

// CSV ingestion: drops rows with > 20% missing feature cells or a missing
// protected/outcome cell, imputes remaining gaps (mode for categorical,
// median for continuous).
Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path,
                     LoadStats* stats = nullptr);
Dataset load_dataset_text(const std::string& csv_text, const FeatureSchema& schema,
                          LoadStats* stats = nullptr);

// Stratified (s, y) split; deterministic for a fixed seed.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

// Writes the dataset back to CSV in raw (level string) form.
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string dataset_to_csv(const Dataset& dataset);

}  // namespace peerfair
