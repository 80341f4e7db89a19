#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "peerfair/dataset.hpp"

namespace peerfair {

// Maps level-coded instances to a numeric design matrix:
//   binary      -> one {0,1} column
//   ordinal     -> one integer-rank column
//   nominal     -> one-hot with the first level dropped as reference
//   continuous  -> standardized with the reference dataset's mean/sd
//
// Standardization statistics come from the dataset passed to fit(), normally
// the training split, so train-derived models can score any split. The layout
// never includes the outcome; the protected indicator is appended on request.
class Encoder {
public:
    static Encoder fit(const Dataset& reference);

    // Encoded feature column names, protected column excluded.
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t width(bool with_protected) const {
        return columns_.size() + (with_protected ? 1 : 0);
    }
    const std::string& protected_column_name() const { return protected_name_; }

    Eigen::MatrixXd design(const Dataset& dataset, bool with_protected) const;
    Eigen::RowVectorXd encode(const Instance& instance, bool with_protected) const;

    // Inverse of encode() on the feature columns; categorical values exact,
    // continuous recovered up to one rounding of the standardization.
    std::vector<double> decode(const Eigen::RowVectorXd& row) const;

    std::uint64_t schema_hash() const { return schema_hash_; }

private:
    struct ContinuousStats {
        double mean = 0.0;
        double sd = 1.0;  // 1.0 when the reference column is constant
    };

    std::vector<FeatureSpec> features_;
    std::vector<ContinuousStats> stats_;       // per feature; unused slots default
    std::vector<std::size_t> feature_offset_;  // first encoded column per feature
    std::vector<std::string> columns_;
    std::string protected_name_;
    std::uint64_t schema_hash_ = 0;
};

}  // namespace peerfair
