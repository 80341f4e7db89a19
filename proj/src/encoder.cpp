#include "peerfair/encoder.hpp"

#include <cmath>

#include "peerfair/common.hpp"

namespace peerfair {

Encoder Encoder::fit(const Dataset& reference) {
    Encoder enc;
    const auto& schema = reference.schema();
    enc.features_ = schema.features;
    enc.stats_.resize(schema.n_features());
    enc.feature_offset_.resize(schema.n_features());
    enc.protected_name_ = schema.protected_column;
    enc.schema_hash_ = schema.hash();

    for (std::size_t f = 0; f < schema.n_features(); ++f) {
        const auto& spec = schema.feature(f);
        enc.feature_offset_[f] = enc.columns_.size();
        switch (spec.kind) {
            case FeatureKind::Binary:
                enc.columns_.push_back(spec.name);
                break;
            case FeatureKind::Ordinal:
                enc.columns_.push_back(spec.name);
                break;
            case FeatureKind::Nominal:
                // One-hot minus the first level as reference.
                for (std::size_t l = 1; l < spec.levels.size(); ++l) {
                    enc.columns_.push_back(spec.name + "=" + spec.levels[l]);
                }
                break;
            case FeatureKind::Continuous: {
                std::vector<double> values;
                values.reserve(reference.size());
                for (const auto& inst : reference.instances()) values.push_back(inst.x[f]);
                ContinuousStats st;
                st.mean = mean(values);
                const double sd = population_sd(values);
                st.sd = sd > 0.0 ? sd : 1.0;  // constant column: center only
                enc.stats_[f] = st;
                enc.columns_.push_back(spec.name);
                break;
            }
        }
    }
    return enc;
}

Eigen::RowVectorXd Encoder::encode(const Instance& instance, bool with_protected) const {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(
        static_cast<Eigen::Index>(width(with_protected)));
    for (std::size_t f = 0; f < features_.size(); ++f) {
        const auto& spec = features_[f];
        const double v = instance.x[f];
        const auto at = static_cast<Eigen::Index>(feature_offset_[f]);
        switch (spec.kind) {
            case FeatureKind::Binary:
            case FeatureKind::Ordinal:
                row[at] = v;
                break;
            case FeatureKind::Nominal: {
                const auto level = static_cast<std::size_t>(v);
                if (level > 0) row[at + static_cast<Eigen::Index>(level) - 1] = 1.0;
                break;
            }
            case FeatureKind::Continuous:
                row[at] = (v - stats_[f].mean) / stats_[f].sd;
                break;
        }
    }
    if (with_protected) {
        row[static_cast<Eigen::Index>(columns_.size())] = instance.is_protected ? 1.0 : 0.0;
    }
    return row;
}

Eigen::MatrixXd Encoder::design(const Dataset& dataset, bool with_protected) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dataset.size()),
                      static_cast<Eigen::Index>(width(with_protected)));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = encode(dataset.instance(i), with_protected);
    }
    return m;
}

std::vector<double> Encoder::decode(const Eigen::RowVectorXd& row) const {
    if (row.size() < static_cast<Eigen::Index>(columns_.size())) {
        throw Error("decode: row narrower than the encoded layout");
    }
    std::vector<double> x(features_.size(), 0.0);
    for (std::size_t f = 0; f < features_.size(); ++f) {
        const auto& spec = features_[f];
        const auto at = static_cast<Eigen::Index>(feature_offset_[f]);
        switch (spec.kind) {
            case FeatureKind::Binary:
            case FeatureKind::Ordinal:
                x[f] = row[at];
                break;
            case FeatureKind::Nominal: {
                x[f] = 0.0;
                for (std::size_t l = 1; l < spec.levels.size(); ++l) {
                    if (row[at + static_cast<Eigen::Index>(l) - 1] > 0.5) {
                        x[f] = static_cast<double>(l);
                        break;
                    }
                }
                break;
            }
            case FeatureKind::Continuous:
                x[f] = row[at] * stats_[f].sd + stats_[f].mean;
                break;
        }
    }
    return x;
}

}  // namespace peerfair
