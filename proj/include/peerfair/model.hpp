#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "peerfair/encoder.hpp"

namespace peerfair {

// L2-regularized logistic regression fitted by IRLS. The intercept is not
// penalized. Serves both roles in the pipeline: outcome predictor f
// (includes_protected = true) and protected-attribute propensity g.
struct ProbabilityModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;            // aligned with feature_columns
    std::vector<std::string> feature_columns;
    double strength = 0.0;
    bool includes_protected = false;
    bool separation = false;  // hit the iteration cap on separable data
    int iterations = 0;
    std::uint64_t schema_hash = 0;

    double linear_predictor(const Eigen::RowVectorXd& row) const;
    // Always inside (0, 1); separation-flagged models clamp at 1e-6.
    double predict_row(const Eigen::RowVectorXd& row) const;
    double predict(const Encoder& encoder, const Instance& instance) const;
    std::vector<double> predict_all(const Encoder& encoder, const Dataset& dataset) const;

    std::string to_json_text() const;
    static ProbabilityModel from_json_text(const std::string& text);
};

struct IrlsOptions {
    int max_iterations = 100;
    double tolerance = 1e-8;  // max absolute coefficient update
};

ProbabilityModel fit_logistic(const Eigen::MatrixXd& design, std::span<const int> labels,
                              double strength, const IrlsOptions& options = {});

enum class ModelTarget { Outcome, Protected };

struct ModelSelectionReport {
    ModelTarget target = ModelTarget::Outcome;
    std::vector<double> grid;          // ascending
    std::vector<double> mean_cv_auc;   // parallel to grid
    std::vector<int> folds_used;       // non-degenerate folds per candidate
    double chosen_strength = 0.0;
    double test_auc = std::numeric_limits<double>::quiet_NaN();
    std::size_t skipped_folds = 0;
};

// Grid search by mean stratified-CV AUC; ties resolved to the smallest
// strength; the winner is refit on the full training split.
std::pair<ProbabilityModel, ModelSelectionReport> select_model(
    const Dataset& train, const Encoder& encoder, ModelTarget target,
    const std::vector<double>& grid, int folds, std::uint64_t seed);

// Mann-Whitney AUC with ties counted 0.5.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace peerfair
