#include "peerfair/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "peerfair/common.hpp"

namespace peerfair {

using nlohmann::ordered_json;

namespace {

// log(1 + exp(eta)) without overflow.
double log1pexp(double eta) {
    if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

double penalized_loglik(const Eigen::MatrixXd& a, std::span<const int> labels,
                        const Eigen::VectorXd& theta, double strength) {
    const Eigen::VectorXd eta = a * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += labels[static_cast<std::size_t>(i)] * eta[i] - log1pexp(eta[i]);
    }
    // Intercept (slot 0) is not penalized.
    const double norm2 = theta.tail(theta.size() - 1).squaredNorm();
    return ll - 0.5 * strength * norm2;
}

}  // namespace

double ProbabilityModel::linear_predictor(const Eigen::RowVectorXd& row) const {
    if (row.size() != coefficients.size()) {
        throw Error("predict: row width " + std::to_string(row.size()) +
                    " does not match model width " + std::to_string(coefficients.size()));
    }
    return intercept + row.dot(coefficients.transpose());
}

double ProbabilityModel::predict_row(const Eigen::RowVectorXd& row) const {
    const double p = logistic(linear_predictor(row));
    return clamp_probability(p, separation ? 1e-6 : 1e-12);
}

double ProbabilityModel::predict(const Encoder& encoder, const Instance& instance) const {
    if (schema_hash != 0 && schema_hash != encoder.schema_hash()) {
        throw Error("predict: instance schema does not match the fitted model");
    }
    return predict_row(encoder.encode(instance, includes_protected));
}

std::vector<double> ProbabilityModel::predict_all(const Encoder& encoder,
                                                  const Dataset& dataset) const {
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& inst : dataset.instances()) out.push_back(predict(encoder, inst));
    return out;
}

ProbabilityModel fit_logistic(const Eigen::MatrixXd& design, std::span<const int> labels,
                              double strength, const IrlsOptions& options) {
    const auto n = design.rows();
    const auto d = design.cols();
    if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
        throw Error("fit_logistic: design/label size mismatch");
    }
    if (strength < 0.0) throw Error("fit_logistic: negative regularization strength");
    if (!design.allFinite()) throw Error("fit_logistic: non-finite design entries");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error("fit_logistic: labels must be 0/1");
        positives += static_cast<std::size_t>(y);
    }
    if (positives == 0 || positives == labels.size()) {
        throw Error("fit_logistic: both labels required");
    }

    // theta = [intercept, coefficients]; A = [1 | X].
    Eigen::MatrixXd a(n, d + 1);
    a.col(0).setOnes();
    a.rightCols(d) = design;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    const double base_rate = static_cast<double>(positives) / static_cast<double>(n);
    theta[0] = std::log(base_rate / (1.0 - base_rate));

    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, strength);
    penalty[0] = 0.0;

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv[i] = labels[static_cast<std::size_t>(i)];

    double objective = penalized_loglik(a, labels, theta, strength);
    bool converged = false;
    int iter = 0;
    Eigen::VectorXd p(n), w(n), grad(d + 1);
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd eta = a * theta;
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = logistic(eta[i]);
            w[i] = p[i] * (1.0 - p[i]);
        }
        grad = a.transpose() * (yv - p) - penalty.cwiseProduct(theta);
        Eigen::MatrixXd hessian = a.transpose() * w.asDiagonal() * a;
        hessian.diagonal() += penalty;
        hessian.diagonal().array() += 1e-10;  // solver jitter for collinear columns
        Eigen::VectorXd step = hessian.ldlt().solve(grad);

        // Step halving keeps the penalized likelihood non-decreasing.
        double scale = 1.0;
        Eigen::VectorXd candidate;
        double candidate_objective = objective;
        for (int h = 0; h < 30; ++h) {
            candidate = theta + scale * step;
            candidate_objective = penalized_loglik(a, labels, candidate, strength);
            if (candidate_objective >= objective - 1e-12) break;
            scale *= 0.5;
        }
        const double max_update = (scale * step).cwiseAbs().maxCoeff();
        theta = candidate;
        objective = candidate_objective;
        if (max_update < options.tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }

    ProbabilityModel model;
    model.intercept = theta[0];
    model.coefficients = theta.tail(d);
    model.strength = strength;
    model.iterations = iter;
    if (!converged) {
        // Complete separation keeps pushing coefficients outward when the
        // penalty cannot hold them; detect it from the training scores.
        const Eigen::VectorXd eta = a * theta;
        double min_pos = std::numeric_limits<double>::infinity();
        double max_neg = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(i)] == 1) {
                min_pos = std::min(min_pos, eta[i]);
            } else {
                max_neg = std::max(max_neg, eta[i]);
            }
        }
        model.separation = min_pos > max_neg;
    }
    return model;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw Error("auc: size mismatch or empty input");
    }
    std::size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error("auc: labels must be 0/1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n = scores.size();
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw Error("auc: both labels required");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

    // Mid-ranks over tie groups; Mann-Whitney with ties counted 0.5.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += mid_rank;
        }
        i = j + 1;
    }
    const double n1 = static_cast<double>(n_pos);
    return (rank_sum_pos - n1 * (n1 + 1.0) / 2.0) / (n1 * static_cast<double>(n_neg));
}

std::pair<ProbabilityModel, ModelSelectionReport> select_model(
    const Dataset& train, const Encoder& encoder, ModelTarget target,
    const std::vector<double>& grid, int folds, std::uint64_t seed) {
    if (folds < 2) throw UsageError("select_model: folds must be >= 2");
    if (grid.empty()) throw UsageError("select_model: empty strength grid");

    const bool with_protected = target == ModelTarget::Outcome;
    const Eigen::MatrixXd design = encoder.design(train, with_protected);
    std::vector<int> labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& inst = train.instance(i);
        labels[i] = target == ModelTarget::Outcome ? inst.y : (inst.is_protected ? 1 : 0);
    }

    // Stratified fold assignment: shuffle within each class, deal round-robin.
    std::vector<int> fold_of(train.size(), -1);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(i);
        }
        if (members.empty()) throw Error("select_model: single-class training labels");
        Rng rng(derive_seed(seed, 0xF01D5ull + static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
        }
    }

    ModelSelectionReport report;
    report.target = target;
    report.grid = grid;
    std::sort(report.grid.begin(), report.grid.end());

    std::vector<std::size_t> train_rows, valid_rows;
    for (double strength : report.grid) {
        double auc_sum = 0.0;
        int used = 0;
        for (int fold = 0; fold < folds; ++fold) {
            train_rows.clear();
            valid_rows.clear();
            for (std::size_t i = 0; i < labels.size(); ++i) {
                (fold_of[i] == fold ? valid_rows : train_rows).push_back(i);
            }
            auto has_both = [&](const std::vector<std::size_t>& rows) {
                bool seen0 = false, seen1 = false;
                for (std::size_t i : rows) (labels[i] ? seen1 : seen0) = true;
                return seen0 && seen1;
            };
            if (valid_rows.empty() || train_rows.empty() || !has_both(valid_rows) ||
                !has_both(train_rows)) {
                ++report.skipped_folds;
                continue;
            }
            Eigen::MatrixXd fold_design(static_cast<Eigen::Index>(train_rows.size()),
                                        design.cols());
            std::vector<int> fold_labels(train_rows.size());
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                fold_design.row(static_cast<Eigen::Index>(r)) =
                    design.row(static_cast<Eigen::Index>(train_rows[r]));
                fold_labels[r] = labels[train_rows[r]];
            }
            const ProbabilityModel fold_model =
                fit_logistic(fold_design, fold_labels, strength);
            std::vector<double> scores(valid_rows.size());
            std::vector<int> truth(valid_rows.size());
            for (std::size_t r = 0; r < valid_rows.size(); ++r) {
                scores[r] = fold_model.predict_row(
                    design.row(static_cast<Eigen::Index>(valid_rows[r])));
                truth[r] = labels[valid_rows[r]];
            }
            auc_sum += auc(scores, truth);
            ++used;
        }
        if (used == 0) {
            throw Error("select_model: every cross-validation fold was degenerate");
        }
        report.mean_cv_auc.push_back(auc_sum / used);
        report.folds_used.push_back(used);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < report.grid.size(); ++i) {
        if (report.mean_cv_auc[i] > report.mean_cv_auc[best]) best = i;
    }
    report.chosen_strength = report.grid[best];

    ProbabilityModel model = fit_logistic(design, labels, report.chosen_strength);
    model.includes_protected = with_protected;
    model.feature_columns = encoder.columns();
    if (with_protected) model.feature_columns.push_back(encoder.protected_column_name());
    model.schema_hash = encoder.schema_hash();
    return {std::move(model), std::move(report)};
}

std::string ProbabilityModel::to_json_text() const {
    ordered_json j;
    j["intercept"] = intercept;
    j["coefficients"] = std::vector<double>(coefficients.begin(), coefficients.end());
    j["feature_columns"] = feature_columns;
    j["strength"] = strength;
    j["includes_protected"] = includes_protected;
    j["separation"] = separation;
    j["iterations"] = iterations;
    j["schema_hash"] = schema_hash;
    return j.dump(2) + "\n";
}

ProbabilityModel ProbabilityModel::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("model: invalid JSON: ") + e.what());
    }
    ProbabilityModel m;
    m.intercept = j.at("intercept").get<double>();
    const auto coefs = j.at("coefficients").get<std::vector<double>>();
    m.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                                       static_cast<Eigen::Index>(coefs.size()));
    m.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    m.strength = j.at("strength").get<double>();
    m.includes_protected = j.at("includes_protected").get<bool>();
    m.separation = j.value("separation", false);
    m.iterations = j.value("iterations", 0);
    m.schema_hash = j.value("schema_hash", std::uint64_t{0});
    return m;
}

}  // namespace peerfair
