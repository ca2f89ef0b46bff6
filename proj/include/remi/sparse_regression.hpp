#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "remi/types.hpp"

namespace remi {

struct StandardizationParams {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;       // sample sd; 0 marks a constant column
    std::vector<char> active;    // false for constant columns (zeroed, never fit)
    double label_mean = 0.0;
};

struct Standardized {
    Eigen::MatrixXd X; // centered/scaled; constant columns all-zero
    Eigen::VectorXd y; // centered
    StandardizationParams params;
};

Standardized standardize(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y);

// Piecewise-linear lasso coefficient path. lambdas are the breakpoints in the
// max-absolute-correlation scale, strictly decreasing from lambda_max (all
// coefficients zero) to either 0 (ordinary least squares on the final active
// set) or the knot where the active set reached max_active. coefs column k
// holds the coefficients at lambdas[k]; active_sets[k] is the ordered active
// set governing the segment below knot k. Between knots coefficients are
// linear in lambda.
struct LarsPath {
    std::vector<double> lambdas;
    Eigen::MatrixXd coefs; // p x n_knots
    std::vector<std::vector<int>> active_sets;

    int n_knots() const { return static_cast<int>(lambdas.size()); }
};

// Homotopy LARS with drops. Expects standardized input (the path itself only
// assumes finite columns; zero columns simply never activate). max_active < 0
// means min(n-1, p). Correlations tied within 1e-12 enter together.
LarsPath lars_lasso_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y,
                         int max_active = -1);

// Exact on knots, linear interpolation between, all-zeros above lambda_max.
// Below the last knot of an early-terminated path the last knot is held.
Eigen::VectorXd coefficients_at(const LarsPath& path, double lambda);

// Lambda in per-row scale (max correlation divided by the number of rows the
// path was fit on), which is comparable across sample sizes.
struct LambdaChoice {
    double lambda_per_row = 0.0;
    double mean_score = 0.0;   // mean inner-validation AUROC at the choice
    int grid_size = 0;
    int folds_used = 0;
};

// Inner patient-grouped cross-validation over the union of path breakpoints
// (geometrically thinned to at most 100 candidates), scored by AUROC of the
// linear predictor against binarized labels. Ties prefer the larger lambda.
// Single-class validation folds are skipped; all folds degenerate is an error.
LambdaChoice select_lambda(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const std::vector<std::string>& patient_ids,
                           int k_inner,
                           std::uint64_t seed,
                           int max_active = -1);

// A fitted sparse linear model mapped back to the original feature scale:
// score = intercept + sum_j coefficients[j] * x[feature_names[j]].
struct FittedModel {
    std::vector<std::string> feature_names; // selected (nonzero) features
    Eigen::VectorXd coefficients;           // original scale, aligned with names
    double intercept = 0.0;

    // Standardization of the selected columns, kept for audit: replaying
    // label_mean + sum_j std_coefficients[j] * (x_j - mean[j]) / scale[j]
    // reproduces the score.
    Eigen::VectorXd std_coefficients;
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_scale;
    double label_mean = 0.0;

    double lambda_per_row = 0.0;
    double inner_score = 0.0; // mean inner-validation AUROC of the selection
    std::string direction;    // "increase" or "decrease"
    std::string framing;      // short framing description
    int fold_id = -1;
    int degree = 1;
};

struct LassoFit {
    FittedModel model;                  // nonzero coefficients only
    Eigen::VectorXd std_coefficients;   // full input width, zeros where unselected
};

// Standardizes, runs the path, and reads off the solution at the given
// per-row lambda, mapped back to the original scale.
LassoFit fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const std::vector<std::string>& names,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   double lambda_per_row,
                   int max_active = -1);

double predict(const FittedModel& model, const std::map<std::string, double>& row);

// Scores a feature matrix; all selected features must be present as columns.
Eigen::VectorXd predict_matrix(const FittedModel& model, const FeatureMatrix& matrix);

// Stable key=value text form; no timestamps, fixed key order, round-trippable
// floats. Two serializations of equal models are byte-identical.
std::string serialize_model(const FittedModel& model);

struct OlsFeatureInference {
    std::string name;
    double coefficient = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    double p_value = 0.0;
};

struct OlsInference {
    std::vector<OlsFeatureInference> rows; // intercept first
    double sigma2 = 0.0;
    long dof = 0;
};

// Unpenalized least squares with intercept on a column subset, classical
// t-test p-values. Rank deficiency is an error naming the collinear columns.
OlsInference ols_inference(const FeatureMatrix& matrix, const std::vector<std::string>& columns);

} // namespace remi
