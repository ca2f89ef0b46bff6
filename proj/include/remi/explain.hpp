#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "remi/model_selection.hpp"

namespace remi {

// Fold with the best test AUROC; ties go to the lowest fold id.
int pick_best_fold(const EvaluationReport& report);

// Indices of the ascending prefix of outputs whose maximum stays at or below
// the given percentile (linear interpolation) of all outputs. At least one
// point is always kept.
std::vector<Eigen::Index> truncate_for_plot(const Eigen::VectorXd& outputs,
                                            double percentile = 95.0);

struct ScatterExport {
    std::vector<std::string> feature_names; // the model's selected features
    Eigen::MatrixXd coordinates;            // kept points x features
    Eigen::VectorXd outputs;                // model output per kept point
    std::string direction;
    int fold_id = -1;
    double percentile = 95.0;
    long n_kept = 0;
    long n_dropped = 0;
};

// Scatter data in the selected-feature space, sorted ascending by output so
// the change-predicting points come last. Increase models truncate the top
// percentile tail; decrease models truncate on negated outputs (trimming the
// bottom instead) so their change-predicting high tail survives.
ScatterExport export_scatter(const FittedModel& model, const FeatureMatrix& matrix,
                             const Eigen::VectorXd& outputs, double percentile = 95.0);

// Header `<feat1>,...,<featK>,model_output`, one row per kept point.
std::string scatter_csv(const ScatterExport& scatter);

// Companion key=value block: direction, fold, truncation stats.
std::string scatter_metadata(const ScatterExport& scatter);

} // namespace remi
