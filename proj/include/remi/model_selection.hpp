#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "remi/features.hpp"
#include "remi/framing.hpp"
#include "remi/metrics.hpp"
#include "remi/sparse_regression.hpp"
#include "remi/types.hpp"

namespace remi {

struct SelectionConfig {
    double rfe_tolerance = 0.01;  // relative drop allowed vs the best score seen
    double poly_tolerance = 0.01; // relative gain required to accept the next degree
    int inner_folds = 3;
    int outer_folds = 5;
    std::uint64_t seed = 0;
    int max_degree = 3;
    int max_path_features = 40;  // active-set cap for the lasso path
    double zscore_threshold = 5.0;
};

void validate(const SelectionConfig& config);

struct PatientFold {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

// Deterministic patient-level split: every row of a patient lands on exactly
// one side of each fold.
std::vector<PatientFold> patient_kfold(const std::vector<std::string>& patient_ids,
                                       int k, std::uint64_t seed);

struct RfeStep {
    std::vector<std::string> columns; // columns evaluated at this step
    double score;                     // mean inner-validation AUROC (-inf if unscorable)
};

struct RfeResult {
    FittedModel model;
    std::vector<RfeStep> trace;
};

// Backward elimination: fit the lasso with inner-CV lambda on the current
// columns, drop the least important column (zero-coefficient columns first,
// in bulk; otherwise smallest |standardized coefficient|), stop when the
// candidate's score falls more than rfe_tolerance (relative) below the best
// score seen. Returns the model before the violating drop plus the trace.
// The same shuffle_seed is used for every inner split, so the trace is
// reproducible bit for bit.
RfeResult rfe(const FeatureMatrix& matrix, const SelectionConfig& config,
              std::uint64_t shuffle_seed);

struct EscalationResult {
    int degree = 1;
    RfeResult rfe;
    std::vector<double> degree_scores; // score per evaluated degree, starting at 1
};

// Polynomial-order escalation: run rfe at degree 1, 2, ... on the augmented
// matrix; accept degree d+1 only if its score beats degree d by more than
// poly_tolerance relative.
EscalationResult escalate_polynomial(const FeatureMatrix& base,
                                     const SelectionConfig& config,
                                     std::uint64_t shuffle_seed);

struct FoldReport {
    int fold_id = 0;
    bool skipped = false;
    std::string skip_reason;

    int degree = 1;
    long n_train_rows = 0;
    long n_test_rows = 0;
    double test_prevalence = 0.0;
    double auroc = 0.0;
    double auprc = 0.0;
    OperatingPoint youden;
    double lambda_per_row = 0.0;
    double inner_score = 0.0;
    FittedModel model;
    std::vector<RfeStep> rfe_trace;

    // Test-side artifacts for explanation exports (clamped and augmented to
    // the fold's degree).
    FeatureMatrix test_matrix;
    Eigen::VectorXd test_scores;
};

struct EvaluationReport {
    std::string direction;
    FramingConfig framing;
    SelectionConfig selection;
    long n_patients = 0;
    ExclusionCounts exclusions;
    long skipped_feature_rows = 0;
    double dataset_prevalence = 0.0;
    std::vector<FoldReport> folds; // fold order, skipped folds included
    std::vector<std::string> warnings;
};

// Nested patient-level cross-validation over the full pipeline: frame,
// label by direction, extract features once, then per outer fold compute
// z-stats on the training rows, filter, escalate/eliminate, and score the
// held-out patients. Training artifacts depend only on training data.
// jobs > 1 runs outer folds concurrently; results are merged in fold order
// and are identical to the serial run.
EvaluationReport run_experiment(const std::vector<PatientRecord>& records,
                                const FramingConfig& framing,
                                const SelectionConfig& selection,
                                int jobs = 1);

// One block per fold plus a mean [min, max] aggregate block.
std::string report_text(const EvaluationReport& report);

// Per-fold metrics, one row per fold; selected features joined with ';'.
std::string report_csv(const EvaluationReport& report);

} // namespace remi
