#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace remi {

// Change indicator: |label| above a float-noise guard counts as a change.
inline constexpr double kChangeEps = 1e-9;

std::vector<char> binarize_labels(const Eigen::VectorXd& labels);

// Probability that a random positive scores above a random negative, ties
// counted half (Mann-Whitney form, one sort, tie groups handled jointly).
double auroc(const Eigen::VectorXd& scores, const std::vector<char>& labels);

// Average precision: sum over descending-score tie groups of
// (recall gain) * (precision after the group).
double auprc(const Eigen::VectorXd& scores, const std::vector<char>& labels);

// Operating points at every distinct score, decision rule score >= threshold.
// Thresholds strictly decreasing; a leading +inf point gives (fpr, tpr) = (0, 0)
// and the last point is (1, 1).
struct RocCurve {
    std::vector<double> thresholds;
    std::vector<double> tpr;
    std::vector<double> fpr;
    long n_pos = 0;
    long n_neg = 0;
};

RocCurve roc_curve(const Eigen::VectorXd& scores, const std::vector<char>& labels);

struct PrCurve {
    std::vector<double> thresholds;
    std::vector<double> precision;
    std::vector<double> recall;
};

PrCurve pr_curve(const Eigen::VectorXd& scores, const std::vector<char>& labels);

struct OperatingPoint {
    double threshold = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double precision = 0.0;
};

// Maximizes sensitivity + specificity - 1; ties resolve toward higher
// specificity. Precision is 0 when the rule predicts no positives.
OperatingPoint youden_point(const RocCurve& roc);

std::string roc_curve_csv(const RocCurve& roc);
std::string pr_curve_csv(const PrCurve& pr);

} // namespace remi
