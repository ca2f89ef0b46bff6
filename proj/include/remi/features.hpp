#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "remi/types.hpp"

namespace remi {

// Least-squares line of value against minutes since window start, plus the
// spread of the values around that line.
struct TrendSummary {
    double intercept = 0.0;     // fitted value at window start
    double slope_per_min = 0.0; // units per minute
    double resid_std = 0.0;     // population std of residuals
};

// t0 anchors the intercept; it defaults to the first sample time. Requires
// at least 2 samples and at least two distinct timestamps.
TrendSummary fit_trend(const Eigen::Ref<const Eigen::VectorXd>& timestamps,
                       const Eigen::Ref<const Eigen::VectorXd>& values,
                       double t0);

inline TrendSummary fit_trend(const Eigen::Ref<const Eigen::VectorXd>& timestamps,
                              const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (timestamps.size() == 0) return fit_trend(timestamps, values, 0.0);
    return fit_trend(timestamps, values, timestamps[0]);
}

// Signals in feature-column order (differs from storage order on purpose).
const std::vector<SignalKind>& feature_signal_order();

// 6 signals x (intercept, slope, std) then age, bmi, asa: 21 names.
const std::vector<std::string>& base_feature_names();

// Feature vector for one segment; nullopt when some signal has fewer than 2
// samples in the observation window (reason says which).
std::optional<Eigen::VectorXd> segment_features(const Segment& segment,
                                                const PatientRecord& record,
                                                std::string* reason = nullptr);

struct SkippedSegment {
    Segment segment;
    std::string reason;
};

// Stacks segment_features over segments; skipped rows are reported, not fatal.
FeatureMatrix build_feature_matrix(const std::vector<Segment>& segments,
                                   const std::vector<PatientRecord>& records,
                                   std::vector<SkippedSegment>* skipped = nullptr);

struct ColumnStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd; // sample standard deviation (n-1)
};

ColumnStats column_stats(const Eigen::Ref<const Eigen::MatrixXd>& rows);

struct ZscoreFilterResult {
    FeatureMatrix kept;
    std::vector<Eigen::Index> dropped_rows; // row indices in the input
};

// Drops training rows with any |z| > threshold under the given stats.
// Zero-variance columns never drop a row.
ZscoreFilterResult zscore_filter(const FeatureMatrix& matrix, const ColumnStats& stats,
                                 double threshold);

// Test-time policy: clamp each column into [mean - threshold*sd, mean + threshold*sd].
void zscore_clamp(Eigen::Ref<Eigen::MatrixXd> rows, const ColumnStats& stats, double threshold);

// Degree-d monomial expansion: original columns, then all products of 2..d
// distinct-or-repeated columns in lexicographic index order. Names use
// `a*b` and `a^2`. Degree 1 returns the input unchanged.
FeatureMatrix polynomial_augment(const FeatureMatrix& matrix, int degree);

} // namespace remi
