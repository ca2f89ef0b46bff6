#include "remi/features.hpp"

#include "remi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace remi {

TrendSummary fit_trend(const Eigen::Ref<const Eigen::VectorXd>& timestamps,
                       const Eigen::Ref<const Eigen::VectorXd>& values,
                       double t0) {
    const Eigen::Index n = timestamps.size();
    if (n != values.size()) throw DataError("trend fit: timestamp/value length mismatch");
    if (n < 2) throw DataError("trend fit: needs at least 2 samples");
    if (!timestamps.allFinite() || !values.allFinite())
        throw NumericError("trend fit: non-finite sample");

    const Eigen::VectorXd u = (timestamps.array() - t0) / 60.0;
    const double u_mean = u.mean();
    const double v_mean = values.mean();
    const Eigen::ArrayXd du = u.array() - u_mean;
    const Eigen::ArrayXd dv = values.array() - v_mean;
    const double suu = (du * du).sum();
    if (suu <= 0.0) throw DataError("trend fit: degenerate time spread");

    TrendSummary out;
    out.slope_per_min = (du * dv).sum() / suu;
    out.intercept = v_mean - out.slope_per_min * u_mean;
    const Eigen::ArrayXd resid = values.array() - (out.intercept + out.slope_per_min * u.array());
    out.resid_std = std::sqrt((resid * resid).sum() / static_cast<double>(n));
    return out;
}

const std::vector<SignalKind>& feature_signal_order() {
    static const std::vector<SignalKind> order = {
        SignalKind::BIS, SignalKind::HR, SignalKind::DAP,
        SignalKind::SAP, SignalKind::MAP, SignalKind::RemiTarget,
    };
    return order;
}

const std::vector<std::string>& base_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (SignalKind kind : feature_signal_order()) {
            const std::string base(signal_name(kind));
            v.push_back(base + "_intercept");
            v.push_back(base + "_slope");
            v.push_back(base + "_std");
        }
        v.push_back("age");
        v.push_back("bmi");
        v.push_back("asa");
        return v;
    }();
    return names;
}

namespace {

// Inclusive slice [t_lo, t_hi] of a series, tolerant to float dust on the grid.
std::pair<Eigen::Index, Eigen::Index> window_span(const VitalSeries& s, double t_lo, double t_hi) {
    const double* begin = s.timestamps.data();
    const double* end = begin + s.timestamps.size();
    const double* lo = std::lower_bound(begin, end, t_lo - 1e-9);
    const double* hi = std::upper_bound(begin, end, t_hi + 1e-9);
    return {lo - begin, hi - lo};
}

} // namespace

std::optional<Eigen::VectorXd> segment_features(const Segment& segment,
                                                const PatientRecord& record,
                                                std::string* reason) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(base_feature_names().size()));
    Eigen::Index k = 0;
    for (SignalKind kind : feature_signal_order()) {
        const VitalSeries& s = record.signal(kind);
        const auto [start, len] = window_span(s, segment.obs_start_s, segment.obs_end_s);
        if (len < 2) {
            if (reason) {
                std::ostringstream os;
                os << signal_name(kind) << ": " << len << " samples in observation window ["
                   << segment.obs_start_s << ", " << segment.obs_end_s << "]";
                *reason = os.str();
            }
            return std::nullopt;
        }
        const TrendSummary trend = fit_trend(s.timestamps.segment(start, len),
                                             s.values.segment(start, len),
                                             segment.obs_start_s);
        row[k++] = trend.intercept;
        row[k++] = trend.slope_per_min;
        row[k++] = trend.resid_std;
    }
    row[k++] = static_cast<double>(record.statics.age);
    row[k++] = record.statics.bmi;
    row[k++] = static_cast<double>(record.statics.asa);
    return row;
}

FeatureMatrix build_feature_matrix(const std::vector<Segment>& segments,
                                   const std::vector<PatientRecord>& records,
                                   std::vector<SkippedSegment>* skipped) {
    std::map<std::string, const PatientRecord*> by_id;
    for (const PatientRecord& r : records) by_id[r.statics.id] = &r;

    FeatureMatrix out;
    out.column_names = base_feature_names();
    const Eigen::Index p = static_cast<Eigen::Index>(out.column_names.size());
    out.rows.resize(static_cast<Eigen::Index>(segments.size()), p);
    out.labels.resize(static_cast<Eigen::Index>(segments.size()));

    Eigen::Index n = 0;
    for (const Segment& seg : segments) {
        const auto it = by_id.find(seg.patient_id);
        if (it == by_id.end())
            throw DataError("segment references unknown patient " + seg.patient_id);
        std::string reason;
        const auto row = segment_features(seg, *it->second, &reason);
        if (!row) {
            if (skipped) skipped->push_back({seg, reason});
            continue;
        }
        out.rows.row(n) = row->transpose();
        out.labels[n] = seg.label;
        out.patient_ids.push_back(seg.patient_id);
        ++n;
    }
    out.rows.conservativeResize(n, p);
    out.labels.conservativeResize(n);
    return out;
}

ColumnStats column_stats(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) throw DataError("column stats need at least 2 rows");
    ColumnStats stats;
    stats.mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - stats.mean.transpose();
    stats.sd = (centered.array().square().colwise().sum() / static_cast<double>(n - 1))
                   .sqrt()
                   .matrix()
                   .transpose();
    return stats;
}

ZscoreFilterResult zscore_filter(const FeatureMatrix& matrix, const ColumnStats& stats,
                                 double threshold) {
    if (stats.mean.size() != matrix.n_cols())
        throw DataError("z-score stats do not match matrix width");
    if (!(threshold > 0.0)) throw ConfigError("z-score threshold must be positive");

    const Eigen::Index n = matrix.n_rows();
    const Eigen::Index p = matrix.n_cols();
    std::vector<Eigen::Index> keep;
    ZscoreFilterResult result;
    for (Eigen::Index i = 0; i < n; ++i) {
        bool ok = true;
        for (Eigen::Index j = 0; j < p && ok; ++j) {
            const double sd = stats.sd[j];
            if (sd > 0.0 && std::fabs(matrix.rows(i, j) - stats.mean[j]) > threshold * sd)
                ok = false;
        }
        if (ok) keep.push_back(i);
        else result.dropped_rows.push_back(i);
    }

    result.kept.column_names = matrix.column_names;
    result.kept.rows.resize(static_cast<Eigen::Index>(keep.size()), p);
    result.kept.labels.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        result.kept.rows.row(static_cast<Eigen::Index>(k)) = matrix.rows.row(keep[k]);
        result.kept.labels[static_cast<Eigen::Index>(k)] = matrix.labels[keep[k]];
        result.kept.patient_ids.push_back(matrix.patient_ids[static_cast<std::size_t>(keep[k])]);
    }
    return result;
}

void zscore_clamp(Eigen::Ref<Eigen::MatrixXd> rows, const ColumnStats& stats, double threshold) {
    if (stats.mean.size() != rows.cols())
        throw DataError("z-score stats do not match matrix width");
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const double sd = stats.sd[j];
        if (sd <= 0.0) continue;
        const double lo = stats.mean[j] - threshold * sd;
        const double hi = stats.mean[j] + threshold * sd;
        rows.col(j) = rows.col(j).cwiseMax(lo).cwiseMin(hi);
    }
}

namespace {

std::string monomial_name(const std::vector<std::string>& base, const std::vector<int>& combo) {
    std::string name;
    std::size_t i = 0;
    while (i < combo.size()) {
        std::size_t j = i;
        while (j < combo.size() && combo[j] == combo[i]) ++j;
        if (!name.empty()) name += "*";
        name += base[static_cast<std::size_t>(combo[i])];
        if (j - i > 1) name += "^" + std::to_string(j - i);
        i = j;
    }
    return name;
}

} // namespace

FeatureMatrix polynomial_augment(const FeatureMatrix& matrix, int degree) {
    if (degree < 1) throw ConfigError("polynomial degree must be >= 1");
    if (degree == 1) return matrix;

    const Eigen::Index n = matrix.n_rows();
    const int p = static_cast<int>(matrix.n_cols());

    std::vector<std::vector<int>> combos;
    for (int m = 2; m <= degree; ++m) {
        std::vector<int> c(static_cast<std::size_t>(m), 0);
        while (true) {
            combos.push_back(c);
            int k = m - 1;
            while (k >= 0 && c[static_cast<std::size_t>(k)] == p - 1) --k;
            if (k < 0) break;
            ++c[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < m; ++j)
                c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(k)];
        }
    }

    FeatureMatrix out;
    out.column_names = matrix.column_names;
    out.labels = matrix.labels;
    out.patient_ids = matrix.patient_ids;
    out.rows.resize(n, p + static_cast<Eigen::Index>(combos.size()));
    out.rows.leftCols(p) = matrix.rows;
    Eigen::Index col = p;
    for (const auto& combo : combos) {
        Eigen::VectorXd prod = matrix.rows.col(combo[0]);
        for (std::size_t k = 1; k < combo.size(); ++k)
            prod = prod.cwiseProduct(matrix.rows.col(combo[k]));
        out.rows.col(col++) = prod;
        out.column_names.push_back(monomial_name(matrix.column_names, combo));
    }
    return out;
}

} // namespace remi
