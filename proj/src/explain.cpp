#include "remi/explain.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "remi/csv.hpp"
#include "remi/errors.hpp"
#include "remi/stats.hpp"

namespace remi {

int pick_best_fold(const EvaluationReport& report) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const FoldReport& fold : report.folds) {
        if (fold.skipped) continue;
        if (fold.auroc > best_score) {
            best_score = fold.auroc;
            best = fold.fold_id;
        }
    }
    if (best < 0) throw DataError("report has no scored folds");
    return best;
}

std::vector<Eigen::Index> truncate_for_plot(const Eigen::VectorXd& outputs,
                                            double percentile_q) {
    if (outputs.size() == 0) throw DataError("cannot truncate an empty output set");

    std::vector<double> values(outputs.data(), outputs.data() + outputs.size());
    const double cut = percentile(values, percentile_q);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(outputs.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (outputs[a] != outputs[b]) return outputs[a] < outputs[b];
        return a < b;
    });

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i : order) {
        if (outputs[i] > cut && !kept.empty()) break;
        kept.push_back(i);
    }
    return kept;
}

ScatterExport export_scatter(const FittedModel& model, const FeatureMatrix& matrix,
                             const Eigen::VectorXd& outputs, double percentile_q) {
    if (outputs.size() != matrix.n_rows())
        throw DataError("outputs do not match matrix rows");
    if (matrix.n_rows() == 0) throw DataError("cannot export an empty matrix");

    std::vector<Eigen::Index> cols;
    for (const std::string& name : model.feature_names) {
        const auto it =
            std::find(matrix.column_names.begin(), matrix.column_names.end(), name);
        if (it == matrix.column_names.end())
            throw DataError("feature matrix missing column " + name);
        cols.push_back(it - matrix.column_names.begin());
    }

    // High outputs predict changes in both directions (decrease labels are
    // magnitudes), so the change-predicting tail is always the top. Increase
    // trims the saturating top 5%; decrease trims the bottom instead, keeping
    // its change tail intact.
    const bool decrease = model.direction == "decrease";
    std::vector<Eigen::Index> kept =
        decrease ? truncate_for_plot(-outputs, percentile_q)
                 : truncate_for_plot(outputs, percentile_q);
    if (decrease) std::reverse(kept.begin(), kept.end()); // back to ascending output

    ScatterExport scatter;
    scatter.feature_names = model.feature_names;
    scatter.direction = model.direction;
    scatter.fold_id = model.fold_id;
    scatter.percentile = percentile_q;
    scatter.n_kept = static_cast<long>(kept.size());
    scatter.n_dropped = static_cast<long>(matrix.n_rows()) - scatter.n_kept;
    scatter.coordinates.resize(static_cast<Eigen::Index>(kept.size()),
                               static_cast<Eigen::Index>(cols.size()));
    scatter.outputs.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c)
            scatter.coordinates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                matrix.rows(kept[r], cols[c]);
        scatter.outputs[static_cast<Eigen::Index>(r)] = outputs[kept[r]];
    }
    return scatter;
}

std::string scatter_csv(const ScatterExport& scatter) {
    std::ostringstream out;
    for (const std::string& name : scatter.feature_names) out << name << ",";
    out << "model_output\n";
    for (Eigen::Index r = 0; r < scatter.outputs.size(); ++r) {
        for (Eigen::Index c = 0; c < scatter.coordinates.cols(); ++c)
            out << format_double(scatter.coordinates(r, c)) << ",";
        out << format_double(scatter.outputs[r]) << "\n";
    }
    return out.str();
}

std::string scatter_metadata(const ScatterExport& scatter) {
    std::ostringstream out;
    out << "direction=" << scatter.direction << "\n"
        << "fold=" << scatter.fold_id << "\n"
        << "percentile=" << format_double(scatter.percentile) << "\n"
        << "n_kept=" << scatter.n_kept << "\n"
        << "n_dropped=" << scatter.n_dropped << "\n";
    for (std::size_t j = 0; j < scatter.feature_names.size(); ++j)
        out << "feature_" << j << "=" << scatter.feature_names[j] << "\n";
    return out.str();
}

} // namespace remi
