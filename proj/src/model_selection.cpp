#include "remi/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "remi/csv.hpp"
#include "remi/errors.hpp"
#include "remi/grouping.hpp"
#include "remi/rng.hpp"

namespace remi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<Eigen::Index>& idx) {
    FeatureMatrix out;
    out.column_names = m.column_names;
    out.rows.resize(static_cast<Eigen::Index>(idx.size()), m.rows.cols());
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    out.patient_ids.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.rows.row(static_cast<Eigen::Index>(r)) = m.rows.row(idx[r]);
        out.labels[static_cast<Eigen::Index>(r)] = m.labels[idx[r]];
        out.patient_ids.push_back(m.patient_ids[static_cast<std::size_t>(idx[r])]);
    }
    return out;
}

bool has_both_classes(const Eigen::VectorXd& labels) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        (std::fabs(labels[i]) > kChangeEps ? pos : neg) = true;
    return pos && neg;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string agg_line(std::vector<double> values) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0)
        / static_cast<double>(values.size());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return format_double(mean) + " [" + format_double(*lo) + ", " + format_double(*hi) + "]";
}

} // namespace

void validate(const SelectionConfig& config) {
    if (!(config.rfe_tolerance > 0.0)) throw ConfigError("rfe_tolerance must be > 0");
    if (!(config.poly_tolerance > 0.0)) throw ConfigError("poly_tolerance must be > 0");
    if (config.inner_folds < 2) throw ConfigError("inner_folds must be at least 2");
    if (config.outer_folds < 2) throw ConfigError("outer_folds must be at least 2");
    if (config.max_degree < 1) throw ConfigError("max_degree must be at least 1");
    if (config.max_path_features != -1 && config.max_path_features < 1)
        throw ConfigError("max_path_features must be positive or -1");
    if (!(config.zscore_threshold > 0.0)) throw ConfigError("zscore_threshold must be > 0");
}

std::vector<PatientFold> patient_kfold(const std::vector<std::string>& patient_ids,
                                       int k, std::uint64_t seed) {
    const auto groups = partition_ids(patient_ids, k, seed);
    std::vector<PatientFold> folds(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        folds[g].test_ids = groups[g];
        for (std::size_t h = 0; h < groups.size(); ++h)
            if (h != g)
                folds[g].train_ids.insert(folds[g].train_ids.end(), groups[h].begin(),
                                          groups[h].end());
    }
    return folds;
}

RfeResult rfe(const FeatureMatrix& matrix, const SelectionConfig& config,
              std::uint64_t shuffle_seed) {
    validate(config);
    if (matrix.n_cols() == 0) throw DataError("feature elimination needs at least one column");
    if (matrix.n_rows() == 0) throw DataError("feature elimination needs at least one row");

    std::vector<int> cols(static_cast<std::size_t>(matrix.n_cols()));
    std::iota(cols.begin(), cols.end(), 0);

    RfeResult out;
    double best = kNegInf;
    bool have_model = false;
    FittedModel accepted;
    Eigen::VectorXd accepted_std;

    for (;;) {
        Eigen::MatrixXd Xc(matrix.n_rows(), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::string> names;
        names.reserve(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            Xc.col(static_cast<Eigen::Index>(c)) = matrix.rows.col(cols[c]);
            names.push_back(matrix.column_names[static_cast<std::size_t>(cols[c])]);
        }

        double score = kNegInf;
        LassoFit fit;
        bool scored = false;
        try {
            const LambdaChoice choice =
                select_lambda(Xc, matrix.labels, matrix.patient_ids, config.inner_folds,
                              shuffle_seed, config.max_path_features);
            fit = fit_lasso(Xc, names, matrix.labels, choice.lambda_per_row,
                            config.max_path_features);
            fit.model.inner_score = choice.mean_score;
            score = choice.mean_score;
            scored = true;
        } catch (const DataError&) {
            if (!have_model) throw; // the full feature set itself is unscorable
        }

        out.trace.push_back({names, score});

        if (have_model && (!scored || score < best * (1.0 - config.rfe_tolerance))) {
            out.model = accepted;
            return out;
        }

        accepted = fit.model;
        accepted_std = fit.std_coefficients;
        have_model = true;
        best = std::max(best, score);

        if (cols.size() == 1) {
            out.model = accepted;
            return out;
        }

        // Victims: every zero-coefficient column at once, else the smallest
        // |standardized coefficient|; always keep at least one column.
        std::vector<std::size_t> zeros;
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (accepted_std[static_cast<Eigen::Index>(c)] == 0.0) zeros.push_back(c);
        std::vector<int> next;
        if (zeros.size() == cols.size()) {
            next.push_back(cols[0]);
        } else if (!zeros.empty()) {
            std::size_t z = 0;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                if (z < zeros.size() && zeros[z] == c) { ++z; continue; }
                next.push_back(cols[c]);
            }
        } else {
            std::size_t victim = 0;
            double smallest = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const double a = std::fabs(accepted_std[static_cast<Eigen::Index>(c)]);
                if (a < smallest) { smallest = a; victim = c; }
            }
            for (std::size_t c = 0; c < cols.size(); ++c)
                if (c != victim) next.push_back(cols[c]);
        }
        cols = std::move(next);
    }
}

EscalationResult escalate_polynomial(const FeatureMatrix& base,
                                     const SelectionConfig& config,
                                     std::uint64_t shuffle_seed) {
    validate(config);

    EscalationResult result;
    result.rfe = rfe(base, config, shuffle_seed);
    result.degree = 1;
    result.rfe.model.degree = 1;
    result.degree_scores.push_back(result.rfe.model.inner_score);

    for (int d = 2; d <= config.max_degree; ++d) {
        const FeatureMatrix augmented = polynomial_augment(base, d);
        RfeResult candidate = rfe(augmented, config, shuffle_seed);
        const double prev = result.degree_scores.back();
        const double score = candidate.model.inner_score;
        result.degree_scores.push_back(score);
        if (!(score > prev * (1.0 + config.poly_tolerance))) break;
        candidate.model.degree = d;
        result.rfe = std::move(candidate);
        result.degree = d;
    }
    return result;
}

namespace {

FoldReport evaluate_fold(int fold_id, const PatientFold& split, const FeatureMatrix& features,
                         const FramingConfig& framing, const SelectionConfig& selection,
                         std::uint64_t inner_seed) {
    FoldReport report;
    report.fold_id = fold_id;

    const std::unordered_set<std::string> test_set(split.test_ids.begin(), split.test_ids.end());
    std::vector<Eigen::Index> train_rows, test_rows;
    for (Eigen::Index r = 0; r < features.n_rows(); ++r) {
        if (test_set.count(features.patient_ids[static_cast<std::size_t>(r)]))
            test_rows.push_back(r);
        else
            train_rows.push_back(r);
    }

    try {
        if (train_rows.empty()) throw DataError("no training rows");
        if (test_rows.empty()) throw DataError("no test rows");

        FeatureMatrix train = take_rows(features, train_rows);
        FeatureMatrix test = take_rows(features, test_rows);
        if (!has_both_classes(train.labels))
            throw DataError("training rows are single-class");
        if (!has_both_classes(test.labels))
            throw DataError("test rows are single-class");

        const ColumnStats stats = column_stats(train.rows);
        ZscoreFilterResult filtered = zscore_filter(train, stats, selection.zscore_threshold);
        if (filtered.kept.n_rows() == 0)
            throw DataError("z-score filter removed every training row");
        if (!has_both_classes(filtered.kept.labels))
            throw DataError("training rows are single-class after z-score filter");

        EscalationResult chosen = escalate_polynomial(filtered.kept, selection, inner_seed);

        zscore_clamp(test.rows, stats, selection.zscore_threshold);
        const FeatureMatrix test_aug = polynomial_augment(test, chosen.degree);
        const Eigen::VectorXd scores = predict_matrix(chosen.rfe.model, test_aug);

        const std::vector<char> labels = binarize_labels(test_aug.labels);
        long pos = 0;
        for (char b : labels) pos += b;

        report.degree = chosen.degree;
        report.n_train_rows = filtered.kept.n_rows();
        report.n_test_rows = test_aug.n_rows();
        report.test_prevalence = static_cast<double>(pos) / static_cast<double>(labels.size());
        report.auroc = auroc(scores, labels);
        report.auprc = auprc(scores, labels);
        report.youden = youden_point(roc_curve(scores, labels));
        report.lambda_per_row = chosen.rfe.model.lambda_per_row;
        report.inner_score = chosen.rfe.model.inner_score;
        report.model = chosen.rfe.model;
        report.model.direction = std::string(direction_name(framing.direction));
        report.model.framing = "obs=" + format_double(framing.obs_len_s) + "s pred="
            + format_double(framing.pred_len_s) + "s stride="
            + format_double(framing.stride_s) + "s";
        report.model.fold_id = fold_id;
        report.rfe_trace = chosen.rfe.trace;
        report.test_matrix = test_aug;
        report.test_scores = scores;
    } catch (const DataError& e) {
        report.skipped = true;
        report.skip_reason = e.what();
    }
    return report;
}

} // namespace

EvaluationReport run_experiment(const std::vector<PatientRecord>& records,
                                const FramingConfig& framing,
                                const SelectionConfig& selection,
                                int jobs) {
    validate(selection);
    if (records.empty()) throw DataError("experiment needs a nonempty cohort");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");

    EvaluationReport report;
    report.direction = std::string(direction_name(framing.direction));
    report.framing = framing;
    report.selection = selection;

    std::vector<Segment> dataset;
    for (const PatientRecord& record : records) {
        const auto segments = enumerate_segments(record, framing);
        auto [kept, counts] = apply_exclusions(segments, record, framing);
        report.exclusions.first_change += counts.first_change;
        report.exclusions.incision_guard += counts.incision_guard;
        report.exclusions.multi_change += counts.multi_change;
        report.exclusions.change_in_obs += counts.change_in_obs;
        report.exclusions.bolus += counts.bolus;
        report.exclusions.kept += counts.kept;
        auto directed = build_direction_dataset(kept, framing.direction);
        dataset.insert(dataset.end(), directed.begin(), directed.end());
    }
    if (dataset.empty()) throw DataError("framing kept no segments");

    std::vector<SkippedSegment> skipped;
    const FeatureMatrix features = build_feature_matrix(dataset, records, &skipped);
    report.skipped_feature_rows = static_cast<long>(skipped.size());
    if (features.n_rows() == 0) throw DataError("feature extraction kept no rows");

    long pos = 0;
    for (Eigen::Index i = 0; i < features.labels.size(); ++i)
        pos += std::fabs(features.labels[i]) > kChangeEps ? 1 : 0;
    report.dataset_prevalence =
        static_cast<double>(pos) / static_cast<double>(features.n_rows());

    const std::set<std::string> distinct(features.patient_ids.begin(),
                                         features.patient_ids.end());
    report.n_patients = static_cast<long>(distinct.size());

    const std::uint64_t shuffle_root = derive_seed(selection.seed, SeedStream::FoldShuffle);
    const auto folds = patient_kfold(features.patient_ids, selection.outer_folds, shuffle_root);

    report.folds.resize(folds.size());
    const auto job = [&](int f) {
        return evaluate_fold(f, folds[static_cast<std::size_t>(f)], features, framing,
                             selection,
                             derive_seed(shuffle_root, static_cast<std::uint64_t>(f) + 1));
    };
    if (jobs <= 1) {
        for (std::size_t f = 0; f < folds.size(); ++f)
            report.folds[f] = job(static_cast<int>(f));
    } else {
        for (std::size_t start = 0; start < folds.size();
             start += static_cast<std::size_t>(jobs)) {
            const std::size_t stop =
                std::min(folds.size(), start + static_cast<std::size_t>(jobs));
            std::vector<std::future<FoldReport>> batch;
            for (std::size_t f = start; f < stop; ++f)
                batch.push_back(std::async(std::launch::async, job, static_cast<int>(f)));
            for (std::size_t f = start; f < stop; ++f)
                report.folds[f] = batch[f - start].get();
        }
    }

    for (const FoldReport& fold : report.folds)
        if (fold.skipped)
            report.warnings.push_back("fold " + std::to_string(fold.fold_id)
                                      + " skipped: " + fold.skip_reason);
    return report;
}

std::string report_text(const EvaluationReport& report) {
    std::ostringstream out;
    out << "direction: " << report.direction << "\n"
        << "observation_s: " << format_double(report.framing.obs_len_s) << "\n"
        << "prediction_s: " << format_double(report.framing.pred_len_s) << "\n"
        << "stride_s: " << format_double(report.framing.stride_s) << "\n"
        << "patients: " << report.n_patients << "\n"
        << "segments_kept: " << report.exclusions.kept << "\n"
        << "segments_excluded: " << report.exclusions.excluded() << "\n"
        << "skipped_feature_rows: " << report.skipped_feature_rows << "\n"
        << "prevalence: " << format_double(report.dataset_prevalence) << "\n";

    for (const FoldReport& fold : report.folds) {
        out << "\nfold " << fold.fold_id << "\n";
        if (fold.skipped) {
            out << "  status: skipped\n  reason: " << fold.skip_reason << "\n";
            continue;
        }
        std::vector<std::string> names = fold.model.feature_names;
        out << "  status: ok\n"
            << "  degree: " << fold.degree << "\n"
            << "  n_train_rows: " << fold.n_train_rows << "\n"
            << "  n_test_rows: " << fold.n_test_rows << "\n"
            << "  test_prevalence: " << format_double(fold.test_prevalence) << "\n"
            << "  auroc: " << format_double(fold.auroc) << "\n"
            << "  auprc: " << format_double(fold.auprc) << "\n"
            << "  youden_threshold: " << format_double(fold.youden.threshold) << "\n"
            << "  sensitivity: " << format_double(fold.youden.sensitivity) << "\n"
            << "  specificity: " << format_double(fold.youden.specificity) << "\n"
            << "  precision: " << format_double(fold.youden.precision) << "\n"
            << "  lambda_per_row: " << format_double(fold.lambda_per_row) << "\n"
            << "  inner_auroc: " << format_double(fold.inner_score) << "\n"
            << "  n_features: " << names.size() << "\n"
            << "  features: " << join(names, "; ") << "\n";
    }

    std::vector<const FoldReport*> scored;
    for (const FoldReport& fold : report.folds)
        if (!fold.skipped) scored.push_back(&fold);

    out << "\naggregate";
    if (scored.empty()) {
        out << "\n  no scored folds\n";
    } else {
        const auto collect = [&](auto getter) {
            std::vector<double> v;
            for (const FoldReport* f : scored) v.push_back(getter(*f));
            return v;
        };
        out << " (mean [min, max] over " << scored.size() << " folds)\n"
            << "  auroc: " << agg_line(collect([](const FoldReport& f) { return f.auroc; }))
            << "\n"
            << "  auprc: " << agg_line(collect([](const FoldReport& f) { return f.auprc; }))
            << "\n"
            << "  sensitivity: "
            << agg_line(collect([](const FoldReport& f) { return f.youden.sensitivity; }))
            << "\n"
            << "  specificity: "
            << agg_line(collect([](const FoldReport& f) { return f.youden.specificity; }))
            << "\n"
            << "  precision: "
            << agg_line(collect([](const FoldReport& f) { return f.youden.precision; }))
            << "\n"
            << "  test_prevalence: "
            << agg_line(collect([](const FoldReport& f) { return f.test_prevalence; }))
            << "\n"
            << "  n_features: "
            << agg_line(collect([](const FoldReport& f) {
                   return static_cast<double>(f.model.feature_names.size());
               }))
            << "\n"
            << "  degree: "
            << agg_line(collect([](const FoldReport& f) {
                   return static_cast<double>(f.degree);
               }))
            << "\n";
    }

    for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string report_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "fold,status,degree,n_train_rows,n_test_rows,test_prevalence,auroc,auprc,"
           "youden_threshold,sensitivity,specificity,precision,lambda_per_row,"
           "inner_auroc,n_features,features\n";
    for (const FoldReport& fold : report.folds) {
        out << fold.fold_id << ",";
        if (fold.skipped) {
            out << "skipped,,,,,,,,,,,,,,\n";
            continue;
        }
        out << "ok," << fold.degree << "," << fold.n_train_rows << "," << fold.n_test_rows
            << "," << format_double(fold.test_prevalence) << "," << format_double(fold.auroc)
            << "," << format_double(fold.auprc) << ","
            << format_double(fold.youden.threshold) << ","
            << format_double(fold.youden.sensitivity) << ","
            << format_double(fold.youden.specificity) << ","
            << format_double(fold.youden.precision) << ","
            << format_double(fold.lambda_per_row) << "," << format_double(fold.inner_score)
            << "," << fold.model.feature_names.size() << ","
            << join(fold.model.feature_names, ";") << "\n";
    }
    return out.str();
}

} // namespace remi
