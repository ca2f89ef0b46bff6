#include "remi/metrics.hpp"

#include "remi/csv.hpp"
#include "remi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace remi {

namespace {

void check_two_classes(const std::vector<char>& labels) {
    const long p = std::count(labels.begin(), labels.end(), char(1));
    if (p == 0 || p == static_cast<long>(labels.size()))
        throw DataError("metric needs both classes present");
}

std::vector<int> order_desc(const Eigen::VectorXd& scores) {
    if (!scores.allFinite()) throw NumericError("non-finite score");
    std::vector<int> idx(static_cast<std::size_t>(scores.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    return idx;
}

} // namespace

std::vector<char> binarize_labels(const Eigen::VectorXd& labels) {
    std::vector<char> out(static_cast<std::size_t>(labels.size()));
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        out[static_cast<std::size_t>(i)] = std::fabs(labels[i]) > kChangeEps ? 1 : 0;
    return out;
}

double auroc(const Eigen::VectorXd& scores, const std::vector<char>& labels) {
    if (scores.size() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("scores and labels differ in length");
    check_two_classes(labels);

    const auto idx = order_desc(scores);
    const long n = static_cast<long>(idx.size());
    long total_pos = 0;
    for (char l : labels) total_pos += l;
    const long total_neg = n - total_pos;

    // Walk ascending so "negatives strictly below" accumulates directly.
    double u = 0.0;
    long neg_below = 0;
    long i = n - 1;
    while (i >= 0) {
        long j = i;
        const double s = scores[idx[static_cast<std::size_t>(i)]];
        long pos_g = 0, neg_g = 0;
        while (j >= 0 && scores[idx[static_cast<std::size_t>(j)]] == s) {
            if (labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]) ++pos_g;
            else ++neg_g;
            --j;
        }
        u += static_cast<double>(pos_g) * static_cast<double>(neg_below)
            + 0.5 * static_cast<double>(pos_g) * static_cast<double>(neg_g);
        neg_below += neg_g;
        i = j;
    }
    return u / (static_cast<double>(total_pos) * static_cast<double>(total_neg));
}

double auprc(const Eigen::VectorXd& scores, const std::vector<char>& labels) {
    if (scores.size() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("scores and labels differ in length");

    const auto idx = order_desc(scores);
    const long n = static_cast<long>(idx.size());
    long total_pos = 0;
    for (char l : labels) total_pos += l;
    if (total_pos == 0) throw DataError("average precision needs at least one positive");

    // Tied scores form one group: the whole group is classified positive
    // together, so precision is evaluated after the group.
    double ap = 0.0;
    double recall_prev = 0.0;
    long tp = 0, fp = 0;
    long i = 0;
    while (i < n) {
        const double s = scores[idx[static_cast<std::size_t>(i)]];
        long j = i;
        while (j < n && scores[idx[static_cast<std::size_t>(j)]] == s) {
            if (labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]) ++tp;
            else ++fp;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    return ap;
}

RocCurve roc_curve(const Eigen::VectorXd& scores, const std::vector<char>& labels) {
    if (scores.size() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("scores and labels differ in length");
    check_two_classes(labels);

    const auto idx = order_desc(scores);
    const long n = static_cast<long>(idx.size());
    RocCurve roc;
    for (char l : labels) roc.n_pos += l;
    roc.n_neg = n - roc.n_pos;

    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    roc.tpr.push_back(0.0);
    roc.fpr.push_back(0.0);

    long tp = 0, fp = 0;
    long i = 0;
    while (i < n) {
        const double s = scores[idx[static_cast<std::size_t>(i)]];
        long j = i;
        while (j < n && scores[idx[static_cast<std::size_t>(j)]] == s) {
            if (labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]) ++tp;
            else ++fp;
            ++j;
        }
        roc.thresholds.push_back(s);
        roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(roc.n_pos));
        roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(roc.n_neg));
        i = j;
    }
    return roc;
}

PrCurve pr_curve(const Eigen::VectorXd& scores, const std::vector<char>& labels) {
    if (scores.size() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("scores and labels differ in length");

    const auto idx = order_desc(scores);
    const long n = static_cast<long>(idx.size());
    long total_pos = 0;
    for (char l : labels) total_pos += l;
    if (total_pos == 0) throw DataError("precision-recall curve needs at least one positive");

    PrCurve pr;
    long tp = 0, fp = 0;
    long i = 0;
    while (i < n) {
        const double s = scores[idx[static_cast<std::size_t>(i)]];
        long j = i;
        while (j < n && scores[idx[static_cast<std::size_t>(j)]] == s) {
            if (labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]) ++tp;
            else ++fp;
            ++j;
        }
        pr.thresholds.push_back(s);
        pr.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        pr.recall.push_back(static_cast<double>(tp) / static_cast<double>(total_pos));
        i = j;
    }
    return pr;
}

OperatingPoint youden_point(const RocCurve& roc) {
    OperatingPoint best;
    double best_j = -2.0;
    for (std::size_t k = 0; k < roc.thresholds.size(); ++k) {
        const double j = roc.tpr[k] - roc.fpr[k];
        // fpr is non-decreasing along the curve, so the first maximum is the
        // one with the highest specificity.
        if (j > best_j) {
            best_j = j;
            const long tp = std::lround(roc.tpr[k] * static_cast<double>(roc.n_pos));
            const long fp = std::lround(roc.fpr[k] * static_cast<double>(roc.n_neg));
            best.threshold = roc.thresholds[k];
            best.sensitivity = roc.tpr[k];
            best.specificity = 1.0 - roc.fpr[k];
            best.precision = (tp + fp) > 0
                ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                : 0.0;
        }
    }
    return best;
}

std::string roc_curve_csv(const RocCurve& roc) {
    std::ostringstream os;
    os << "threshold,tpr,fpr\n";
    for (std::size_t k = 0; k < roc.thresholds.size(); ++k)
        os << format_double(roc.thresholds[k]) << ',' << format_double(roc.tpr[k]) << ','
           << format_double(roc.fpr[k]) << '\n';
    return os.str();
}

std::string pr_curve_csv(const PrCurve& pr) {
    std::ostringstream os;
    os << "threshold,precision,recall\n";
    for (std::size_t k = 0; k < pr.thresholds.size(); ++k)
        os << format_double(pr.thresholds[k]) << ',' << format_double(pr.precision[k]) << ','
           << format_double(pr.recall[k]) << '\n';
    return os.str();
}

} // namespace remi
