#include "remi/sparse_regression.hpp"

#include "remi/csv.hpp"
#include "remi/errors.hpp"
#include "remi/grouping.hpp"
#include "remi/metrics.hpp"
#include "remi/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace remi {

namespace {

constexpr double kTieTol = 1e-12;       // simultaneous entry/drop window
constexpr double kStepTol = 1e-10;      // minimum relative knot separation
constexpr double kCondLimit = 1e10;     // refactorization trigger
constexpr double kCollinearTol = 1e-12; // squared-norm ratio treated as collinear

// Cholesky factor of the active-column Gram matrix, maintained under column
// insertion (one triangular solve) and removal (Givens downdate), with a full
// refactorization fallback when the diagonal spread suggests trouble.
class ActiveGram {
public:
    explicit ActiveGram(const Eigen::Ref<const Eigen::MatrixXd>& X) : X_(X) {}

    int size() const { return static_cast<int>(cols_.size()); }
    const std::vector<int>& cols() const { return cols_; }
    const Eigen::MatrixXd& active_columns() const { return XA_; }

    bool add(int j) {
        const int k = size();
        const double cn = X_.col(j).squaredNorm();
        Eigen::VectorXd w(k);
        double d2 = cn;
        if (k > 0) {
            const Eigen::VectorXd b = XA_.leftCols(k).transpose() * X_.col(j);
            w = L_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(b);
            d2 = cn - w.squaredNorm();
        }
        if (!(d2 > kCollinearTol * std::max(cn, 1e-30))) {
            // One retry from a fresh factorization before declaring collinear.
            if (k > 0) {
                refactor();
                const Eigen::VectorXd b = XA_.leftCols(k).transpose() * X_.col(j);
                w = L_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(b);
                d2 = cn - w.squaredNorm();
            }
            if (!(d2 > kCollinearTol * std::max(cn, 1e-30))) return false;
        }
        L_.conservativeResize(k + 1, k + 1);
        if (k > 0) {
            L_.row(k).head(k) = w.transpose();
            L_.col(k).head(k).setZero();
        }
        L_(k, k) = std::sqrt(d2);
        XA_.conservativeResize(X_.rows(), k + 1);
        XA_.col(k) = X_.col(j);
        cols_.push_back(j);
        return true;
    }

    void remove(int pos) {
        const int k = size();
        // Delete row pos of L, then rotate column pairs to restore the
        // triangle; the Gram product is preserved throughout.
        Eigen::MatrixXd S(k - 1, k);
        S.topRows(pos) = L_.topRows(pos);
        S.bottomRows(k - 1 - pos) = L_.bottomRows(k - 1 - pos);
        for (int i = pos; i < k - 1; ++i) {
            const double a = S(i, i);
            const double b = S(i, i + 1);
            const double r = std::hypot(a, b);
            if (r == 0.0) continue;
            const double c = a / r;
            const double s = b / r;
            for (int row = i; row < k - 1; ++row) {
                const double u = S(row, i);
                const double v = S(row, i + 1);
                S(row, i) = c * u + s * v;
                S(row, i + 1) = -s * u + c * v;
            }
        }
        L_ = S.leftCols(k - 1);
        for (int col = pos; col < k - 1; ++col)
            XA_.col(col) = XA_.col(col + 1);
        XA_.conservativeResize(X_.rows(), k - 1);
        cols_.erase(cols_.begin() + pos);
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        const int k = size();
        Eigen::VectorXd u = L_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(rhs);
        return L_.topLeftCorner(k, k).transpose().triangularView<Eigen::Upper>().solve(u);
    }

    double condition_proxy() const {
        const int k = size();
        if (k == 0) return 1.0;
        const double mx = L_.diagonal().head(k).maxCoeff();
        const double mn = L_.diagonal().head(k).minCoeff();
        if (!(mn > 0.0)) return std::numeric_limits<double>::infinity();
        return (mx / mn) * (mx / mn);
    }

    void refactor() {
        const int k = size();
        if (k == 0) return;
        const Eigen::MatrixXd gram = XA_.leftCols(k).transpose() * XA_.leftCols(k);
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
            throw NumericError("active gram matrix lost positive definiteness");
        L_ = llt.matrixL();
    }

private:
    Eigen::Ref<const Eigen::MatrixXd> X_;
    Eigen::MatrixXd XA_; // gathered active columns, entry order
    Eigen::MatrixXd L_;
    std::vector<int> cols_;
};

} // namespace

Standardized standardize(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw DataError("standardize needs at least 2 rows");
    if (y.size() != n) throw DataError("labels do not match matrix rows");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("standardize: non-finite input");

    Standardized out;
    out.params.mean = X.colwise().mean();
    out.X = X.rowwise() - out.params.mean.transpose();
    out.params.scale.resize(p);
    out.params.active.assign(static_cast<std::size_t>(p), 1);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(out.X.col(j).squaredNorm() / static_cast<double>(n - 1));
        const double tiny = 1e-12 * std::max(1.0, std::fabs(out.params.mean[j]));
        if (sd <= tiny) {
            out.params.scale[j] = 0.0;
            out.params.active[static_cast<std::size_t>(j)] = 0;
            out.X.col(j).setZero();
        } else {
            out.params.scale[j] = sd;
            out.X.col(j) /= sd;
        }
    }
    out.params.label_mean = y.mean();
    out.y = y.array() - out.params.label_mean;
    return out;
}

LarsPath lars_lasso_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y,
                         int max_active) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2) throw DataError("lasso path needs at least 2 rows");
    if (p < 1) throw DataError("lasso path needs at least 1 column");
    if (y.size() != n) throw DataError("labels do not match matrix rows");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("lasso path: non-finite input");

    if (max_active < 0) max_active = static_cast<int>(std::min<Eigen::Index>(n - 1, p));
    max_active = std::max(1, std::min<int>(max_active, static_cast<int>(p)));

    std::vector<double> knots;
    std::vector<Eigen::VectorXd> knot_coefs;
    std::vector<std::vector<int>> knot_active;

    const Eigen::VectorXd c_init = X.transpose() * y;
    double lambda0 = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
        lambda0 = std::max(lambda0, std::fabs(c_init[j]));

    if (!(lambda0 > 0.0)) {
        knots.push_back(0.0);
        knot_coefs.push_back(Eigen::VectorXd::Zero(p));
        knot_active.push_back({});
        LarsPath path;
        path.lambdas = std::move(knots);
        path.coefs = Eigen::MatrixXd::Zero(p, 1);
        path.active_sets = std::move(knot_active);
        return path;
    }

    ActiveGram gram(X);
    std::vector<double> signs;
    std::set<int> blocked; // collinear-with-active columns; cleared on set change

    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::fabs(c_init[j]) >= lambda0 - kTieTol * std::max(1.0, lambda0)) {
            if (gram.add(static_cast<int>(j)))
                signs.push_back(c_init[j] > 0 ? 1.0 : -1.0);
            else
                blocked.insert(static_cast<int>(j));
        }
    }
    if (gram.size() == 0) throw NumericError("lasso path: no usable starting column");

    knots.push_back(lambda0);
    knot_coefs.push_back(Eigen::VectorXd::Zero(p));
    knot_active.push_back(gram.cols());

    const double min_lambda = lambda0 * 1e-14;
    double lambda = lambda0;
    const int max_events = 8 * static_cast<int>(p) + 64;

    for (int event = 0; event < max_events; ++event) {
        if (gram.condition_proxy() > kCondLimit) gram.refactor();
        const int k = gram.size();
        const Eigen::MatrixXd& XA = gram.active_columns();
        const Eigen::VectorXd s_vec =
            Eigen::Map<const Eigen::VectorXd>(signs.data(), static_cast<Eigen::Index>(k));

        const Eigen::VectorXd bols = gram.solve(XA.transpose() * y);
        const Eigen::VectorXd g = gram.solve(s_vec);
        const Eigen::VectorXd r_ols = y - XA * bols;
        const Eigen::VectorXd v = XA * g;
        const Eigen::VectorXd c0 = X.transpose() * r_ols;
        const Eigen::VectorXd rho = X.transpose() * v;

        std::vector<char> is_active(static_cast<std::size_t>(p), 0);
        for (int j : gram.cols()) is_active[static_cast<std::size_t>(j)] = 1;

        const double upper = lambda * (1.0 - kStepTol);

        double lambda_entry = -1.0;
        if (k < max_active) {
            for (Eigen::Index j = 0; j < p; ++j) {
                if (is_active[static_cast<std::size_t>(j)]) continue;
                if (blocked.count(static_cast<int>(j))) continue;
                for (int branch = 0; branch < 2; ++branch) {
                    const double den = branch == 0 ? 1.0 - rho[j] : 1.0 + rho[j];
                    if (std::fabs(den) < 1e-12) continue;
                    const double cand = (branch == 0 ? c0[j] : -c0[j]) / den;
                    if (cand > min_lambda && cand < upper)
                        lambda_entry = std::max(lambda_entry, cand);
                }
            }
        }

        double lambda_drop = -1.0;
        for (int i = 0; i < k; ++i) {
            if (g[i] == 0.0) continue;
            const double cand = bols[i] / g[i];
            if (cand > min_lambda && cand < upper)
                lambda_drop = std::max(lambda_drop, cand);
        }

        const double lambda_next = std::max(lambda_entry, lambda_drop);
        if (!(lambda_next > 0.0)) {
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
            for (int i = 0; i < k; ++i) beta[gram.cols()[static_cast<std::size_t>(i)]] = bols[i];
            knots.push_back(0.0);
            knot_coefs.push_back(std::move(beta));
            knot_active.push_back(gram.cols());
            break;
        }

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (int i = 0; i < k; ++i)
            beta[gram.cols()[static_cast<std::size_t>(i)]] = bols[i] - lambda_next * g[i];

        const double tie = kTieTol * std::max(1.0, lambda_next);
        if (lambda_drop >= lambda_entry) {
            // Drop event: the crossing coefficients leave at exactly zero.
            std::vector<int> positions;
            for (int i = 0; i < k; ++i) {
                if (g[i] == 0.0) continue;
                const double cand = bols[i] / g[i];
                if (cand > min_lambda && cand < upper && cand >= lambda_next - tie)
                    positions.push_back(i);
            }
            for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
                beta[gram.cols()[static_cast<std::size_t>(*it)]] = 0.0;
                gram.remove(*it);
                signs.erase(signs.begin() + *it);
            }
            blocked.clear();
        } else {
            // Entry event; equal correlations enter together.
            bool added = false;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (is_active[static_cast<std::size_t>(j)]) continue;
                if (blocked.count(static_cast<int>(j))) continue;
                double best = -1.0;
                for (int branch = 0; branch < 2; ++branch) {
                    const double den = branch == 0 ? 1.0 - rho[j] : 1.0 + rho[j];
                    if (std::fabs(den) < 1e-12) continue;
                    const double cand = (branch == 0 ? c0[j] : -c0[j]) / den;
                    if (cand > min_lambda && cand < upper) best = std::max(best, cand);
                }
                if (best >= lambda_next - tie) {
                    if (gram.add(static_cast<int>(j))) {
                        const double corr = c0[j] + lambda_next * rho[j];
                        signs.push_back(corr > 0 ? 1.0 : -1.0);
                        added = true;
                        blocked.clear();
                    } else {
                        blocked.insert(static_cast<int>(j));
                    }
                }
            }
            if (!added) continue; // everything at this knot was collinear; re-scan
        }

        knots.push_back(lambda_next);
        knot_coefs.push_back(std::move(beta));
        knot_active.push_back(gram.cols());
        lambda = lambda_next;
    }
    if (knots.back() != 0.0)
        throw NumericError("lasso path did not terminate");

    LarsPath path;
    path.lambdas = std::move(knots);
    path.coefs.resize(p, static_cast<Eigen::Index>(knot_coefs.size()));
    for (std::size_t kcol = 0; kcol < knot_coefs.size(); ++kcol)
        path.coefs.col(static_cast<Eigen::Index>(kcol)) = knot_coefs[kcol];
    path.active_sets = std::move(knot_active);
    return path;
}

Eigen::VectorXd coefficients_at(const LarsPath& path, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    const int K = path.n_knots();
    if (K == 0) throw DataError("empty path");
    if (lambda >= path.lambdas[0]) return Eigen::VectorXd::Zero(path.coefs.rows());
    for (int k = 1; k < K; ++k) {
        if (lambda >= path.lambdas[static_cast<std::size_t>(k)]) {
            const double hi = path.lambdas[static_cast<std::size_t>(k - 1)];
            const double lo = path.lambdas[static_cast<std::size_t>(k)];
            const double w = (hi - lambda) / (hi - lo);
            return path.coefs.col(k - 1) * (1.0 - w) + path.coefs.col(k) * w;
        }
    }
    return path.coefs.col(K - 1); // below an early-terminated path's last knot
}

LambdaChoice select_lambda(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const std::vector<std::string>& patient_ids,
                           int k_inner,
                           std::uint64_t seed,
                           int max_active) {
    const Eigen::Index n = X.rows();
    if (static_cast<Eigen::Index>(patient_ids.size()) != n)
        throw DataError("patient ids do not match matrix rows");

    const auto folds = grouped_row_folds(patient_ids, k_inner, seed);

    struct FoldFit {
        LarsPath path;
        double n_train = 0.0;
        Eigen::MatrixXd Xva_std;
        std::vector<char> va_labels;
    };
    std::vector<FoldFit> fits;
    int degenerate = 0;

    for (const FoldIndices& fold : folds) {
        std::vector<char> va_labels;
        long pos = 0;
        for (int i : fold.test) {
            const char b = std::fabs(y[i]) > kChangeEps ? 1 : 0;
            va_labels.push_back(b);
            pos += b;
        }
        if (pos == 0 || pos == static_cast<long>(va_labels.size())) {
            ++degenerate;
            continue;
        }

        Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(fold.train.size()), X.cols());
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(fold.train.size()));
        for (std::size_t r = 0; r < fold.train.size(); ++r) {
            Xtr.row(static_cast<Eigen::Index>(r)) = X.row(fold.train[r]);
            ytr[static_cast<Eigen::Index>(r)] = y[fold.train[r]];
        }
        Standardized std_tr = standardize(Xtr, ytr);

        FoldFit fit;
        fit.path = lars_lasso_path(std_tr.X, std_tr.y, max_active);
        fit.n_train = static_cast<double>(fold.train.size());
        fit.Xva_std.resize(static_cast<Eigen::Index>(fold.test.size()), X.cols());
        for (std::size_t r = 0; r < fold.test.size(); ++r)
            fit.Xva_std.row(static_cast<Eigen::Index>(r)) = X.row(fold.test[r]);
        fit.Xva_std.rowwise() -= std_tr.params.mean.transpose();
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (std_tr.params.active[static_cast<std::size_t>(j)])
                fit.Xva_std.col(j) /= std_tr.params.scale[j];
            else
                fit.Xva_std.col(j).setZero();
        }
        fit.va_labels = std::move(va_labels);
        fits.push_back(std::move(fit));
    }

    if (fits.empty())
        throw DataError("all inner validation folds are single-class");

    // Candidate grid: union of positive breakpoints in per-row scale.
    std::vector<double> grid;
    for (const FoldFit& fit : fits)
        for (double knot : fit.path.lambdas)
            if (knot > 0.0) grid.push_back(knot / fit.n_train);
    if (grid.empty()) throw DataError("no positive lasso path breakpoints");
    std::sort(grid.begin(), grid.end(), std::greater<>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    constexpr int kMaxGrid = 100;
    if (static_cast<int>(grid.size()) > kMaxGrid) {
        // Geometric thinning: keep the breakpoint nearest each log-spaced target.
        const double lmax = std::log(grid.front());
        const double lmin = std::log(grid.back());
        std::vector<double> thinned;
        for (int i = 0; i < kMaxGrid; ++i) {
            const double target = lmax + (lmin - lmax) * static_cast<double>(i)
                / static_cast<double>(kMaxGrid - 1);
            double best = grid.front();
            double best_gap = std::numeric_limits<double>::infinity();
            for (double gval : grid) {
                const double gap = std::fabs(std::log(gval) - target);
                if (gap < best_gap) { best_gap = gap; best = gval; }
            }
            thinned.push_back(best);
        }
        std::sort(thinned.begin(), thinned.end(), std::greater<>());
        thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
        grid = std::move(thinned);
    }

    std::vector<double> mean_score(grid.size(), 0.0);
    for (const FoldFit& fit : fits) {
        Eigen::MatrixXd B(X.cols(), static_cast<Eigen::Index>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i)
            B.col(static_cast<Eigen::Index>(i)) =
                coefficients_at(fit.path, grid[i] * fit.n_train);
        const Eigen::MatrixXd scores = fit.Xva_std * B;
        for (std::size_t i = 0; i < grid.size(); ++i)
            mean_score[i] += auroc(scores.col(static_cast<Eigen::Index>(i)), fit.va_labels);
    }
    for (double& s : mean_score) s /= static_cast<double>(fits.size());

    LambdaChoice choice;
    choice.grid_size = static_cast<int>(grid.size());
    choice.folds_used = static_cast<int>(fits.size());
    choice.lambda_per_row = grid.front();
    choice.mean_score = mean_score.front();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (mean_score[i] > choice.mean_score) {
            choice.mean_score = mean_score[i];
            choice.lambda_per_row = grid[i];
        }
    }
    return choice;
}

LassoFit fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const std::vector<std::string>& names,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   double lambda_per_row,
                   int max_active) {
    if (static_cast<Eigen::Index>(names.size()) != X.cols())
        throw DataError("column names do not match matrix width");
    if (!(lambda_per_row >= 0.0)) throw ConfigError("lambda must be non-negative");

    const Standardized std_xy = standardize(X, y);
    const LarsPath path = lars_lasso_path(std_xy.X, std_xy.y, max_active);

    LassoFit fit;
    fit.std_coefficients =
        coefficients_at(path, lambda_per_row * static_cast<double>(X.rows()));

    FittedModel& m = fit.model;
    m.label_mean = std_xy.params.label_mean;
    m.lambda_per_row = lambda_per_row;
    double intercept = std_xy.params.label_mean;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double b = fit.std_coefficients[j];
        if (b == 0.0) continue;
        const double scale = std_xy.params.scale[j];
        m.feature_names.push_back(names[static_cast<std::size_t>(j)]);
        const Eigen::Index k = static_cast<Eigen::Index>(m.feature_names.size());
        m.coefficients.conservativeResize(k);
        m.std_coefficients.conservativeResize(k);
        m.feature_mean.conservativeResize(k);
        m.feature_scale.conservativeResize(k);
        m.coefficients[k - 1] = b / scale;
        m.std_coefficients[k - 1] = b;
        m.feature_mean[k - 1] = std_xy.params.mean[j];
        m.feature_scale[k - 1] = scale;
        intercept -= (b / scale) * std_xy.params.mean[j];
    }
    m.intercept = intercept;
    return fit;
}

double predict(const FittedModel& model, const std::map<std::string, double>& row) {
    double score = model.intercept;
    for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
        const auto it = row.find(model.feature_names[j]);
        if (it == row.end())
            throw DataError("prediction row missing feature " + model.feature_names[j]);
        score += model.coefficients[static_cast<Eigen::Index>(j)] * it->second;
    }
    return score;
}

Eigen::VectorXd predict_matrix(const FittedModel& model, const FeatureMatrix& matrix) {
    Eigen::VectorXd scores =
        Eigen::VectorXd::Constant(matrix.n_rows(), model.intercept);
    for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
        const auto it = std::find(matrix.column_names.begin(), matrix.column_names.end(),
                                  model.feature_names[j]);
        if (it == matrix.column_names.end())
            throw DataError("feature matrix missing column " + model.feature_names[j]);
        const Eigen::Index col = it - matrix.column_names.begin();
        scores += model.coefficients[static_cast<Eigen::Index>(j)] * matrix.rows.col(col);
    }
    return scores;
}

std::string serialize_model(const FittedModel& model) {
    std::ostringstream os;
    os << "model_format = 1\n";
    os << "direction = " << model.direction << "\n";
    os << "framing = " << model.framing << "\n";
    os << "fold = " << model.fold_id << "\n";
    os << "degree = " << model.degree << "\n";
    os << "lambda_per_row = " << format_double(model.lambda_per_row) << "\n";
    os << "inner_auroc = " << format_double(model.inner_score) << "\n";
    os << "label_mean = " << format_double(model.label_mean) << "\n";
    os << "intercept = " << format_double(model.intercept) << "\n";
    os << "n_features = " << model.feature_names.size() << "\n";
    for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        os << "feature_" << j << "_name = " << model.feature_names[j] << "\n";
        os << "feature_" << j << "_coef = " << format_double(model.coefficients[idx]) << "\n";
        os << "feature_" << j << "_std_coef = " << format_double(model.std_coefficients[idx]) << "\n";
        os << "feature_" << j << "_mean = " << format_double(model.feature_mean[idx]) << "\n";
        os << "feature_" << j << "_scale = " << format_double(model.feature_scale[idx]) << "\n";
    }
    return os.str();
}

OlsInference ols_inference(const FeatureMatrix& matrix, const std::vector<std::string>& columns) {
    const Eigen::Index n = matrix.n_rows();
    const Eigen::Index p = static_cast<Eigen::Index>(columns.size());
    if (p < 1) throw DataError("inference needs at least one column");
    if (n < p + 2) throw DataError("inference needs n >= p + 2 rows");

    Eigen::MatrixXd A(n, p + 1);
    A.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto it = std::find(matrix.column_names.begin(), matrix.column_names.end(),
                                  columns[static_cast<std::size_t>(j)]);
        if (it == matrix.column_names.end())
            throw DataError("feature matrix missing column " + columns[static_cast<std::size_t>(j)]);
        A.col(j + 1) = matrix.rows.col(it - matrix.column_names.begin());
    }
    if (!A.allFinite() || !matrix.labels.allFinite())
        throw NumericError("inference: non-finite input");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < p + 1) {
        const auto perm = qr.colsPermutation().indices();
        std::string names;
        for (Eigen::Index k = qr.rank(); k < p + 1; ++k) {
            const Eigen::Index orig = perm[k];
            if (!names.empty()) names += ", ";
            names += orig == 0 ? "intercept" : columns[static_cast<std::size_t>(orig - 1)];
        }
        throw NumericError("design matrix is rank deficient; collinear columns: " + names);
    }

    const Eigen::MatrixXd gram = A.transpose() * A;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericError("normal equations not positive definite");
    const Eigen::VectorXd beta = llt.solve(A.transpose() * matrix.labels);
    const Eigen::VectorXd resid = matrix.labels - A * beta;

    OlsInference out;
    out.dof = static_cast<long>(n - p - 1);
    out.sigma2 = resid.squaredNorm() / static_cast<double>(out.dof);
    const Eigen::MatrixXd gram_inv =
        llt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

    for (Eigen::Index j = 0; j < p + 1; ++j) {
        OlsFeatureInference row;
        row.name = j == 0 ? "intercept" : columns[static_cast<std::size_t>(j - 1)];
        row.coefficient = beta[j];
        row.std_error = std::sqrt(out.sigma2 * gram_inv(j, j));
        if (row.std_error > 0.0) {
            row.t_value = row.coefficient / row.std_error;
            row.p_value = student_t_two_sided_p(row.t_value, static_cast<double>(out.dof));
        } else {
            // A zero residual fit pins every coefficient exactly.
            row.t_value = 0.0;
            row.p_value = row.coefficient == 0.0 ? 1.0 : 0.0;
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace remi
