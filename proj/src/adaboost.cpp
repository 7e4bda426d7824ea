#include "classifier_detail.hpp"

#include <cmath>
#include <numeric>

namespace lsq {

namespace {

using Orders = std::vector<std::vector<std::size_t>>;

Orders sort_columns(const Matrix& X) {
    Orders o(X.cols(), std::vector<std::size_t>(X.rows()));
    for (std::size_t j = 0; j < X.cols(); ++j) {
        std::iota(o[j].begin(), o[j].end(), 0);
        std::stable_sort(o[j].begin(), o[j].end(), [&](std::size_t a, std::size_t b) { return X(a, j) < X(b, j); });
    }
    return o;
}

// Weighted error of "x > thr -> +1" for every cut of each presorted column.
Stump best_stump(const Matrix& X, const std::vector<double>& y, const std::vector<double>& w, const Orders& orders) {
    double total = 0.0, pos = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        total += w[i];
        if (y[i] > 0) pos += w[i];
    }
    Stump best;
    best.error = 2.0;
    auto consider = [&](int f, double thr, double err_plus) {
        const double e_plus = err_plus / total, e_minus = 1.0 - e_plus;
        if (e_plus < best.error - 1e-15) best = {f, thr, 1.0, 0.0, std::max(e_plus, 0.0)};
        if (e_minus < best.error - 1e-15) best = {f, thr, -1.0, 0.0, std::max(e_minus, 0.0)};
    };
    for (std::size_t j = 0; j < X.cols(); ++j) {
        const auto& o = orders[j];
        // everything above the cut: predicts +1 for all, errs on the negatives
        double err = total - pos;
        consider(static_cast<int>(j), X(o.front(), j) - 1.0, err);
        for (std::size_t i = 0; i + 1 < o.size(); ++i) {
            const std::size_t r = o[i];
            err += y[r] > 0 ? w[r] : -w[r];
            const double a = X(r, j), b = X(o[i + 1], j);
            if (a == b) continue;
            double mid = 0.5 * (a + b);
            if (!(mid < b)) mid = a;
            consider(static_cast<int>(j), mid, err);
        }
    }
    return best;
}

std::vector<Stump> boost(const Matrix& X, const std::vector<double>& y, int rounds, const Orders& orders,
                         FitReport& report) {
    const std::size_t n = X.rows();
    std::vector<double> D(n, 1.0 / static_cast<double>(n));
    std::vector<Stump> out;
    for (int t = 0; t < rounds; ++t) {
        Stump s = best_stump(X, y, D, orders);
        if (s.error >= 0.5) {
            report.diagnostics.push_back("boosting round " + std::to_string(t + 1) +
                                         " rejected: weak learner no better than chance");
            break;
        }
        s.weight = adaboost_weight(s.error);
        out.push_back(s);
        if (s.error <= 1e-10) break; // perfect learner
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            D[i] *= std::exp(-s.weight * y[i] * s.predict(X.row(i)));
            z += D[i];
        }
        for (double& d : D) d /= z;
    }
    return out;
}

} // namespace

double adaboost_weight(double eps) {
    const double e = std::max(eps, 1e-10);
    return 0.5 * std::log(1.0 / e - 1.0);
}

Stump fit_stump(const Matrix& X, const std::vector<double>& y, const std::vector<double>& weights) {
    if (X.rows() == 0 || X.cols() == 0 || y.size() != X.rows() || weights.size() != X.rows()) {
        throw std::invalid_argument("fit_stump: shape mismatch");
    }
    return best_stump(X, y, weights, sort_columns(X));
}

Fitted fit_adaboost(const Matrix& X, const std::vector<int>& y, const AdaBoostConfig& cfg) {
    if (cfg.n_rounds < 1) throw std::invalid_argument("adaboost: n_rounds must be >= 1");
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, "adaboost");
    const std::size_t k = enc.classes.size();
    const std::size_t problems = k < 2 ? 0 : (detail::single_binary(k) ? 1 : k);
    const auto orders = sort_columns(X);
    Fitted f{{Algorithm::adaboost, enc.classes, X.cols(), {}}, {}};
    AdaBoostParams p;
    for (std::size_t q = 0; q < problems; ++q) {
        const std::size_t positive = detail::single_binary(k) ? 1 : q;
        std::vector<double> t(X.rows());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = enc.index[i] == positive ? 1.0 : -1.0;
        p.boosters.push_back(boost(X, t, cfg.n_rounds, orders, f.report));
        f.report.iterations = std::max(f.report.iterations, static_cast<int>(p.boosters.back().size()));
    }
    if (problems == 0) f.report.diagnostics.push_back("single class in training data; model predicts it always");
    f.model.params = std::move(p);
    detail::finish_report(f, X, y, sw);
    return f;
}

namespace detail {

Matrix adaboost_scores(const AdaBoostParams& p, const Matrix& X, std::size_t n_classes) {
    Matrix out(X.rows(), n_classes);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto x = X.row(r);
        for (std::size_t q = 0; q < p.boosters.size(); ++q) {
            double s = 0.0;
            for (const auto& st : p.boosters[q]) s += st.weight * st.predict(x);
            if (single_binary(n_classes)) {
                out(r, 0) = -s;
                out(r, 1) = s;
            } else {
                out(r, q) = s;
            }
        }
    }
    return out;
}

} // namespace detail

} // namespace lsq
