#include "classifier_detail.hpp"

#include <cmath>
#include <numbers>

namespace lsq {

namespace {

void log_normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double v : row) z += std::exp(v - mx);
        const double lz = mx + std::log(z);
        for (double& v : row) v = std::exp(v - lz);
    }
}

std::vector<double> log_priors(const std::vector<std::size_t>& idx, std::size_t n_classes, std::vector<double>& count) {
    count.assign(n_classes, 0.0);
    for (std::size_t c : idx) count[c] += 1.0;
    std::vector<double> out(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) out[c] = std::log(count[c] / static_cast<double>(idx.size()));
    return out;
}

} // namespace

Fitted fit_gaussian_nb(const Matrix& X, const std::vector<int>& y, const GaussianNBConfig& cfg) {
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, "gaussian_nb");
    const std::size_t k = enc.classes.size(), d = X.cols();
    GaussianNBParams p;
    std::vector<double> count;
    p.log_prior = log_priors(enc.index, k, count);
    p.mean = Matrix(k, d);
    p.var = Matrix(k, d);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) p.mean(enc.index[i], j) += X(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) p.mean(c, j) /= count[c];
    }
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double e = X(i, j) - p.mean(enc.index[i], j);
            p.var(enc.index[i], j) += e * e;
        }
    }
    // floor relative to the widest feature so a constant column cannot divide by zero
    double widest = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) m += X(i, j);
        m /= static_cast<double>(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) v += (X(i, j) - m) * (X(i, j) - m);
        widest = std::max(widest, v / static_cast<double>(X.rows()));
    }
    const double floor = cfg.var_smoothing * (widest > 0.0 ? widest : 1.0);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) p.var(c, j) = std::max(p.var(c, j) / count[c], floor);
    }
    Fitted f{{Algorithm::gaussian_nb, enc.classes, d, std::move(p)}, {}};
    detail::finish_report(f, X, y, sw);
    return f;
}

Fitted fit_bernoulli_nb(const Matrix& X, const std::vector<int>& y, const BernoulliNBConfig& cfg) {
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, "bernoulli_nb");
    const std::size_t k = enc.classes.size(), d = X.cols();
    BernoulliNBParams p;
    p.threshold = cfg.binarize_threshold;
    std::vector<double> count;
    p.log_prior = log_priors(enc.index, k, count);
    Matrix ones(k, d);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (X(i, j) > p.threshold) ones(enc.index[i], j) += 1.0;
        }
    }
    p.log_p = Matrix(k, d);
    p.log_q = Matrix(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            const double rate = (ones(c, j) + 1.0) / (count[c] + 2.0);
            p.log_p(c, j) = std::log(rate);
            p.log_q(c, j) = std::log1p(-rate);
        }
    }
    Fitted f{{Algorithm::bernoulli_nb, enc.classes, d, std::move(p)}, {}};
    detail::finish_report(f, X, y, sw);
    return f;
}

namespace detail {

Matrix gaussian_nb_scores(const GaussianNBParams& p, const Matrix& X) {
    const std::size_t k = p.log_prior.size();
    Matrix out(X.rows(), k);
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            double s = p.log_prior[c];
            for (std::size_t j = 0; j < X.cols(); ++j) {
                const double v = p.var(c, j), e = X(r, j) - p.mean(c, j);
                s -= 0.5 * (log_2pi + std::log(v) + e * e / v);
            }
            out(r, c) = s;
        }
    }
    log_normalize_rows(out);
    return out;
}

Matrix bernoulli_nb_scores(const BernoulliNBParams& p, const Matrix& X) {
    const std::size_t k = p.log_prior.size();
    Matrix out(X.rows(), k);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            double s = p.log_prior[c];
            for (std::size_t j = 0; j < X.cols(); ++j) s += X(r, j) > p.threshold ? p.log_p(c, j) : p.log_q(c, j);
            out(r, c) = s;
        }
    }
    log_normalize_rows(out);
    return out;
}

} // namespace detail

} // namespace lsq
