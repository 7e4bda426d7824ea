#include "classifier_detail.hpp"
#include "lsq/random.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace lsq {

namespace {

// Target in {-1, +1} for binary problem `p`.
std::vector<double> binary_targets(const detail::Encoded& enc, std::size_t p) {
    const std::size_t positive = detail::single_binary(enc.classes.size()) ? 1 : p;
    std::vector<double> t(enc.index.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = enc.index[i] == positive ? 1.0 : -1.0;
    return t;
}

std::size_t problem_count(std::size_t n_classes) {
    if (n_classes < 2) return 0;
    return detail::single_binary(n_classes) ? 1 : n_classes;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct BinaryFit {
    std::vector<double> w;
    double b = 0.0;
    int iterations = 0;
    bool converged = false;
};

// log(1 + exp(-m)) without overflow.
double log_loss_margin(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double penalty_of(const std::vector<double>& w, const LogisticConfig& cfg) {
    double p = 0.0;
    for (double v : w) p += cfg.penalty == Penalty::l1 ? std::abs(v) : 0.5 * v * v;
    return cfg.lambda * p;
}

// Proximal Newton on the mean logistic loss plus penalty; the intercept is not
// penalized. Each outer step minimizes the local quadratic model plus penalty
// by coordinate descent, then backtracks along that direction.
BinaryFit logistic_binary(const Matrix& X, const std::vector<double>& t, const LogisticConfig& cfg) {
    const std::size_t n = X.rows(), d = X.cols(), D = d + 1; // slot d is the intercept
    const double inv_n = 1.0 / static_cast<double>(n);
    BinaryFit f;
    f.w.assign(d, 0.0);
    std::vector<double> margin(n, 0.0), g(D), H(D * D), dir(D), Hd(D), trial(n);

    auto objective_at = [&](const std::vector<double>& m, const std::vector<double>& w) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += log_loss_margin(m[i]);
        return loss * inv_n + penalty_of(w, cfg);
    };
    double F = objective_at(margin, f.w);

    for (int it = 1; it <= cfg.max_iter; ++it) {
        f.iterations = it;
        std::fill(g.begin(), g.end(), 0.0);
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = X.row(i);
            const double p = sigmoid(-margin[i]);
            const double gi = -t[i] * p * inv_n;
            const double hi = p * (1.0 - p) * inv_n;
            for (std::size_t a = 0; a < D; ++a) {
                const double xa = a < d ? x[a] : 1.0;
                g[a] += gi * xa;
                const double hxa = hi * xa;
                for (std::size_t b2 = a; b2 < D; ++b2) H[a * D + b2] += hxa * (b2 < d ? x[b2] : 1.0);
            }
        }
        for (std::size_t a = 0; a < D; ++a) {
            for (std::size_t b2 = a + 1; b2 < D; ++b2) H[b2 * D + a] = H[a * D + b2];
        }

        // coordinate descent on g'dir + dir'H dir / 2 + penalty(w + dir)
        std::fill(dir.begin(), dir.end(), 0.0);
        std::fill(Hd.begin(), Hd.end(), 0.0);
        bool stalled = false; // a coordinate without curvature still has a descent direction
        for (int sweep = 0; sweep < 500; ++sweep) {
            double moved = 0.0;
            for (std::size_t j = 0; j < D; ++j) {
                const double h = H[j * D + j];
                const double u = (j < d ? f.w[j] : f.b) + dir[j];
                const double a = g[j] + Hd[j];
                const double h_eff = h + (j < d && cfg.penalty == Penalty::l2 ? cfg.lambda : 0.0);
                if (!(h_eff > 1e-14)) {
                    double residual = std::abs(a);
                    if (j < d && cfg.penalty == Penalty::l1) {
                        residual = u == 0.0 ? std::max(0.0, residual - cfg.lambda) : std::abs(a + cfg.lambda * (u > 0 ? 1 : -1));
                    }
                    stalled = stalled || residual > 0.0;
                    continue;
                }
                double z = u - a / h;
                if (j < d) {
                    if (cfg.penalty == Penalty::l1) {
                        const double thr = cfg.lambda / h;
                        z = z > thr ? z - thr : (z < -thr ? z + thr : 0.0);
                    } else {
                        z = (h * u - a) / (h + cfg.lambda);
                    }
                }
                const double delta = z - u;
                if (delta == 0.0) continue;
                dir[j] += delta;
                for (std::size_t k = 0; k < D; ++k) Hd[k] += delta * H[k * D + j];
                moved = std::max(moved, std::abs(delta));
            }
            if (moved < 1e-12) break;
        }

        std::vector<double> w_dir(dir.begin(), dir.begin() + static_cast<std::ptrdiff_t>(d));
        double predicted = 0.0;
        for (std::size_t a = 0; a < D; ++a) predicted += g[a] * dir[a];
        std::vector<double> w_full = f.w;
        for (std::size_t j = 0; j < d; ++j) w_full[j] += w_dir[j];
        predicted += penalty_of(w_full, cfg) - penalty_of(f.w, cfg);
        double dir_size = 0.0;
        for (double v : dir) dir_size = std::max(dir_size, std::abs(v));
        if (!(predicted < 0.0)) {
            // no descent left: an optimum only if the model step is negligible
            f.converged = !stalled && dir_size < cfg.tol;
            break;
        }

        // backtracking on the composite objective
        std::vector<double> dm(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = X.row(i);
            double s = dir[d];
            for (std::size_t j = 0; j < d; ++j) s += dir[j] * x[j];
            dm[i] = t[i] * s;
        }
        double step = 1.0, F_new = F;
        std::vector<double> w_new(d);
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = margin[i] + step * dm[i];
            for (std::size_t j = 0; j < d; ++j) w_new[j] = f.w[j] + step * dir[j];
            F_new = objective_at(trial, w_new);
            if (F_new <= F + 0.01 * step * predicted) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            f.converged = !stalled && dir_size < cfg.tol; // no further decrease is representable
            break;
        }
        f.w = w_new;
        f.b += step * dir[d];
        margin.swap(trial);
        F = F_new;
        // judged on the undamped step, so a heavily backtracked move is not mistaken for an optimum
        if (!stalled && dir_size < cfg.tol) {
            f.converged = true;
            break;
        }
    }
    return f;
}

double svm_objective(const Matrix& X, const std::vector<double>& t, const std::vector<double>& w, double b, double C) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto x = X.row(i);
        double s = b;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
        hinge += std::max(0.0, 1.0 - t[i] * s);
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return 0.5 * reg + C * hinge / static_cast<double>(X.rows());
}

BinaryFit svm_binary(const Matrix& X, const std::vector<double>& t, const SvmConfig& cfg) {
    const std::size_t n = X.rows(), d = X.cols();
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : X.row(i)) mean_sq += v * v;
    }
    mean_sq = mean_sq / static_cast<double>(n) + 1.0;
    const double eta0 = 1.0 / (1.0 + cfg.C * mean_sq);

    BinaryFit best;
    best.w.assign(d, 0.0);
    std::vector<double> w(d, 0.0), g(d);
    double b = 0.0;
    double best_obj = svm_objective(X, t, w, b, cfg.C);
    double checkpoint = best_obj;
    constexpr int kPatience = 50;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        best.iterations = it;
        std::copy(w.begin(), w.end(), g.begin());
        double gb = 0.0;
        const double scale = cfg.C / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = X.row(i);
            double s = b;
            for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
            if (t[i] * s < 1.0) {
                for (std::size_t j = 0; j < d; ++j) g[j] -= scale * t[i] * x[j];
                gb -= scale * t[i];
            }
        }
        const double eta = eta0 / std::sqrt(static_cast<double>(it));
        for (std::size_t j = 0; j < d; ++j) w[j] -= eta * g[j];
        b -= eta * gb;
        const double obj = svm_objective(X, t, w, b, cfg.C);
        if (obj < best_obj) {
            best_obj = obj;
            best.w = w;
            best.b = b;
        }
        if (it % kPatience == 0) {
            if (checkpoint - best_obj <= cfg.tol * std::max(1.0, std::abs(checkpoint))) {
                best.converged = true;
                break;
            }
            checkpoint = best_obj;
        }
    }
    return best;
}

template <class Solver>
Fitted fit_linear(Algorithm algo, const Matrix& X, const std::vector<int>& y, const char* who, Solver&& solve) {
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, who);
    const std::size_t problems = problem_count(enc.classes.size());
    LinearParams p{Matrix(problems, X.cols()), std::vector<double>(problems, 0.0)};
    Fitted f{{algo, enc.classes, X.cols(), {}}, {}};
    for (std::size_t q = 0; q < problems; ++q) {
        BinaryFit r = solve(binary_targets(enc, q), q);
        for (std::size_t j = 0; j < X.cols(); ++j) p.w(q, j) = r.w[j];
        p.b[q] = r.b;
        f.report.iterations = std::max(f.report.iterations, r.iterations);
        f.report.converged = f.report.converged && r.converged;
    }
    if (problems == 0) f.report.diagnostics.push_back("single class in training data; model predicts it always");
    f.model.params = std::move(p);
    detail::finish_report(f, X, y, sw);
    return f;
}

} // namespace

Fitted fit_logistic(const Matrix& X, const std::vector<int>& y, const LogisticConfig& cfg) {
    if (cfg.lambda < 0.0) throw std::invalid_argument("logistic: lambda must be >= 0");
    if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("logistic: empty training matrix");
    return fit_linear(Algorithm::logistic, X, y, "logistic",
                      [&](const std::vector<double>& t, std::size_t) { return logistic_binary(X, t, cfg); });
}

void sgd_step(std::vector<double>& w, double& b, std::span<const double> x, double y, double gamma, double alpha,
              double l1_ratio) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    const bool active = y * s < 1.0;
    const double shrink = 1.0 - gamma * alpha * (1.0 - l1_ratio);
    const double l1 = gamma * alpha * l1_ratio;
    for (std::size_t j = 0; j < w.size(); ++j) {
        double v = w[j] * shrink + (active ? gamma * y * x[j] : 0.0);
        if (l1 > 0.0) v = v > l1 ? v - l1 : (v < -l1 ? v + l1 : 0.0);
        w[j] = v;
    }
    if (active) b += gamma * y;
}

Fitted fit_sgd(const Matrix& X, const std::vector<int>& y, const SgdConfig& cfg) {
    if (cfg.alpha < 0.0) throw std::invalid_argument("sgd: alpha must be >= 0");
    if (cfg.l1_ratio < 0.0 || cfg.l1_ratio > 1.0) throw std::invalid_argument("sgd: l1_ratio must lie in [0, 1]");
    return fit_linear(Algorithm::sgd, X, y, "sgd", [&](const std::vector<double>& t, std::size_t q) {
        BinaryFit f;
        f.w.assign(X.cols(), 0.0);
        std::vector<std::size_t> order(X.rows());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(derive_seed(cfg.seed, q));
        double step_count = 0.0;
        for (int e = 0; e < cfg.epochs; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i : order) {
                const double gamma = cfg.eta0 / (1.0 + cfg.eta0 * cfg.alpha * step_count);
                sgd_step(f.w, f.b, X.row(i), t[i], gamma, cfg.alpha, cfg.l1_ratio);
                step_count += 1.0;
            }
        }
        f.iterations = cfg.epochs;
        f.converged = true;
        return f;
    });
}

Fitted fit_linear_svm(const Matrix& X, const std::vector<int>& y, const SvmConfig& cfg) {
    if (!(cfg.C > 0.0)) throw std::invalid_argument("linear_svm: C must be > 0");
    return fit_linear(Algorithm::linear_svm, X, y, "linear_svm",
                      [&](const std::vector<double>& t, std::size_t) { return svm_binary(X, t, cfg); });
}

namespace detail {

Matrix linear_scores(const LinearParams& p, const Matrix& X, std::size_t n_classes) {
    Matrix out(X.rows(), n_classes);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto x = X.row(r);
        for (std::size_t q = 0; q < p.w.rows(); ++q) {
            double s = p.b[q];
            for (std::size_t j = 0; j < x.size(); ++j) s += p.w(q, j) * x[j];
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
