#include "doctest.h"

#include "lsq/classifiers.hpp"
#include "lsq/random.hpp"
#include "test_support.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <map>
#include <numbers>
#include <random>

using namespace lsq;
using lsq::testing::blobs;

namespace {

const std::vector<Algorithm> kAll{Algorithm::gaussian_nb,   Algorithm::bernoulli_nb,  Algorithm::logistic,
                                  Algorithm::sgd,           Algorithm::linear_svm,    Algorithm::decision_tree,
                                  Algorithm::random_forest, Algorithm::adaboost};

Matrix col(std::vector<double> x) {
    const auto n = x.size();
    return Matrix(n, 1, std::move(x));
}

double normal_pdf(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

ClassifierConfig quick_config() {
    ClassifierConfig c;
    c.forest.n_trees = 25;
    return c;
}

testing::Labeled shifted(testing::Labeled d) {
    for (std::size_t i = 0; i < d.X.rows(); ++i) {
        d.X(i, 0) -= 4.0;
        d.X(i, 1) -= 4.0;
    }
    return d;
}

// Entropy gain of every midpoint split, enumerated from scratch.
struct BruteSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double entropy_of(const std::vector<int>& labels) {
    std::map<int, double> c;
    for (int v : labels) c[v] += 1.0;
    double h = 0.0;
    for (const auto& [k, n] : c) {
        const double p = n / static_cast<double>(labels.size());
        h -= p * std::log2(p);
    }
    return h;
}

BruteSplit brute_force_root(const Matrix& X, const std::vector<int>& y) {
    BruteSplit best;
    const double parent = entropy_of(y);
    for (std::size_t f = 0; f < X.cols(); ++f) {
        std::vector<double> v;
        for (std::size_t i = 0; i < X.rows(); ++i) v.push_back(X(i, f));
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            const double thr = 0.5 * (v[k] + v[k + 1]);
            std::vector<int> l, r;
            for (std::size_t i = 0; i < X.rows(); ++i) (X(i, f) <= thr ? l : r).push_back(y[i]);
            const double n = static_cast<double>(y.size());
            const double gain = parent - l.size() / n * entropy_of(l) - r.size() / n * entropy_of(r);
            if (gain > best.gain + 1e-12) best = {static_cast<int>(f), thr, gain};
        }
    }
    return best;
}

} // namespace

// --- naive Bayes ----------------------------------------------------------------

TEST_CASE("gaussian NB: six-point posterior matches the hand computation") {
    const auto f = fit_gaussian_nb(col({1, 2, 3, 5, 6, 7}), {-1, -1, -1, 1, 1, 1});
    const double var = 2.0 / 3.0; // population variance of {1,2,3}
    for (double x : {2.5, 3.9, 4.0, 4.1, 6.0}) {
        const double a = 0.5 * normal_pdf(x, 2.0, var), b = 0.5 * normal_pdf(x, 6.0, var);
        const auto s = predict_score(f.model, col({x}));
        CHECK(s(0, 0) == doctest::Approx(a / (a + b)).epsilon(1e-12));
        CHECK(s(0, 1) == doctest::Approx(b / (a + b)).epsilon(1e-12));
    }
    CHECK(predict(f.model, col({2.5})) == std::vector<int>{-1});
    CHECK(predict(f.model, col({4.1})) == std::vector<int>{1});
    CHECK(predict_score(f.model, col({4.0}))(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gaussian NB: identical class distributions fall back to the prior; single class") {
    const auto f = fit_gaussian_nb(col({1, 2, 3, 1, 2, 3, 1, 2, 3}), {0, 0, 0, 0, 0, 0, 1, 1, 1});
    for (double x : {-10.0, 0.0, 2.0, 50.0}) CHECK(predict(f.model, col({x})) == std::vector<int>{0});
    const auto one = fit_gaussian_nb(col({1, 2, 3}), {1, 1, 1});
    CHECK(predict(one.model, col({-4, 100})) == std::vector<int>{1, 1});
    CHECK_THROWS_AS(fit_gaussian_nb(Matrix(3, 0), {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("gaussian NB: variance floor and affine invariance of the argmax") {
    Matrix X(6, 2);
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    for (std::size_t i = 0; i < 6; ++i) {
        X(i, 0) = 4.0; // constant
        X(i, 1) = static_cast<double>(i);
    }
    const auto f = fit_gaussian_nb(X, y);
    const auto& p = std::get<GaussianNBParams>(f.model.params);
    for (double v : p.var.data()) CHECK(v > 0.0);

    const auto data = blobs(300, {-1, 0, 1}, 5, 2.0, 1.5);
    Matrix scaled = data.X;
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        scaled(i, 0) = 3.0 * scaled(i, 0) - 7.0;
        scaled(i, 1) = 0.25 * scaled(i, 1) + 100.0;
    }
    const auto a = fit_gaussian_nb(data.X, data.y);
    const auto b = fit_gaussian_nb(scaled, data.y);
    CHECK(predict(a.model, data.X) == predict(b.model, scaled));
}

TEST_CASE("bernoulli NB: smoothed rates, separating feature, all-zero input") {
    Matrix X(100, 2);
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        y[i] = i < 50 ? 1 : -1;
        X(i, 0) = i < 50 ? 1.0 : -1.0;
        X(i, 1) = (i % 3 == 0) ? 1.0 : -1.0;
    }
    const auto f = fit_bernoulli_nb(X, y);
    const auto& p = std::get<BernoulliNBParams>(f.model.params);
    for (std::size_t i = 0; i < p.log_p.data().size(); ++i) {
        CHECK(p.log_p.data()[i] < 0.0);
        CHECK(p.log_q.data()[i] < 0.0);
    }
    // class 1 rate for feature 0 is (50 + 1) / (50 + 2)
    CHECK(std::exp(p.log_p(1, 0)) == doctest::Approx(51.0 / 52.0).epsilon(1e-12));
    CHECK(std::exp(p.log_p(0, 0)) == doctest::Approx(1.0 / 52.0).epsilon(1e-12));
    Matrix probe(2, 2);
    probe(0, 0) = 1.0;
    probe(1, 0) = -1.0;
    probe(0, 1) = probe(1, 1) = 1.0;
    CHECK(predict(f.model, probe) == std::vector<int>{1, -1});

    // hand posterior for x = (1, 1): rates of feature 1 are 17/52 in both classes
    const double r1 = 17.0 / 52.0;
    const double pa = 0.5 * (51.0 / 52.0) * r1, pb = 0.5 * (1.0 / 52.0) * r1;
    CHECK(predict_score(f.model, probe)(0, 1) == doctest::Approx(pa / (pa + pb)).epsilon(1e-12));

    Matrix zeros(100, 2, -1.0);
    std::vector<int> yz(100, 0);
    for (std::size_t i = 0; i < 40; ++i) yz[i] = 1;
    const auto g = fit_bernoulli_nb(zeros, yz);
    CHECK(predict(g.model, Matrix(1, 2, -1.0)) == std::vector<int>{0});
}

// --- logistic --------------------------------------------------------------------

TEST_CASE("logistic: symmetric data gives a zero intercept") {
    const auto f = fit_logistic(col({-2, -1, 1, 2}), {0, 0, 1, 1}, {Penalty::l2, 1e-3, 1000, 1e-10});
    const auto& p = std::get<LinearParams>(f.model.params);
    CHECK(std::abs(p.b[0]) < 1e-8);
    CHECK(p.w(0, 0) > 0.0);
}

TEST_CASE("logistic L1: noise weight is exactly zero, signal weight is not") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix X(200, 2);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        X(i, 0) = n(rng);
        X(i, 1) = n(rng);
        y[i] = X(i, 0) + 0.5 * n(rng) > 0 ? 1 : -1;
    }
    const auto f = fit_logistic(X, y, {Penalty::l1, 0.1, 5000, 1e-10});
    const auto& p = std::get<LinearParams>(f.model.params);
    CHECK(p.w(0, 0) != 0.0);
    CHECK(p.w(0, 1) == 0.0);
    CHECK(f.report.converged);
}

TEST_CASE("logistic: unregularized fit separates separable points") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix X(20, 2);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = u(rng);
        const double side = X(i, 0) - 0.3 * X(i, 1);
        X(i, 0) += side > 0 ? 0.2 : -0.2; // keep a margin
        y[i] = side > 0 ? 1 : 0;
    }
    const auto f = fit_logistic(X, y, {Penalty::l2, 0.0, 300, 1e-12});
    CHECK(f.report.training_accuracy == 1.0);
    CHECK_FALSE(f.report.converged);
}

TEST_CASE("logistic L1: sparsity never grows as lambda increases") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix X(300, 8);
    std::vector<int> y(300);
    for (std::size_t i = 0; i < 300; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            X(i, j) = n(rng);
            s += X(i, j) / static_cast<double>(j + 1);
        }
        y[i] = s + 0.5 * n(rng) > 0 ? 1 : 0;
    }
    std::size_t previous = 9;
    for (double lambda : {0.001, 0.01, 0.03, 0.06, 0.1, 0.2, 0.4}) {
        const auto f = fit_logistic(X, y, {Penalty::l1, lambda, 5000, 1e-10});
        const auto& p = std::get<LinearParams>(f.model.params);
        std::size_t nonzero = 0;
        for (double w : p.w.data()) nonzero += w != 0.0;
        CHECK(nonzero <= previous);
        previous = nonzero;
    }
    CHECK(previous == 0);
}

// --- SGD / SVM -------------------------------------------------------------------

TEST_CASE("sgd step: beyond the margin only the penalty acts") {
    std::vector<double> w{2.0, -1.0};
    double b = 0.5;
    const std::vector<double> x{1.0, 0.0};
    sgd_step(w, b, x, 1.0, 0.1, 0.5, 0.0); // margin 2.5
    CHECK(w[0] == doctest::Approx(2.0 * (1.0 - 0.05)).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(-1.0 * (1.0 - 0.05)).epsilon(1e-15));
    CHECK(b == 0.5);

    std::vector<double> v{2.0, -0.01};
    sgd_step(v, b, x, 1.0, 0.1, 0.5, 1.0); // pure L1: shrink by 0.05, clip at zero
    CHECK(v[0] == doctest::Approx(1.95).epsilon(1e-15));
    CHECK(v[1] == 0.0);
}

TEST_CASE("sgd: l1_ratio 0 is the ridge hinge update under the same shuffle") {
    const auto d = blobs(200, {0, 1}, 3, 2.0, 1.0);
    SgdConfig cfg;
    cfg.l1_ratio = 0.0;
    cfg.seed = 42;
    const auto f = fit_sgd(d.X, d.y, cfg);
    const auto& p = std::get<LinearParams>(f.model.params);

    // independent loop: w <- (1 - g a) w + g y x on active samples
    std::vector<double> w(2, 0.0);
    double b = 0.0;
    std::vector<std::size_t> order(200);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(42, 0));
    double t = 0.0;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            const double g = cfg.eta0 / (1.0 + cfg.eta0 * cfg.alpha * t);
            const double yi = d.y[i] == 1 ? 1.0 : -1.0;
            const double m = yi * (w[0] * d.X(i, 0) + w[1] * d.X(i, 1) + b);
            for (std::size_t j = 0; j < 2; ++j) w[j] = w[j] * (1.0 - g * cfg.alpha) + (m < 1.0 ? g * yi * d.X(i, j) : 0.0);
            if (m < 1.0) b += g * yi;
            t += 1.0;
        }
    }
    CHECK(p.w(0, 0) == doctest::Approx(w[0]).epsilon(1e-12));
    CHECK(p.w(0, 1) == doctest::Approx(w[1]).epsilon(1e-12));
    CHECK(p.b[0] == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("linear svm: symmetric pair puts the boundary at zero; duplication leaves the model unchanged") {
    SvmConfig cfg;
    cfg.C = 1000.0;
    const auto f = fit_linear_svm(col({-1, 1}), {0, 1}, cfg);
    const auto& p = std::get<LinearParams>(f.model.params);
    CHECK(p.b[0] == 0.0);
    CHECK(p.w(0, 0) > 0.0);

    const auto d = blobs(100, {0, 1}, 12, 3.0, 1.0);
    Matrix twice(0, 2);
    std::vector<int> y2;
    for (int rep = 0; rep < 2; ++rep) {
        for (std::size_t i = 0; i < 100; ++i) {
            twice.append_row(d.X.row(i));
            y2.push_back(d.y[i]);
        }
    }
    const auto a = std::get<LinearParams>(fit_linear_svm(d.X, d.y).model.params);
    const auto b = std::get<LinearParams>(fit_linear_svm(twice, y2).model.params);
    for (std::size_t j = 0; j < 2; ++j) CHECK(a.w(0, j) == doctest::Approx(b.w(0, j)).epsilon(1e-9));
    CHECK(a.b[0] == doctest::Approx(b.b[0]).epsilon(1e-9).scale(1.0));
}

// --- trees -----------------------------------------------------------------------

TEST_CASE("entropy: half split is one bit, pure is zero") {
    CHECK(entropy_bits({5, 5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(entropy_bits({7, 0}) == 0.0);
    CHECK(entropy_bits({1, 1, 1, 1}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("tree: pure node does not split; perfect splitter chosen at the root") {
    const auto pure = fit_decision_tree(col({1, 2, 3, 4}), {1, 1, 1, 1}, {8, 1});
    CHECK(std::get<TreeParams>(pure.model.params).nodes.size() == 1);

    Matrix X(8, 2);
    const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
    for (std::size_t i = 0; i < 8; ++i) {
        X(i, 0) = static_cast<double>((i * 5) % 8); // scrambled
        X(i, 1) = static_cast<double>(i);           // perfect at 3.5
    }
    const auto f = fit_decision_tree(X, y, {8, 1});
    const auto& root = std::get<TreeParams>(f.model.params).nodes[0];
    CHECK(root.feature == 1);
    CHECK(root.threshold == 3.5);
    const auto brute = brute_force_root(X, y);
    CHECK(brute.gain == doctest::Approx(1.0));
}

TEST_CASE("tree: root split equals brute-force enumeration on small datasets") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> val(0, 6), cls(-1, 1), size(4, 10), dims(1, 3);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(size(rng));
        const auto d = static_cast<std::size_t>(dims(rng));
        Matrix X(n, d);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = cls(rng);
            for (std::size_t j = 0; j < d; ++j) X(i, j) = val(rng) * 0.5;
        }
        const auto brute = brute_force_root(X, y);
        const auto f = fit_decision_tree(X, y, {1, 1});
        const auto& root = std::get<TreeParams>(f.model.params).nodes[0];
        CHECK(root.feature == brute.feature);
        if (brute.feature >= 0) {
            CHECK(root.threshold == brute.threshold);
            ++compared;
        }
    }
    CHECK(compared > 200);
}

TEST_CASE("tree: depth-2 XOR layout is learned exactly") {
    // quadrant counts 3/1 of class 0 and 2/2 of class 1 so a first split has positive gain
    const std::vector<std::array<double, 3>> pts{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 0},
                                                 {0, 1, 1}, {0, 1, 1}, {1, 0, 1}, {1, 0, 1}};
    Matrix X(8, 2);
    std::vector<int> y(8);
    for (std::size_t i = 0; i < 8; ++i) {
        X(i, 0) = pts[i][0];
        X(i, 1) = pts[i][1];
        y[i] = static_cast<int>(pts[i][2]);
    }
    const auto brute = brute_force_root(X, y);
    CHECK(brute.gain > 0.0);
    const auto f = fit_decision_tree(X, y, {2, 1});
    CHECK(std::get<TreeParams>(f.model.params).nodes[0].feature == brute.feature);
    CHECK(f.report.training_accuracy == 1.0);
}

TEST_CASE("tree: unrestricted depth memorizes; every split has positive weighted gain") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> cls(-1, 1);
    Matrix X(150, 3);
    std::vector<int> y(150);
    for (std::size_t i = 0; i < 150; ++i) {
        y[i] = cls(rng);
        for (std::size_t j = 0; j < 3; ++j) X(i, j) = n(rng);
    }
    const auto f = fit_decision_tree(X, y, {1000, 1});
    CHECK(predict(f.model, X) == y);
    const auto& nodes = std::get<TreeParams>(f.model.params).nodes;
    for (const auto& node : nodes) {
        if (node.feature < 0) continue;
        const auto& l = nodes[static_cast<std::size_t>(node.left)];
        const auto& r = nodes[static_cast<std::size_t>(node.right)];
        double nl = 0, nr = 0;
        for (double c : l.class_counts) nl += c;
        for (double c : r.class_counts) nr += c;
        const double weighted = (nl * entropy_bits(l.class_counts) + nr * entropy_bits(r.class_counts)) / (nl + nr);
        CHECK(weighted < entropy_bits(node.class_counts));
    }
}

// --- forest ----------------------------------------------------------------------

TEST_CASE("forest: one tree, all features, no bootstrap equals the decision tree") {
    const auto d = blobs(200, {-1, 0, 1}, 9, 1.5, 1.5, 3);
    ForestConfig fc;
    fc.n_trees = 1;
    fc.features_per_split = 3;
    fc.bootstrap = false;
    const auto forest = fit_random_forest(d.X, d.y, fc);
    const auto tree = fit_decision_tree(d.X, d.y, {fc.max_depth, fc.min_leaf});
    CHECK(predict(forest.model, d.X) == predict(tree.model, d.X));
}

TEST_CASE("forest: same seed gives the same forest; OOB tracks holdout error") {
    const auto d = blobs(2000, {0, 1}, 31, 1.2, 1.0, 2);
    ForestConfig fc;
    fc.n_trees = 40;
    fc.seed = 123;
    Matrix train(0, 2), test(0, 2);
    std::vector<int> ytr, yte;
    for (std::size_t i = 0; i < 2000; ++i) {
        if (i % 4 < 2) { // labels alternate, so split in pairs
            train.append_row(d.X.row(i));
            ytr.push_back(d.y[i]);
        } else {
            test.append_row(d.X.row(i));
            yte.push_back(d.y[i]);
        }
    }
    const auto a = fit_random_forest(train, ytr, fc);
    const auto b = fit_random_forest(train, ytr, fc);
    CHECK(to_json(a.model) == to_json(b.model));
    const auto oob = oob_error(a.model, train, ytr);
    const double holdout = 1.0 - accuracy(predict(a.model, test), yte);
    CHECK(oob.scored == 1000);
    CHECK(std::abs(oob.error - holdout) < 0.1);
    CHECK(holdout > 0.0);
}

// --- AdaBoost --------------------------------------------------------------------

TEST_CASE("adaboost: weight formula") {
    CHECK(adaboost_weight(0.5) == 0.0);
    CHECK(adaboost_weight(0.1) == doctest::Approx(0.5 * std::log(9.0)).epsilon(1e-15));
    CHECK(std::abs(adaboost_weight(0.1) - 1.0986122886681098) < 1e-12);
    CHECK(adaboost_weight(0.0) == doctest::Approx(0.5 * std::log(1e10 - 1.0)).epsilon(1e-15));
}

TEST_CASE("adaboost: reweighting leaves the last stump at exactly one half error") {
    const auto d = blobs(60, {-1, 1}, 4, 1.0, 1.5);
    std::vector<double> y(60), D(60, 1.0 / 60.0);
    for (std::size_t i = 0; i < 60; ++i) y[i] = d.y[i];
    for (int round = 0; round < 5; ++round) {
        const Stump s = fit_stump(d.X, y, D);
        REQUIRE(s.error < 0.5);
        const double w = adaboost_weight(s.error);
        double z = 0.0;
        for (std::size_t i = 0; i < 60; ++i) {
            D[i] *= std::exp(-w * y[i] * s.predict(d.X.row(i)));
            z += D[i];
        }
        double err = 0.0;
        for (std::size_t i = 0; i < 60; ++i) {
            D[i] /= z;
            if (s.predict(d.X.row(i)) != y[i]) err += D[i];
        }
        CHECK(err == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("adaboost: training error bound and perfect-learner halt") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto d = blobs(80, {0, 1}, seed, 1.0, 1.5);
        const auto f = fit_adaboost(d.X, d.y, {20});
        const auto& p = std::get<AdaBoostParams>(f.model.params);
        double bound = 1.0;
        for (const auto& s : p.boosters[0]) bound *= 2.0 * std::sqrt(s.error * (1.0 - s.error));
        CHECK(1.0 - f.report.training_accuracy <= bound + 1e-12);
    }
    const auto sep = fit_adaboost(col({1, 2, 3, 10, 11, 12}), {0, 0, 0, 1, 1, 1}, {50});
    const auto& p = std::get<AdaBoostParams>(sep.model.params);
    REQUIRE(p.boosters[0].size() == 1);
    CHECK(p.boosters[0][0].weight == doctest::Approx(0.5 * std::log(1e10 - 1.0)));
    CHECK(sep.report.training_accuracy == 1.0);
}

// --- shared contract ---------------------------------------------------------------

TEST_CASE("every classifier: blobs accuracy, baseline margin, contract, JSON round trip") {
    // shifted so every class owns one sign orthant; the Bernoulli model only sees signs
    auto train = shifted(blobs(500, {-1, 0, 1}, 100));
    auto test = shifted(blobs(500, {-1, 0, 1}, 200));
    const auto cfg = quick_config();
    for (Algorithm a : kAll) {
        INFO(to_string(a));
        const auto f = fit(a, train.X, train.y, cfg);
        const double acc = accuracy(predict(f.model, test.X), test.y);
        CHECK(acc >= 0.95);
        CHECK(acc >= 1.0 / 3.0 + 0.30);

        const auto scores = predict_score(f.model, test.X);
        const auto cls = predict(f.model, test.X);
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            const auto row = scores.row(r);
            const auto arg = std::max_element(row.begin(), row.end()) - row.begin();
            CHECK(f.model.classes[static_cast<std::size_t>(arg)] == cls[r]);
        }
        CHECK(predict(f.model, Matrix(0, 2)).empty());
        CHECK_THROWS_AS(predict(f.model, Matrix(1, 3)), std::invalid_argument);

        const auto restored = model_from_json(nlohmann::json::parse(to_json(f.model).dump()));
        const auto again = predict_score(restored, test.X);
        CHECK(again.data() == scores.data());

        const auto g = fit(a, train.X, train.y, cfg);
        CHECK(to_json(g.model) == to_json(f.model));
    }
}

TEST_CASE("every classifier: two-class blobs") {
    const auto train = shifted(blobs(500, {0, 1}, 300));
    const auto test = shifted(blobs(500, {0, 1}, 301));
    const auto cfg = quick_config();
    for (Algorithm a : kAll) {
        INFO(to_string(a));
        const auto f = fit(a, train.X, train.y, cfg);
        CHECK(accuracy(predict(f.model, test.X), test.y) >= 0.95);
        const auto p = class_probabilities(f.model, test.X);
        for (std::size_t r = 0; r < p.rows(); ++r) CHECK(p(r, 0) + p(r, 1) == doctest::Approx(1.0));
    }
}

TEST_CASE("parse_algorithm lists valid tags on error") {
    CHECK(parse_algorithm("adaboost") == Algorithm::adaboost);
    CHECK_THROWS_WITH_AS(parse_algorithm("svm_rbf"), doctest::Contains("gaussian_nb"), std::invalid_argument);
}
