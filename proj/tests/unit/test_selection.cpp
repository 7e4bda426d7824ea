#include "doctest.h"

#include "lsq/selection.hpp"

#include <map>
#include <random>

using namespace lsq;

namespace {

// Textbook one-way ANOVA straight from group means, written independently.
double anova_oracle(const std::vector<double>& x, const std::vector<int>& y) {
    std::map<int, std::vector<double>> groups;
    for (std::size_t i = 0; i < x.size(); ++i) groups[y[i]].push_back(x[i]);
    double grand = 0.0;
    for (double v : x) grand += v;
    grand /= static_cast<double>(x.size());
    double ssb = 0.0, ssw = 0.0;
    for (const auto& [c, g] : groups) {
        double m = 0.0;
        for (double v : g) m += v;
        m /= static_cast<double>(g.size());
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    const double dfb = static_cast<double>(groups.size() - 1);
    const double dfw = static_cast<double>(x.size() - groups.size());
    return (ssb / dfb) / (ssw / dfw);
}

Matrix column(const std::vector<double>& x) { return Matrix(x.size(), 1, x); }

} // namespace

TEST_CASE("anova: two groups {1,2} vs {4,5}") {
    const std::vector<double> x{1, 2, 4, 5};
    const std::vector<int> y{0, 0, 1, 1};
    const double oracle = anova_oracle(x, y);
    CHECK(oracle == doctest::Approx(18.0).epsilon(1e-12));
    const auto s = anova_f_scores(column(x), y, {"x"});
    CHECK(s[0].f == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(s[0].rank == 1);
}

TEST_CASE("anova: perfect separator, constant feature, single class") {
    const std::vector<int> y{-1, -1, 0, 0, 1, 1};
    Matrix X(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        X(i, 0) = 7.0;
        X(i, 1) = y[i];
        X(i, 2) = static_cast<double>(i);
    }
    const auto s = anova_f_scores(X, y, {"const", "label", "index"});
    CHECK(s[0].f == 0.0);
    CHECK(s[1].f == kPerfectSeparation);
    CHECK(s[1].rank == 1);
    CHECK(s[2].rank == 2);
    CHECK(s[0].rank == 3);
    CHECK_THROWS_AS(anova_f_scores(X, std::vector<int>(6, 1), {"a", "b", "c"}), std::invalid_argument);
}

TEST_CASE("anova: matches oracle on random data, affine invariant") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> cls(-1, 1);
    const std::size_t rows = 300, cols = 6;
    Matrix X(rows, cols), Z(rows, cols);
    std::vector<int> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        y[i] = cls(rng);
        for (std::size_t j = 0; j < cols; ++j) {
            X(i, j) = n(rng) + 0.2 * static_cast<double>(j) * y[i];
            Z(i, j) = -3.5 * X(i, j) + 11.0;
        }
    }
    std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
    const auto s = anova_f_scores(X, y, names);
    const auto t = anova_f_scores(Z, y, names);
    for (std::size_t j = 0; j < cols; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < rows; ++i) col.push_back(X(i, j));
        CHECK(s[j].f == doctest::Approx(anova_oracle(col, y)).epsilon(1e-9));
        CHECK(t[j].f == doctest::Approx(s[j].f).epsilon(1e-9));
        CHECK(s[j].f >= 0.0);
    }
    CHECK(select_k_best(s, 3) == select_k_best(t, 3));
}

TEST_CASE("select_k_best: identity, single best, tie at the cut, registry order") {
    std::vector<FeatureScore> s{{"a", 1.0, 0}, {"b", 5.0, 0}, {"c", 3.0, 0}, {"d", 3.0, 0}};
    CHECK(select_k_best(s, 10) == std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(select_k_best(s, 1) == std::vector<std::string>{"b"});
    CHECK(select_k_best(s, 2) == std::vector<std::string>{"b", "c"});
    CHECK(select_k_best(s, 3) == std::vector<std::string>{"b", "c", "d"});
    CHECK_THROWS_AS(select_k_best({}, 3), std::invalid_argument);
    CHECK_THROWS_AS(select_k_best(s, 0), std::invalid_argument);
}
