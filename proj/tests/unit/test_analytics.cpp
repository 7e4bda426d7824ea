#include "lsq/analytics.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace lsq;
using lsq::testing::business_days;
using lsq::testing::symbol_names;

namespace {

std::vector<double> normal_series(std::size_t n, double mu, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(mu, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = N(rng);
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

// Random-walk closes with an optional hole pattern.
Panel walk(std::size_t days, std::size_t symbols, std::uint64_t seed) {
    Panel p(business_days(Date(2020, 1, 1), days), symbol_names(symbols));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 0.02);
    for (std::size_t s = 0; s < symbols; ++s) {
        double px = 50.0;
        for (std::size_t t = 0; t < days; ++t) {
            px *= std::exp(N(rng));
            p(t, s) = px;
        }
    }
    return p;
}

} // namespace

TEST_CASE("sharpe examples") {
    std::vector<double> alt;
    for (int i = 0; i < 100; ++i) alt.push_back(i % 2 ? -0.01 : 0.01);
    REQUIRE(sharpe(alt).has_value());
    CHECK(*sharpe(alt) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_FALSE(sharpe(std::vector<double>(50, 0.001)).has_value());
    CHECK_THROWS_AS(sharpe({0.01}), std::invalid_argument);

    // hand value: mean 0.02, sample sd 0.01 over [0.01, 0.02, 0.03]
    CHECK(*sharpe({0.01, 0.02, 0.03}, 0.0, 1.0) == doctest::Approx(2.0));
    CHECK(*sharpe({0.01, 0.02, 0.03}, 0.01, 4.0) == doctest::Approx(2.0));
}

TEST_CASE("sharpe of a seeded normal series approaches mu/sigma*sqrt(252)") {
    const double expect = 0.0005 / 0.01 * std::sqrt(252.0); // 0.794
    // One 2520-day path carries a sampling error near 0.32 on its own, so the
    // tolerance is checked on the average over independent paths.
    double sum = 0.0;
    const int paths = 50;
    for (int k = 0; k < paths; ++k) sum += *sharpe(normal_series(2520, 0.0005, 0.01, 100 + k));
    CHECK(std::abs(sum / paths - expect) < 0.25);

    // single path against an independent mean / sd computation
    const auto r = normal_series(2520, 0.0005, 0.01, 7);
    const double m = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    double ss = 0.0;
    for (double x : r) ss += (x - m) * (x - m);
    CHECK(*sharpe(r) == doctest::Approx(m / std::sqrt(ss / (r.size() - 1)) * std::sqrt(252.0)).epsilon(1e-12));
}

TEST_CASE("sharpe is invariant to positive scaling") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> k(0.01, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto r = normal_series(300, 0.001, 0.02, trial);
        const double base = *sharpe(r);
        const double c = k(rng);
        for (auto& x : r) x *= c;
        CHECK(rel(*sharpe(r), base) < 1e-10);
    }
}

TEST_CASE("max drawdown") {
    CHECK(max_drawdown({100, 101, 105, 130}) == 0.0);
    CHECK(max_drawdown({100, 120, 90, 130}) == doctest::Approx(-0.25));
    CHECK(max_drawdown({200, 240, 180, 260}) == doctest::Approx(-0.25));
    CHECK_THROWS_AS(max_drawdown({100, 0, 90}), std::invalid_argument);

    // brute force over every (peak, later trough) pair
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto r = normal_series(200, 0.0, 0.02, seed);
        std::vector<double> eq{100.0};
        for (double x : r) eq.push_back(eq.back() * (1.0 + x));
        double worst = 0.0;
        for (std::size_t i = 0; i < eq.size(); ++i) {
            for (std::size_t j = i; j < eq.size(); ++j) worst = std::min(worst, eq[j] / eq[i] - 1.0);
        }
        const double mdd = max_drawdown(eq);
        CHECK(mdd <= 0.0);
        CHECK(mdd == doctest::Approx(worst).epsilon(1e-12));
        std::vector<double> doubled = eq;
        for (auto& e : doubled) e *= 2.0;
        CHECK(max_drawdown(doubled) == doctest::Approx(mdd).epsilon(1e-12));
    }
}

TEST_CASE("beta decomposition") {
    const auto b = normal_series(500, 0.0003, 0.01, 1);

    SUBCASE("portfolio equals benchmark") {
        const auto d = beta_decomposition(b, b);
        CHECK(d.beta == doctest::Approx(1.0).epsilon(1e-12));
        for (double s : d.specific) CHECK(std::abs(s) < 1e-15);
    }
    SUBCASE("half the benchmark plus a constant") {
        std::vector<double> p(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) p[i] = 0.5 * b[i] + 0.0002;
        const auto d = beta_decomposition(p, b);
        CHECK(d.beta == doctest::Approx(0.5).epsilon(1e-12));
        for (std::size_t t = 125; t < b.size(); ++t) CHECK(d.rolling_beta[t] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(std::isnan(d.rolling_beta[124]));
    }
    SUBCASE("independent series") {
        const auto bb = normal_series(2000, 0.0003, 0.01, 2);
        const auto p = normal_series(2000, 0.0005, 0.01, 3);
        const auto d = beta_decomposition(p, bb);
        CHECK(std::abs(d.beta) < 0.1);
        CHECK(std::abs(d.specific_total - compound(p)) < 0.1 * std::abs(compound(p)) + 0.05);
    }
    SUBCASE("common plus specific is the total, pointwise") {
        const auto p = normal_series(b.size(), 0.0, 0.015, 4);
        const auto d = beta_decomposition(p, b);
        for (std::size_t t = 0; t < p.size(); ++t) CHECK(std::abs(d.common[t] + d.specific[t] - p[t]) <= 1e-12);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(beta_decomposition({0.1, 0.2, 0.3}, {0.01, 0.01, 0.01}), std::invalid_argument);
        CHECK_THROWS_AS(beta_decomposition({0.1, 0.2}, {0.01, 0.02, 0.03}), std::invalid_argument);
    }
}

TEST_CASE("aggregate returns") {
    const auto week = business_days(Date(2021, 1, 4), 5);
    CHECK(aggregate_returns({week, {0, 0, 0, 0, 0}}, Period::weekly).values == std::vector<double>{0.0});

    const auto two = aggregate_returns({{Date(2021, 1, 4), Date(2021, 1, 5)}, {0.10, -0.10}}, Period::weekly);
    REQUIRE(two.values.size() == 1);
    CHECK(two.values[0] == doctest::Approx(-0.01).epsilon(1e-12));

    const auto m = aggregate_returns({{Date(2021, 1, 29), Date(2021, 2, 1), Date(2021, 3, 1)}, {0.02, 0.03, -0.04}},
                                     Period::monthly);
    REQUIRE(m.values.size() == 3);
    CHECK(m.values[0] == 0.02);
    CHECK(m.dates[1] == Date(2021, 2, 1));

    // compounding over identical spans agrees
    const auto dates = business_days(Date(2019, 12, 30), 400);
    const auto r = normal_series(dates.size(), 0.0005, 0.01, 12);
    const DatedSeries daily{dates, r};
    for (auto p : {Period::weekly, Period::monthly}) {
        const auto agg = aggregate_returns(daily, p);
        CHECK(rel(compound(agg.values), compound(r)) < 1e-10);
    }
}

TEST_CASE("quantile report: perfect-foresight factor orders the buckets") {
    const auto close = walk(120, 30, 1);
    Panel factor = close.blank_like();
    for (std::size_t t = 0; t + 1 < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) factor(t, s) = close(t + 1, s) / close(t, s) - 1.0;
    }
    const auto q = quantile_report(factor, close);
    CHECK(q.stat(3, 1).mean > q.stat(2, 1).mean);
    CHECK(q.stat(2, 1).mean > q.stat(1, 1).mean);
    CHECK(q.stats.size() == 9);
    CHECK(q.cumulative[2].back() > q.cumulative[0].back());
    CHECK(q.factor_weighted.back() > 1.0);
    // the smoothed series needs 22 dates
    CHECK(std::isnan(q.top_minus_bottom_smoothed[0][20]));
    CHECK_FALSE(std::isnan(q.top_minus_bottom_smoothed[0][21]));
}

TEST_CASE("quantile report: partition, rank invariance and sign reversal") {
    const auto close = walk(80, 25, 2);
    Panel factor = close.blank_like();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) factor(t, s) = (s + t) % 7 == 0 ? kMissing : N(rng);
    }
    const auto q = quantile_report(factor, close, 4, {1, 5});

    Panel transformed = factor;
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) {
            const double v = factor(t, s);
            if (is_missing(v)) continue;
            transformed(t, s) = std::exp(3.0 * v) + 7.0;
        }
    }
    const auto qt = quantile_report(transformed, close, 4, {1, 5});
    for (int h : {1, 5}) {
        for (int k = 1; k <= 4; ++k) CHECK(qt.stat(k, h).mean == q.stat(k, h).mean);
    }

    // The swap is exact when every date fills the buckets evenly; with a
    // remainder the larger bucket stays at the low end.
    const auto full_close = walk(80, 24, 7);
    Panel full = full_close.blank_like(), full_flipped = full_close.blank_like();
    for (std::size_t t = 0; t < full.n_dates(); ++t) {
        for (std::size_t s = 0; s < full.n_symbols(); ++s) {
            full(t, s) = N(rng);
            full_flipped(t, s) = -full(t, s);
        }
    }
    const auto qa = quantile_report(full, full_close, 4, {1, 5});
    const auto qf = quantile_report(full_flipped, full_close, 4, {1, 5});
    for (int h : {1, 5}) {
        for (int k = 1; k <= 4; ++k) CHECK(qf.stat(k, h).mean == doctest::Approx(qa.stat(5 - k, h).mean).epsilon(1e-12));
    }

    // bucket sizes differ by at most one and cover every defined value
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        std::size_t defined = 0;
        for (std::size_t s = 0; s < close.n_symbols(); ++s) defined += !is_missing(factor(t, s));
        std::vector<std::size_t> size(4, 0);
        for (std::size_t r = 0; r < defined; ++r) ++size[r * 4 / defined];
        CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
        CHECK(std::accumulate(size.begin(), size.end(), std::size_t{0}) == defined);
    }
}

TEST_CASE("quantile report: null factor shows no spread") {
    const auto close = walk(1001, 60, 4);
    Panel factor = close.blank_like();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) factor(t, s) = N(rng);
    }
    const auto q = quantile_report(factor, close, 3, {1});
    const auto& top = q.stat(3, 1);
    const auto& bottom = q.stat(1, 1);
    CHECK(top.dates == 1000);
    const double se = std::sqrt(top.std_error * top.std_error + bottom.std_error * bottom.std_error);
    CHECK(std::abs(top.mean - bottom.mean) < 2.0 * se);
}

TEST_CASE("quantile report: sparse dates are skipped, bad input rejected") {
    auto close = walk(10, 5, 6);
    Panel factor = close.blank_like();
    for (std::size_t s = 0; s < 2; ++s) factor(3, s) = static_cast<double>(s);
    for (std::size_t s = 0; s < 5; ++s) factor(4, s) = static_cast<double>(s);
    const auto q = quantile_report(factor, close);
    REQUIRE(q.dates.size() == 1);
    CHECK(q.dates[0] == close.dates()[4]);
    CHECK_THROWS_AS(quantile_report(factor, close, 1), std::invalid_argument);
    CHECK_THROWS_AS(quantile_report(factor, walk(11, 5, 6)), std::invalid_argument);
}

TEST_CASE("tear sheet from a hand-built result") {
    BacktestResult r;
    const auto dates = business_days(Date(2021, 1, 4), 8);
    const std::vector<double> eq{100, 100, 102, 101, 99, 103, 104, 104};
    for (std::size_t i = 0; i < eq.size(); ++i) {
        EquityPoint e;
        e.date = dates[i];
        e.equity = eq[i];
        e.long_value = eq[i] / 2;
        e.short_value = -eq[i] / 2;
        e.leverage = 1.0;
        e.holdings = 4;
        r.equity.push_back(e);
    }
    r.decisions = {1, 2, 3, 4, 5, 6};
    r.marks.push_back({dates[1], dates[2], 0.98, 100.0, true, 0});
    r.marks.push_back({dates[2], dates[3], 1.03, 100.0, true, 0});
    const std::vector<double> bench{0, 0.01, 0.02, -0.01, -0.02, 0.03, 0.0, 0.01};
    const auto ts = make_tearsheet(r, bench);

    CHECK(ts.daily.values.size() == 6); // from the first decision on
    CHECK(ts.total_return_pct == doctest::Approx(4.0));
    CHECK(rel(ts.total_return_pct / 100.0, compound(ts.daily.values)) < 1e-8);
    CHECK(ts.max_drawdown_pct == doctest::Approx(100.0 * (99.0 / 102.0 - 1.0)));
    CHECK(ts.max_drawdown_pct <= 0.0);
    CHECK(ts.min_rebalance_leverage == 0.98);
    CHECK(ts.max_rebalance_leverage == 1.03);
    CHECK(ts.max_holdings == 4);
    CHECK(ts.volatility_annual == doctest::Approx(ts.volatility_daily * std::sqrt(252.0)));
    for (std::size_t i = 0; i < ts.daily.values.size(); ++i) {
        CHECK(std::abs(ts.common.values[i] + ts.specific.values[i] - ts.daily.values[i]) <= 1e-12);
        CHECK(ts.long_short_ratio.values[i] == doctest::Approx(1.0));
    }
    const auto j = to_json(ts);
    CHECK(j.contains("sharpe"));
    CHECK(j["max_holdings"] == 4);
}
