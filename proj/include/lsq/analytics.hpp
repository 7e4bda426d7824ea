#pragma once

#include "lsq/backtest.hpp"
#include "lsq/date.hpp"
#include "lsq/panel.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsq {

struct DatedSeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

// mean(r - rf) / sd(r - rf) * sqrt(periods), sample deviation. Empty when the
// deviation is zero. Throws std::invalid_argument with fewer than 2 values.
std::optional<double> sharpe(const std::vector<double>& returns, double rf = 0.0, double periods_per_year = 252.0);

// min over t of (E_t - peak_t) / peak_t; 0 for a curve that never falls.
// Throws std::invalid_argument on a non-positive value.
double max_drawdown(const std::vector<double>& equity);

// Simple returns E_t / E_{t-1} - 1; one shorter than the input.
std::vector<double> simple_returns(const std::vector<double>& equity);

// Compounded product minus one.
double compound(const std::vector<double>& returns);

struct BetaDecomposition {
    double beta = 0.0;
    std::vector<double> common;   // beta * benchmark_t
    std::vector<double> specific; // r_t - common_t
    std::vector<double> rolling_beta; // NaN until the window fills
    double common_total = 0.0;    // compounded
    double specific_total = 0.0;
};

// Least-squares beta with intercept over the whole sample. Throws
// std::invalid_argument on length mismatch or zero benchmark variance.
BetaDecomposition beta_decomposition(const std::vector<double>& portfolio, const std::vector<double>& benchmark,
                                     std::size_t rolling_window = 126);

enum class Period { weekly, monthly };

// Compounds the daily returns within each ISO week or calendar month; each
// period is dated by its first session.
DatedSeries aggregate_returns(const DatedSeries& daily, Period period);

struct QuantileStat {
    int quantile = 0; // 1 = lowest factor values
    int horizon = 0;
    double mean = 0.0;   // mean of per-date quantile means
    double std_error = 0.0; // standard error of that mean
    std::size_t dates = 0;
};

struct QuantileReport {
    int n_quantiles = 3;
    std::vector<int> horizons;
    std::vector<QuantileStat> stats;
    std::vector<Date> dates;                       // dates with an assignment
    std::vector<std::vector<double>> cumulative;   // [quantile][date], 1-day equal-weight
    std::vector<double> factor_weighted;           // cumulative, demeaned factor weights
    std::vector<std::vector<double>> top_minus_bottom;          // [horizon][date]
    std::vector<std::vector<double>> top_minus_bottom_smoothed; // 22-session rolling mean
    // per-date quantile means: [horizon][quantile][date], NaN where undefined
    std::vector<std::vector<std::vector<double>>> per_date;

    const QuantileStat& stat(int quantile, int horizon) const;
};

// Per date, ranks the defined factor values (ties by symbol position) into
// equal-count quantiles and measures forward close-to-close returns. Dates
// with fewer defined values than quantiles are skipped.
QuantileReport quantile_report(const Panel& factor, const Panel& close, int n_quantiles = 3,
                               std::vector<int> horizons = {1, 5, 22});

void write_quantile_report(const QuantileReport& q, const std::filesystem::path& dir);

struct TearSheet {
    double total_return_pct = 0.0;
    double specific_return_pct = 0.0;
    double common_return_pct = 0.0;
    std::optional<double> sharpe;
    double max_drawdown_pct = 0.0;
    double volatility_daily = 0.0;
    double volatility_annual = 0.0;
    double beta = 0.0;
    std::size_t max_holdings = 0;
    double min_rebalance_leverage = 0.0;
    double max_rebalance_leverage = 0.0;
    std::size_t fills = 0;
    double commissions = 0.0;

    DatedSeries daily;
    DatedSeries weekly;
    DatedSeries monthly;
    DatedSeries rolling_beta;
    DatedSeries common;
    DatedSeries specific;
    DatedSeries long_short_ratio;
    DatedSeries holdings;
    DatedSeries gross_leverage;
};

// Statistics over the sessions from the first decision on. `benchmark` holds
// one return per equity point (the first is ignored).
TearSheet make_tearsheet(const BacktestResult& r, const std::vector<double>& benchmark);

nlohmann::json to_json(const TearSheet& t);

// tearsheet.json plus the series CSVs it references.
void write_tearsheet(const TearSheet& t, const std::filesystem::path& dir);

} // namespace lsq
