#pragma once

#include "lsq/date.hpp"
#include "lsq/ensemble.hpp"
#include "lsq/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lsq {

enum class RebalanceMode { daily, weekly, monthly };
std::string to_string(RebalanceMode m);
RebalanceMode parse_rebalance_mode(const std::string& s);

// Indices into `calendar`: every session, the first session of each ISO week,
// or the first session of each month.
std::vector<std::size_t> rebalance_dates(const std::vector<Date>& calendar, RebalanceMode mode);

struct BacktestConfig {
    int window = 200;
    int horizon = 5;
    RebalanceMode rebalance = RebalanceMode::daily;
    std::size_t n_long = 250;
    std::size_t n_short = 250;
    double min_leverage = 0.96;
    double max_leverage = 1.05;
    double gross_target = 1.0;
    double commission_per_share = 0.001;
    double slippage = 0.0005; // fraction of the open, against the trade
    double initial_capital = 10'000'000.0;

    void validate() const; // throws std::invalid_argument
};

struct Position {
    std::int64_t shares = 0;
    double mark = 0.0; // last price the position was valued at
};

struct PortfolioState {
    Date date;
    double cash = 0.0;
    std::map<std::string, Position> positions;
    bool bankrupt = false;

    double equity() const;
    double long_value() const;
    double short_value() const; // <= 0
    double gross_leverage() const;
    std::size_t holdings() const;
};

struct Fill {
    Date date;
    std::string symbol;
    std::int64_t shares = 0; // signed
    double price = 0.0;
    double commission = 0.0;
};

// Cash moves by -(shares * price) - commission; the filled symbol is marked at
// the fill price and flat positions are removed. Throws std::invalid_argument on
// a non-positive price. Sets `bankrupt` when equity ends <= 0.
PortfolioState apply_fills(PortfolioState state, const std::vector<Fill>& fills);

// Re-marks every held symbol with a defined price in column order of `close`.
void mark_to_market(PortfolioState& state, const Panel& close, std::size_t t);

// Scores the tradable symbols on a decision date using data up to that date.
class ScoreProvider {
public:
    virtual ~ScoreProvider() = default;
    // Empty scores mean "no decision possible"; the reason goes to `why`.
    virtual ConvictionVector scores(std::size_t t, std::string& why) = 0;
};

struct Order {
    Date date; // decision date
    std::string symbol;
    std::int64_t shares = 0;
};

struct EquityPoint {
    Date date;
    double equity = 0.0;
    double cash = 0.0;
    double long_value = 0.0;
    double short_value = 0.0;
    double leverage = 0.0;
    std::size_t holdings = 0;
    std::size_t n_long = 0;
    std::size_t n_short = 0;
};

// Valuation right after a rebalance executes, at the session's opens.
struct RebalanceMark {
    Date decision_date;
    Date fill_date;
    double leverage = 0.0;
    double equity = 0.0;
    bool fully_filled = true;
    std::size_t skipped = 0;
};

struct PositionRow {
    Date date;
    std::string symbol;
    std::int64_t shares = 0;
    double price = 0.0;
};

struct BacktestResult {
    std::vector<EquityPoint> equity;
    std::vector<Order> orders;
    std::vector<Fill> fills;
    std::vector<RebalanceMark> marks;
    std::vector<PositionRow> positions;
    std::vector<ConvictionRow> convictions;
    std::vector<std::size_t> decisions; // dates on which scores were produced
    std::vector<std::string> diagnostics;
    PortfolioState final_state;
    bool halted = false;
};

// Walk-forward loop. On each rebalance date t with a later session: score,
// select, size target shares from close(t) and equity(t), and queue the
// difference to current holdings as orders. Orders fill at open(t+1) with
// slippage and commission; orders without an open are skipped and the rest of
// that side is scaled up to keep its dollar target. Every session is marked at
// the close.
BacktestResult run_backtest(const BacktestConfig& config, const MarketData& market, ScoreProvider& scorer);

void write_equity_csv(const BacktestResult& r, const std::filesystem::path& path);
void write_fills_csv(const BacktestResult& r, const std::filesystem::path& path);
void write_positions_csv(const BacktestResult& r, const std::filesystem::path& path);

} // namespace lsq
