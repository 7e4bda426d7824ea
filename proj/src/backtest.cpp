#include "lsq/backtest.hpp"

#include "lsq/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>

namespace lsq {

std::string to_string(RebalanceMode m) {
    switch (m) {
    case RebalanceMode::daily: return "daily";
    case RebalanceMode::weekly: return "weekly";
    case RebalanceMode::monthly: return "monthly";
    }
    return "?";
}

RebalanceMode parse_rebalance_mode(const std::string& s) {
    if (s == "daily") return RebalanceMode::daily;
    if (s == "weekly") return RebalanceMode::weekly;
    if (s == "monthly") return RebalanceMode::monthly;
    throw std::invalid_argument("unknown rebalance mode '" + s + "'; valid: daily, weekly, monthly");
}

std::vector<std::size_t> rebalance_dates(const std::vector<Date>& calendar, RebalanceMode mode) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < calendar.size(); ++t) {
        bool take = t == 0;
        if (!take) {
            switch (mode) {
            case RebalanceMode::daily: take = true; break;
            case RebalanceMode::weekly: take = calendar[t].iso_week_start() != calendar[t - 1].iso_week_start(); break;
            case RebalanceMode::monthly: take = calendar[t].month_start() != calendar[t - 1].month_start(); break;
            }
        }
        if (take) out.push_back(t);
    }
    return out;
}

void BacktestConfig::validate() const {
    if (window < 2) throw std::invalid_argument("backtest: window must be >= 2");
    if (horizon < 1 || horizon >= window) throw std::invalid_argument("backtest: horizon must lie in [1, window)");
    if (!(min_leverage <= max_leverage)) throw std::invalid_argument("backtest: leverage band min exceeds max");
    if (!(initial_capital > 0.0)) throw std::invalid_argument("backtest: initial capital must be > 0");
    if (!(gross_target > 0.0)) throw std::invalid_argument("backtest: gross target must be > 0");
    if (commission_per_share < 0.0 || slippage < 0.0 || slippage >= 1.0) {
        throw std::invalid_argument("backtest: costs must be non-negative (slippage below 1)");
    }
    if (n_long + n_short == 0) throw std::invalid_argument("backtest: n_long + n_short must be >= 1");
}

double PortfolioState::equity() const { return cash + long_value() + short_value(); }

double PortfolioState::long_value() const {
    double v = 0.0;
    for (const auto& [sym, p] : positions) {
        if (p.shares > 0) v += static_cast<double>(p.shares) * p.mark;
    }
    return v;
}

double PortfolioState::short_value() const {
    double v = 0.0;
    for (const auto& [sym, p] : positions) {
        if (p.shares < 0) v += static_cast<double>(p.shares) * p.mark;
    }
    return v;
}

double PortfolioState::gross_leverage() const {
    const double e = equity();
    return e > 0.0 ? (long_value() - short_value()) / e : std::numeric_limits<double>::infinity();
}

std::size_t PortfolioState::holdings() const { return positions.size(); }

PortfolioState apply_fills(PortfolioState state, const std::vector<Fill>& fills) {
    for (const auto& f : fills) {
        if (!(f.price > 0.0)) throw std::invalid_argument("apply_fills: non-positive price for " + f.symbol);
        state.cash -= static_cast<double>(f.shares) * f.price + f.commission;
        auto& p = state.positions[f.symbol];
        p.shares += f.shares;
        p.mark = f.price;
        if (p.shares == 0) state.positions.erase(f.symbol);
    }
    if (state.equity() <= 0.0) state.bankrupt = true;
    return state;
}

void mark_to_market(PortfolioState& state, const Panel& close, std::size_t t) {
    for (auto& [sym, p] : state.positions) {
        const auto s = close.symbol_index(sym);
        if (!s) continue;
        const double px = close(t, *s);
        if (!is_missing(px) && px > 0.0) p.mark = px;
    }
    state.date = close.dates()[t];
}

namespace {

// Decision-time plan: which symbols each side wants and the dollars per side.
struct Plan {
    Date date;
    std::size_t t = 0;
    double leg_value = 0.0; // dollars per side
    std::vector<std::size_t> longs, shorts;
    std::map<std::string, std::int64_t> targets;
};

std::int64_t shares_for(double dollars, double price) {
    return static_cast<std::int64_t>(std::trunc(dollars / price));
}

void size_side(Plan& plan, const std::vector<std::size_t>& side, double sign, const Panel& close, std::size_t t) {
    if (side.empty()) return;
    const double each = plan.leg_value / static_cast<double>(side.size());
    for (std::size_t s : side) {
        const double px = close(t, s);
        if (is_missing(px) || !(px > 0.0)) continue;
        plan.targets[close.symbols()[s]] = static_cast<std::int64_t>(sign) * shares_for(each, px);
    }
}

std::vector<Order> orders_for(const Plan& plan, const PortfolioState& state) {
    std::set<std::string> names;
    for (const auto& [sym, p] : state.positions) names.insert(sym);
    for (const auto& [sym, n] : plan.targets) names.insert(sym);
    std::vector<Order> out;
    for (const auto& sym : names) {
        const auto it = plan.targets.find(sym);
        const std::int64_t target = it == plan.targets.end() ? 0 : it->second;
        const auto held = state.positions.find(sym);
        const std::int64_t current = held == state.positions.end() ? 0 : held->second.shares;
        if (target != current) out.push_back({plan.date, sym, target - current});
    }
    return out;
}

} // namespace

BacktestResult run_backtest(const BacktestConfig& config, const MarketData& market, ScoreProvider& scorer) {
    config.validate();
    const auto& dates = market.dates();
    const auto& symbols = market.symbols();
    const std::size_t T = dates.size();
    BacktestResult r;
    PortfolioState state;
    state.cash = config.initial_capital;
    if (T == 0) {
        r.final_state = state;
        return r;
    }
    const auto schedule = rebalance_dates(dates, config.rebalance);
    std::set<std::size_t> is_rebalance(schedule.begin(), schedule.end());

    std::optional<Plan> pending;
    std::size_t undecided = 0;
    bool warned_shrink = false;

    for (std::size_t t = 0; t < T && !r.halted; ++t) {
        // 1. execute yesterday's plan at today's open
        if (pending) {
            Plan plan = std::move(*pending);
            pending.reset();
            auto has_open = [&](std::size_t s) {
                const double px = market.open(t, s);
                return !is_missing(px) && px > 0.0;
            };
            RebalanceMark mark{plan.date, dates[t]};
            std::vector<std::size_t> fill_longs, fill_shorts;
            for (std::size_t s : plan.longs) {
                if (has_open(s)) fill_longs.push_back(s);
            }
            for (std::size_t s : plan.shorts) {
                if (has_open(s)) fill_shorts.push_back(s);
            }
            mark.skipped = (plan.longs.size() - fill_longs.size()) + (plan.shorts.size() - fill_shorts.size());
            if (mark.skipped > 0) {
                // resize the fillable names of each side to the same side budget
                Plan resized = plan;
                resized.targets.clear();
                size_side(resized, fill_longs, 1.0, market.close, plan.t);
                size_side(resized, fill_shorts, -1.0, market.close, plan.t);
                plan = std::move(resized);
            }
            std::vector<Fill> fills;
            for (const auto& o : orders_for(plan, state)) {
                const std::size_t s = *market.close.symbol_index(o.symbol);
                if (!has_open(s)) {
                    // targeted names were already counted above
                    if (!plan.targets.count(o.symbol)) ++mark.skipped;
                    continue;
                }
                const double open = market.open(t, s);
                const double px = o.shares > 0 ? open * (1.0 + config.slippage) : open * (1.0 - config.slippage);
                fills.push_back({dates[t], o.symbol, o.shares, px,
                                 config.commission_per_share * static_cast<double>(std::llabs(o.shares))});
            }
            mark.fully_filled = mark.skipped == 0;
            if (!mark.fully_filled) {
                r.diagnostics.push_back(dates[t].iso() + ": " + std::to_string(mark.skipped) +
                                        " order(s) skipped, no open price");
            }
            state = apply_fills(std::move(state), fills);
            r.fills.insert(r.fills.end(), fills.begin(), fills.end());
            mark_to_market(state, market.open, t);
            mark.leverage = state.gross_leverage();
            mark.equity = state.equity();
            r.marks.push_back(mark);
            if (state.bankrupt) {
                r.diagnostics.push_back(dates[t].iso() + ": equity <= 0, backtest halted");
                r.halted = true;
            }
        }

        // 2. mark at the close
        mark_to_market(state, market.close, t);
        EquityPoint e;
        e.date = dates[t];
        e.equity = state.equity();
        e.cash = state.cash;
        e.long_value = state.long_value();
        e.short_value = state.short_value();
        e.leverage = state.gross_leverage();
        e.holdings = state.holdings();
        for (const auto& [sym, p] : state.positions) (p.shares > 0 ? e.n_long : e.n_short) += 1;
        r.equity.push_back(e);
        for (const auto& [sym, p] : state.positions) r.positions.push_back({dates[t], sym, p.shares, p.mark});
        if (r.halted) break;

        // 3. decide after the close
        if (!is_rebalance.count(t) || t + 1 >= T) continue;
        std::string why;
        const auto cv = scorer.scores(t, why);
        if (cv.scores.empty()) {
            if (undecided++ == 0) r.diagnostics.push_back(dates[t].iso() + ": no decision (" + why + ")");
            continue;
        }
        if (undecided > 0 && r.decisions.empty()) {
            r.diagnostics.push_back("first decision on " + dates[t].iso() + " after " + std::to_string(undecided) +
                                    " undecidable rebalance date(s)");
        }
        r.decisions.push_back(t);

        std::size_t nl = config.n_long, ns = config.n_short;
        if (nl + ns > cv.scores.size()) {
            const double m = static_cast<double>(cv.scores.size());
            const double total = static_cast<double>(nl + ns);
            nl = static_cast<std::size_t>(std::floor(m * static_cast<double>(config.n_long) / total));
            ns = static_cast<std::size_t>(std::floor(m * static_cast<double>(config.n_short) / total));
            if (!warned_shrink) {
                r.diagnostics.push_back(dates[t].iso() + ": " + std::to_string(cv.scores.size()) +
                                        " scored symbols; sides shrunk to " + std::to_string(nl) + "/" +
                                        std::to_string(ns));
                warned_shrink = true;
            }
        }
        const auto sets = select_positions(cv.scores, nl, ns);
        r.diagnostics.insert(r.diagnostics.end(), sets.diagnostics.begin(), sets.diagnostics.end());

        Plan plan;
        plan.date = dates[t];
        plan.t = t;
        const int sides = (sets.longs.empty() ? 0 : 1) + (sets.shorts.empty() ? 0 : 1);
        plan.leg_value = sides ? config.gross_target * state.equity() / sides : 0.0;
        for (std::size_t i : sets.longs) plan.longs.push_back(cv.symbols[i]);
        for (std::size_t i : sets.shorts) plan.shorts.push_back(cv.symbols[i]);
        size_side(plan, plan.longs, 1.0, market.close, t);
        size_side(plan, plan.shorts, -1.0, market.close, t);

        std::vector<const char*> label(cv.scores.size(), "none");
        for (std::size_t i : sets.longs) label[i] = "long";
        for (std::size_t i : sets.shorts) label[i] = "short";
        for (std::size_t i = 0; i < cv.scores.size(); ++i) {
            r.convictions.push_back({dates[t].iso(), symbols[cv.symbols[i]], cv.scores[i], label[i]});
        }
        const auto orders = orders_for(plan, state);
        r.orders.insert(r.orders.end(), orders.begin(), orders.end());
        pending = std::move(plan);
    }
    if (undecided > 0) r.diagnostics.push_back(std::to_string(undecided) + " rebalance date(s) without a decision");
    r.final_state = state;
    return r;
}

void write_equity_csv(const BacktestResult& r, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,equity,leverage,cash,long_value,short_value,holdings,n_long,n_short\n";
    for (const auto& e : r.equity) {
        out << e.date.iso() << ',' << csv::format(e.equity) << ',' << csv::format(e.leverage) << ','
            << csv::format(e.cash) << ',' << csv::format(e.long_value) << ',' << csv::format(e.short_value) << ','
            << e.holdings << ',' << e.n_long << ',' << e.n_short << '\n';
    }
}

void write_fills_csv(const BacktestResult& r, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,shares,price,commission\n";
    for (const auto& f : r.fills) {
        out << f.date.iso() << ',' << f.symbol << ',' << f.shares << ',' << csv::format(f.price) << ','
            << csv::format(f.commission) << '\n';
    }
}

void write_positions_csv(const BacktestResult& r, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,shares,price,value\n";
    for (const auto& p : r.positions) {
        out << p.date.iso() << ',' << p.symbol << ',' << p.shares << ',' << csv::format(p.price) << ','
            << csv::format(static_cast<double>(p.shares) * p.price) << '\n';
    }
}

} // namespace lsq
