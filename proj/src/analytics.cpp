#include "lsq/analytics.hpp"

#include "lsq/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1).
double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double ols_beta(const double* p, const double* b, std::size_t n) {
    double mp = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += p[i];
        mb += b[i];
    }
    mp /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, var = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (p[i] - mp) * (b[i] - mb);
        var += (b[i] - mb) * (b[i] - mb);
        scale += b[i] * b[i];
    }
    if (!(var > 1e-20 * scale) || var == 0.0) return kNaN;
    return cov / var;
}

} // namespace

std::optional<double> sharpe(const std::vector<double>& returns, double rf, double periods_per_year) {
    if (returns.size() < 2) throw std::invalid_argument("sharpe: at least two returns required");
    std::vector<double> excess(returns.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        excess[i] = returns[i] - rf;
        scale = std::max(scale, std::abs(excess[i]));
    }
    const double sd = sd_of(excess);
    if (!(sd > 1e-12 * scale) || sd == 0.0) return std::nullopt;
    return mean_of(excess) / sd * std::sqrt(periods_per_year);
}

double max_drawdown(const std::vector<double>& equity) {
    double peak = 0.0, worst = 0.0;
    for (double e : equity) {
        if (!(e > 0.0)) throw std::invalid_argument("max_drawdown: equity must be positive");
        peak = std::max(peak, e);
        worst = std::min(worst, (e - peak) / peak);
    }
    return worst;
}

std::vector<double> simple_returns(const std::vector<double>& equity) {
    std::vector<double> out;
    for (std::size_t i = 1; i < equity.size(); ++i) out.push_back(equity[i] / equity[i - 1] - 1.0);
    return out;
}

double compound(const std::vector<double>& returns) {
    double g = 1.0;
    for (double r : returns) g *= 1.0 + r;
    return g - 1.0;
}

BetaDecomposition beta_decomposition(const std::vector<double>& portfolio, const std::vector<double>& benchmark,
                                     std::size_t rolling_window) {
    if (portfolio.size() != benchmark.size()) throw std::invalid_argument("beta_decomposition: length mismatch");
    if (portfolio.size() < 2) throw std::invalid_argument("beta_decomposition: at least two observations required");
    BetaDecomposition d;
    d.beta = ols_beta(portfolio.data(), benchmark.data(), portfolio.size());
    if (std::isnan(d.beta)) throw std::invalid_argument("beta_decomposition: benchmark has zero variance");
    const std::size_t n = portfolio.size();
    d.common.resize(n);
    d.specific.resize(n);
    d.rolling_beta.assign(n, kNaN);
    for (std::size_t t = 0; t < n; ++t) {
        d.common[t] = d.beta * benchmark[t];
        d.specific[t] = portfolio[t] - d.common[t];
    }
    if (rolling_window >= 2) {
        for (std::size_t t = rolling_window - 1; t < n; ++t) {
            const std::size_t a = t + 1 - rolling_window;
            d.rolling_beta[t] = ols_beta(portfolio.data() + a, benchmark.data() + a, rolling_window);
        }
    }
    d.common_total = compound(d.common);
    d.specific_total = compound(d.specific);
    return d;
}

DatedSeries aggregate_returns(const DatedSeries& daily, Period period) {
    if (daily.dates.size() != daily.values.size()) throw std::invalid_argument("aggregate_returns: length mismatch");
    DatedSeries out;
    auto key = [&](Date d) { return period == Period::weekly ? d.iso_week_start() : d.month_start(); };
    for (std::size_t i = 0; i < daily.dates.size(); ++i) {
        if (i == 0 || key(daily.dates[i]) != key(daily.dates[i - 1])) {
            out.dates.push_back(daily.dates[i]);
            out.values.push_back(daily.values[i]);
        } else {
            out.values.back() = (1.0 + out.values.back()) * (1.0 + daily.values[i]) - 1.0;
        }
    }
    return out;
}

// --- quantile report -------------------------------------------------------------

const QuantileStat& QuantileReport::stat(int quantile, int horizon) const {
    for (const auto& s : stats) {
        if (s.quantile == quantile && s.horizon == horizon) return s;
    }
    throw std::out_of_range("QuantileReport: no statistic for that quantile and horizon");
}

QuantileReport quantile_report(const Panel& factor, const Panel& close, int n_quantiles, std::vector<int> horizons) {
    if (n_quantiles < 2) throw std::invalid_argument("quantile_report: n_quantiles must be >= 2");
    if (!factor.same_axes(close)) throw std::invalid_argument("quantile_report: factor and close axes differ");
    for (int h : horizons) {
        if (h < 1) throw std::invalid_argument("quantile_report: horizons must be >= 1");
    }
    QuantileReport q;
    q.n_quantiles = n_quantiles;
    q.horizons = horizons;
    const auto nq = static_cast<std::size_t>(n_quantiles);
    const std::size_t nh = horizons.size();
    q.cumulative.assign(nq, {});
    q.top_minus_bottom.assign(nh, {});
    q.per_date.assign(nh, std::vector<std::vector<double>>(nq));

    std::vector<double> level(nq, 1.0);
    double weighted_level = 1.0;
    const std::size_t T = factor.n_dates(), S = factor.n_symbols();
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::size_t> idx;
        for (std::size_t s = 0; s < S; ++s) {
            if (!is_missing(factor(t, s)) && !is_missing(close(t, s)) && close(t, s) > 0.0) idx.push_back(s);
        }
        if (idx.size() < nq) continue;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return factor(t, a) < factor(t, b); });
        std::vector<std::size_t> bucket(S, 0);
        for (std::size_t r = 0; r < idx.size(); ++r) bucket[idx[r]] = r * nq / idx.size();
        q.dates.push_back(factor.dates()[t]);

        for (std::size_t hi = 0; hi < nh; ++hi) {
            const auto h = static_cast<std::size_t>(horizons[hi]);
            std::vector<double> sum(nq, 0.0);
            std::vector<std::size_t> cnt(nq, 0);
            if (t + h < T) {
                for (std::size_t s : idx) {
                    const double later = close(t + h, s);
                    if (is_missing(later)) continue;
                    sum[bucket[s]] += later / close(t, s) - 1.0;
                    ++cnt[bucket[s]];
                }
            }
            for (std::size_t k = 0; k < nq; ++k) {
                q.per_date[hi][k].push_back(cnt[k] ? sum[k] / static_cast<double>(cnt[k]) : kNaN);
            }
            q.top_minus_bottom[hi].push_back(q.per_date[hi][nq - 1].back() - q.per_date[hi][0].back());
        }

        // 1-day equal-weight and factor-weighted paths
        std::vector<double> r1(S, kNaN);
        std::vector<double> sum(nq, 0.0);
        std::vector<std::size_t> cnt(nq, 0);
        double fmean = 0.0;
        std::size_t fn = 0;
        if (t + 1 < T) {
            for (std::size_t s : idx) {
                const double later = close(t + 1, s);
                if (is_missing(later)) continue;
                r1[s] = later / close(t, s) - 1.0;
                sum[bucket[s]] += r1[s];
                ++cnt[bucket[s]];
                fmean += factor(t, s);
                ++fn;
            }
        }
        for (std::size_t k = 0; k < nq; ++k) {
            if (cnt[k]) level[k] *= 1.0 + sum[k] / static_cast<double>(cnt[k]);
            q.cumulative[k].push_back(level[k]);
        }
        if (fn) {
            fmean /= static_cast<double>(fn);
            double gross = 0.0, ret = 0.0;
            for (std::size_t s : idx) {
                if (!is_missing(r1[s])) gross += std::abs(factor(t, s) - fmean);
            }
            if (gross > 0.0) {
                for (std::size_t s : idx) {
                    if (!is_missing(r1[s])) ret += (factor(t, s) - fmean) / gross * r1[s];
                }
            }
            weighted_level *= 1.0 + ret;
        }
        q.factor_weighted.push_back(weighted_level);
    }

    for (std::size_t hi = 0; hi < nh; ++hi) {
        const auto& tmb = q.top_minus_bottom[hi];
        std::vector<double> smooth(tmb.size(), kNaN);
        const std::size_t w = 22;
        for (std::size_t i = w - 1; i < tmb.size(); ++i) {
            double s = 0.0;
            std::size_t n = 0;
            for (std::size_t j = i + 1 - w; j <= i; ++j) {
                if (!std::isnan(tmb[j])) {
                    s += tmb[j];
                    ++n;
                }
            }
            if (n) smooth[i] = s / static_cast<double>(n);
        }
        q.top_minus_bottom_smoothed.push_back(std::move(smooth));
        for (std::size_t k = 0; k < nq; ++k) {
            std::vector<double> defined;
            for (double v : q.per_date[hi][k]) {
                if (!std::isnan(v)) defined.push_back(v);
            }
            QuantileStat st;
            st.quantile = static_cast<int>(k) + 1;
            st.horizon = horizons[hi];
            st.dates = defined.size();
            st.mean = mean_of(defined);
            st.std_error = defined.size() >= 2 ? sd_of(defined) / std::sqrt(static_cast<double>(defined.size())) : kNaN;
            q.stats.push_back(st);
        }
    }
    return q;
}

void write_quantile_report(const QuantileReport& q, const std::filesystem::path& dir) {
    {
        auto out = csv::open_output(dir / "quantile_report.csv");
        out << "quantile,horizon,mean_return,stderr,dates\n";
        for (const auto& s : q.stats) {
            out << s.quantile << ',' << s.horizon << ',' << csv::format(s.mean) << ',' << csv::format(s.std_error) << ','
                << s.dates << '\n';
        }
    }
    {
        auto out = csv::open_output(dir / "quantile_cumulative.csv");
        out << "date";
        for (int k = 1; k <= q.n_quantiles; ++k) out << ",q" << k;
        out << ",factor_weighted\n";
        for (std::size_t i = 0; i < q.dates.size(); ++i) {
            out << q.dates[i].iso();
            for (const auto& c : q.cumulative) out << ',' << csv::format(c[i]);
            out << ',' << csv::format(q.factor_weighted[i]) << '\n';
        }
    }
    {
        auto out = csv::open_output(dir / "top_minus_bottom.csv");
        out << "date";
        for (int h : q.horizons) out << ",h" << h << ",h" << h << "_smoothed";
        out << '\n';
        for (std::size_t i = 0; i < q.dates.size(); ++i) {
            out << q.dates[i].iso();
            for (std::size_t hi = 0; hi < q.horizons.size(); ++hi) {
                out << ',' << csv::format(q.top_minus_bottom[hi][i]) << ','
                    << csv::format(q.top_minus_bottom_smoothed[hi][i]);
            }
            out << '\n';
        }
    }
    {
        auto out = csv::open_output(dir / "quantile_distribution.csv");
        out << "date,quantile,horizon,mean_return\n";
        for (std::size_t i = 0; i < q.dates.size(); ++i) {
            for (std::size_t hi = 0; hi < q.horizons.size(); ++hi) {
                for (std::size_t k = 0; k < q.per_date[hi].size(); ++k) {
                    const double v = q.per_date[hi][k][i];
                    if (std::isnan(v)) continue;
                    out << q.dates[i].iso() << ',' << k + 1 << ',' << q.horizons[hi] << ',' << csv::format(v) << '\n';
                }
            }
        }
    }
}

// --- tear sheet ------------------------------------------------------------------

TearSheet make_tearsheet(const BacktestResult& r, const std::vector<double>& benchmark) {
    if (benchmark.size() != r.equity.size()) throw std::invalid_argument("make_tearsheet: benchmark length mismatch");
    TearSheet ts;
    ts.fills = r.fills.size();
    for (const auto& f : r.fills) ts.commissions += f.commission;
    for (const auto& e : r.equity) ts.max_holdings = std::max(ts.max_holdings, e.holdings);
    if (!r.marks.empty()) {
        ts.min_rebalance_leverage = std::numeric_limits<double>::infinity();
        ts.max_rebalance_leverage = -std::numeric_limits<double>::infinity();
        for (const auto& m : r.marks) {
            ts.min_rebalance_leverage = std::min(ts.min_rebalance_leverage, m.leverage);
            ts.max_rebalance_leverage = std::max(ts.max_rebalance_leverage, m.leverage);
        }
    }
    if (r.decisions.empty() || r.equity.size() < 3) return ts;

    // sessions from the first decision date on; equity has one point per session
    const std::size_t first = r.decisions.front();

    std::vector<double> eq;
    for (std::size_t i = first; i < r.equity.size(); ++i) eq.push_back(r.equity[i].equity);
    const auto daily = simple_returns(eq);
    std::vector<double> bench(benchmark.begin() + static_cast<std::ptrdiff_t>(first) + 1, benchmark.end());
    for (std::size_t i = first + 1; i < r.equity.size(); ++i) {
        ts.daily.dates.push_back(r.equity[i].date);
        const auto& e = r.equity[i];
        ts.long_short_ratio.dates.push_back(e.date);
        ts.long_short_ratio.values.push_back(e.short_value < 0.0 ? e.long_value / -e.short_value : kNaN);
        ts.holdings.dates.push_back(e.date);
        ts.holdings.values.push_back(static_cast<double>(e.holdings));
        ts.gross_leverage.dates.push_back(e.date);
        ts.gross_leverage.values.push_back(e.leverage);
    }
    ts.daily.values = daily;
    ts.weekly = aggregate_returns(ts.daily, Period::weekly);
    ts.monthly = aggregate_returns(ts.daily, Period::monthly);

    ts.total_return_pct = 100.0 * compound(daily);
    ts.max_drawdown_pct = 100.0 * max_drawdown(eq);
    if (daily.size() >= 2) {
        ts.sharpe = sharpe(daily);
        ts.volatility_daily = sd_of(daily);
        ts.volatility_annual = ts.volatility_daily * std::sqrt(252.0);
    }
    if (daily.size() >= 2) {
        try {
            const auto d = beta_decomposition(daily, bench);
            ts.beta = d.beta;
            ts.common_return_pct = 100.0 * d.common_total;
            ts.specific_return_pct = 100.0 * d.specific_total;
            ts.common = {ts.daily.dates, d.common};
            ts.specific = {ts.daily.dates, d.specific};
            ts.rolling_beta = {ts.daily.dates, d.rolling_beta};
        } catch (const std::invalid_argument&) {
            ts.beta = kNaN;
        }
    }
    return ts;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void write_series(const std::filesystem::path& path, const std::vector<std::pair<std::string, const DatedSeries*>>& cols) {
    auto out = csv::open_output(path);
    out << "date";
    for (const auto& [name, s] : cols) out << ',' << name;
    out << '\n';
    const auto& dates = cols.front().second->dates;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        out << dates[i].iso();
        for (const auto& [name, s] : cols) out << ',' << (i < s->values.size() ? csv::format(s->values[i]) : "");
        out << '\n';
    }
}

} // namespace

nlohmann::json to_json(const TearSheet& t) {
    nlohmann::json j;
    j["total_return_pct"] = number_or_null(t.total_return_pct);
    j["specific_return_pct"] = number_or_null(t.specific_return_pct);
    j["common_return_pct"] = number_or_null(t.common_return_pct);
    j["sharpe"] = t.sharpe ? number_or_null(*t.sharpe) : nlohmann::json(nullptr);
    j["max_drawdown_pct"] = number_or_null(t.max_drawdown_pct);
    j["volatility_daily"] = number_or_null(t.volatility_daily);
    j["volatility_annual"] = number_or_null(t.volatility_annual);
    j["beta"] = number_or_null(t.beta);
    j["max_holdings"] = t.max_holdings;
    j["rebalance_leverage"] = {{"min", number_or_null(t.min_rebalance_leverage)},
                               {"max", number_or_null(t.max_rebalance_leverage)}};
    j["fills"] = t.fills;
    j["commissions"] = number_or_null(t.commissions);
    j["sessions"] = t.daily.values.size();
    j["series"] = {{"daily_returns", "returns_daily.csv"},
                   {"weekly_returns", "returns_weekly.csv"},
                   {"monthly_returns", "returns_monthly.csv"},
                   {"common_specific", "common_specific.csv"},
                   {"rolling_beta", "common_specific.csv"},
                   {"exposure", "exposure.csv"}};
    return j;
}

void write_tearsheet(const TearSheet& t, const std::filesystem::path& dir) {
    {
        auto out = csv::open_output(dir / "tearsheet.json");
        out << to_json(t).dump(2) << '\n';
    }
    write_series(dir / "returns_daily.csv", {{"return", &t.daily}});
    write_series(dir / "returns_weekly.csv", {{"return", &t.weekly}});
    write_series(dir / "returns_monthly.csv", {{"return", &t.monthly}});
    const DatedSeries empty{t.daily.dates, {}};
    write_series(dir / "common_specific.csv", {{"common", t.common.values.empty() ? &empty : &t.common},
                                               {"specific", t.specific.values.empty() ? &empty : &t.specific},
                                               {"rolling_beta", t.rolling_beta.values.empty() ? &empty : &t.rolling_beta}});
    write_series(dir / "exposure.csv", {{"long_short_ratio", &t.long_short_ratio},
                                        {"holdings", &t.holdings},
                                        {"gross_leverage", &t.gross_leverage}});
}

} // namespace lsq
