#include "lsq/factors.hpp"

#include "lsq/csv.hpp"
#include "lsq/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsq {

FactorContext::FactorContext(const MarketData& market, const FundamentalsTable* fundamentals)
    : market_(market), fundamentals_(fundamentals), market_returns_(market.dates().size(), kMissing) {
    const auto& close = market.close;
    for (std::size_t t = 1; t < close.n_dates(); ++t) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t s = 0; s < close.n_symbols(); ++s) {
            const double p0 = close(t - 1, s), p1 = close(t, s);
            if (is_missing(p0) || is_missing(p1) || p0 == 0.0) continue;
            sum += (p1 - p0) / p0;
            ++n;
        }
        if (n > 0) market_returns_[t] = sum / static_cast<double>(n);
    }
}

const Panel& FactorContext::fundamental(FundamentalField field) const {
    auto it = cache_.find(field);
    if (it != cache_.end()) return it->second;
    Panel p = fundamentals_ ? fundamentals_->as_of_panel(field, market_.dates(), market_.symbols())
                            : Panel(market_.dates(), market_.symbols());
    return cache_.emplace(field, std::move(p)).first->second;
}

int FactorSpec::param(const std::string& key) const {
    for (const auto& [k, v] : params) {
        if (k == key) return v;
    }
    throw std::invalid_argument("factor '" + name + "' has no parameter '" + key + "'");
}

void FactorRegistry::add(FactorSpec spec) {
    if (find(spec.name)) throw std::invalid_argument("duplicate factor name '" + spec.name + "'");
    for (const auto& [k, v] : spec.params) {
        if (v < 1) throw std::invalid_argument("factor '" + spec.name + "': parameter '" + k + "' must be >= 1");
    }
    if (!spec.compute) throw std::invalid_argument("factor '" + spec.name + "' has no compute function");
    specs_.push_back(std::move(spec));
}

std::vector<std::string> FactorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& s : specs_) out.push_back(s.name);
    return out;
}

const FactorSpec* FactorRegistry::find(const std::string& name) const {
    for (const auto& s : specs_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const Panel& FactorMatrix::at(const std::string& name) const { return panels[index_of(name)]; }

std::size_t FactorMatrix::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw std::out_of_range("no factor named '" + name + "'");
}

FactorMatrix compute_factors(const FactorRegistry& registry, const FactorContext& ctx) {
    FactorMatrix m;
    for (const auto& spec : registry.specs()) {
        m.names.push_back(spec.name);
        m.panels.push_back(spec.compute(ctx, spec));
        if (!m.panels.back().same_axes(ctx.market().close)) {
            throw std::logic_error("factor '" + spec.name + "' produced a panel on the wrong axes");
        }
    }
    return m;
}

namespace {

// Panel from a per-symbol function of the OHLCV columns.
template <typename Fn>
Panel per_symbol(const MarketData& md, Fn&& fn) {
    Panel out = md.close.blank_like();
    for (std::size_t s = 0; s < md.close.n_symbols(); ++s) {
        const auto o = md.open.column(s), h = md.high.column(s), l = md.low.column(s), c = md.close.column(s),
                   v = md.volume.column(s);
        out.set_column(s, fn(o, h, l, c, v));
    }
    return out;
}

using Cols = const std::vector<double>&;

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

Panel cross_sectional_zscore(const Panel& values) { return standardize_cross_section(values, 0.0, 0.0); }

Panel standardize_cross_section(const Panel& factor, double lower, double upper) {
    if (lower < 0.0 || lower >= 0.5 || upper < 0.0 || upper >= 0.5) {
        throw std::invalid_argument("winsor limits must lie in [0, 0.5)");
    }
    Panel out = factor.blank_like();
    std::vector<double> defined;
    for (std::size_t t = 0; t < factor.n_dates(); ++t) {
        defined.clear();
        for (double v : factor.row(t)) {
            if (!is_missing(v)) defined.push_back(v);
        }
        if (defined.empty()) continue;
        double lo = -INFINITY, hi = INFINITY;
        if (lower > 0.0 || upper > 0.0) {
            std::sort(defined.begin(), defined.end());
            if (lower > 0.0) lo = quantile_sorted(defined, lower);
            if (upper > 0.0) hi = quantile_sorted(defined, 1.0 - upper);
        }
        double mean = 0.0;
        for (double v : defined) mean += std::clamp(v, lo, hi);
        mean /= static_cast<double>(defined.size());
        double var = 0.0, scale = 0.0;
        for (double v : defined) {
            const double c = std::clamp(v, lo, hi);
            var += (c - mean) * (c - mean);
            scale = std::max(scale, std::abs(c));
        }
        double sd = std::sqrt(var / static_cast<double>(defined.size()));
        if (sd <= 1e-12 * scale) sd = 0.0;
        const auto in = factor.row(t);
        auto dst = out.row(t);
        for (std::size_t s = 0; s < in.size(); ++s) {
            if (is_missing(in[s])) continue;
            dst[s] = sd > 0.0 ? (std::clamp(in[s], lo, hi) - mean) / sd : 0.0;
        }
    }
    return out;
}

FactorMatrix standardize_all(const FactorMatrix& raw, double lower, double upper) {
    FactorMatrix out;
    out.names = raw.names;
    for (const auto& p : raw.panels) out.panels.push_back(standardize_cross_section(p, lower, upper));
    return out;
}

Panel mask_panel(const Panel& values, const std::function<bool(std::size_t, std::size_t)>& keep) {
    Panel out = values;
    for (std::size_t t = 0; t < out.n_dates(); ++t) {
        for (std::size_t s = 0; s < out.n_symbols(); ++s) {
            if (!keep(t, s)) out(t, s) = kMissing;
        }
    }
    return out;
}

void write_factor_matrix_csv(const FactorMatrix& m, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,factor,value\n";
    if (m.panels.empty()) return;
    const auto& axis = m.panels.front();
    for (std::size_t t = 0; t < axis.n_dates(); ++t) {
        const std::string d = axis.dates()[t].iso();
        for (std::size_t s = 0; s < axis.n_symbols(); ++s) {
            for (std::size_t f = 0; f < m.size(); ++f) {
                const double v = m.panels[f](t, s);
                if (is_missing(v)) continue;
                out << d << ',' << axis.symbols()[s] << ',' << m.names[f] << ',' << csv::format(v) << '\n';
            }
        }
    }
}

// --- fundamentals ---------------------------------------------------------------

namespace fundamental {

using F = FundamentalField;

Panel ratio(const Panel& num, const Panel& den) {
    Panel out = num.blank_like();
    for (std::size_t t = 0; t < num.n_dates(); ++t) {
        for (std::size_t s = 0; s < num.n_symbols(); ++s) {
            const double n = num(t, s), d = den(t, s);
            if (is_missing(n) || is_missing(d) || d == 0.0) continue;
            out(t, s) = n / d;
        }
    }
    return out;
}

Panel asset_to_equity(const FactorContext& ctx) {
    return ratio(ctx.fundamental(F::total_assets), ctx.fundamental(F::shareholders_equity));
}

Panel capex_to_cashflow(const FactorContext& ctx) {
    return ratio(ctx.fundamental(F::operating_cash_flow), ctx.fundamental(F::capital_expenditure));
}

Panel asset_growth(const FactorContext& ctx, int lag) {
    const Panel& a = ctx.fundamental(F::total_assets);
    Panel out = a.blank_like();
    const auto l = static_cast<std::size_t>(lag);
    for (std::size_t t = l; t < a.n_dates(); ++t) {
        for (std::size_t s = 0; s < a.n_symbols(); ++s) {
            const double prior = a(t - l, s), cur = a(t, s);
            if (is_missing(prior) || is_missing(cur) || prior == 0.0) continue;
            out(t, s) = (cur - prior) / prior * 100.0;
        }
    }
    return out;
}

Panel ebit(const FactorContext& ctx) {
    const Panel& r = ctx.fundamental(F::revenue);
    const Panel& g = ctx.fundamental(F::cogs);
    const Panel& oe = ctx.fundamental(F::operating_expenses);
    Panel out = r.blank_like();
    for (std::size_t t = 0; t < r.n_dates(); ++t) {
        for (std::size_t s = 0; s < r.n_symbols(); ++s) out(t, s) = r(t, s) - g(t, s) - oe(t, s);
    }
    return out;
}

Panel ebit_to_assets(const FactorContext& ctx) { return ratio(ebit(ctx), ctx.fundamental(F::total_assets)); }

Panel ebitda_yield(const FactorContext& ctx) {
    const Panel& shares = ctx.fundamental(F::shares_outstanding);
    const Panel& close = ctx.market().close;
    Panel mv = close.blank_like();
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) mv(t, s) = close(t, s) * shares(t, s);
    }
    return ratio(ctx.fundamental(F::ebitda), mv);
}

Panel roic(const FactorContext& ctx) { return ratio(ctx.fundamental(F::nopat), ctx.fundamental(F::invested_capital)); }

Panel ocf_to_assets(const FactorContext& ctx) {
    return ratio(ctx.fundamental(F::operating_cash_flow), ctx.fundamental(F::total_assets));
}

Panel operating_ratio(const FactorContext& ctx) {
    const Panel& oe = ctx.fundamental(F::operating_expenses);
    const Panel& g = ctx.fundamental(F::cogs);
    Panel num = oe.blank_like();
    for (std::size_t t = 0; t < oe.n_dates(); ++t) {
        for (std::size_t s = 0; s < oe.n_symbols(); ++s) num(t, s) = oe(t, s) + g(t, s);
    }
    return ratio(num, ctx.fundamental(F::revenue));
}

Panel earnings_quality(const FactorContext& ctx) {
    return ratio(ctx.fundamental(F::operating_cash_flow), ctx.fundamental(F::net_income));
}

} // namespace fundamental

// --- standard registry ----------------------------------------------------------------

FactorRegistry FactorRegistry::standard() {
    FactorRegistry r;
    using Spec = const FactorSpec&;
    using Ctx = const FactorContext&;
    const std::vector<std::string> hlc = {"high", "low", "close"};
    const std::vector<std::string> hlcv = {"high", "low", "close", "volume"};

    auto adx_line = [](ta::Series ta::AdxLines::*line) {
        return [line](Ctx ctx, Spec spec) {
            const int n = spec.param("n");
            return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols c, Cols) { return ta::adx(h, l, c, n).*line; });
        };
    };
    auto oscillator_line = [](ta::Series ta::OscillatorLines::*line) {
        return [line](Ctx ctx, Spec spec) {
            const int fast = spec.param("fast"), slow = spec.param("slow"), signal = spec.param("signal");
            return per_symbol(ctx.market(),
                              [&](Cols, Cols, Cols, Cols c, Cols) { return ta::apo_ppo_macd(c, fast, slow, signal).*line; });
        };
    };
    auto fundamental_only = [](Panel (*fn)(Ctx)) { return [fn](Ctx ctx, Spec) { return fn(ctx); }; };

    r.add({"adx", {{"n", 14}}, hlc, adx_line(&ta::AdxLines::adx)});
    r.add({"plus_di", {{"n", 14}}, hlc, adx_line(&ta::AdxLines::plus_di)});
    r.add({"minus_di", {{"n", 14}}, hlc, adx_line(&ta::AdxLines::minus_di)});
    r.add({"apo", {{"fast", 12}, {"slow", 26}, {"signal", 9}}, {"close"}, oscillator_line(&ta::OscillatorLines::apo)});
    r.add({"ppo", {{"fast", 12}, {"slow", 26}, {"signal", 9}}, {"close"}, oscillator_line(&ta::OscillatorLines::ppo)});
    r.add({"macd_signal", {{"fast", 12}, {"slow", 26}, {"signal", 9}}, {"close"},
           oscillator_line(&ta::OscillatorLines::macd_signal)});
    r.add({"cmo", {{"n", 14}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int n = spec.param("n");
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) { return ta::cmo(c, n); });
           }});
    r.add({"williams_r", {{"n", 10}}, hlc, [](Ctx ctx, Spec spec) {
               const int n = spec.param("n");
               return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols c, Cols) { return ta::williams_r(h, l, c, n); });
           }});
    r.add({"atr", {{"n", 14}}, hlc, [](Ctx ctx, Spec spec) {
               const int n = spec.param("n");
               return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols c, Cols) { return ta::atr(h, l, c, n); });
           }});
    r.add({"ad", {}, hlcv, [](Ctx ctx, Spec) {
               return per_symbol(ctx.market(),
                                 [&](Cols, Cols h, Cols l, Cols c, Cols v) { return ta::accumulation_distribution(h, l, c, v); });
           }});
    r.add({"money_flow_volume", {{"window", 21}}, hlcv, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols c, Cols v) {
                   return ta::rolling_sum(ta::money_flow_multiplier_volume(h, l, c, v), w);
               });
           }});
    r.add({"beta", {{"window", 63}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               const auto& market = ctx.market_returns();
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) {
                   return ta::rolling_beta(ta::simple_returns(c), market, w);
               });
           }});
    r.add({"medprice", {}, {"high", "low"}, [](Ctx ctx, Spec) {
               return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols, Cols) { return ta::medprice(h, l); });
           }});
    r.add({"mfi", {{"n", 14}}, hlcv, [](Ctx ctx, Spec spec) {
               const int n = spec.param("n");
               return per_symbol(ctx.market(), [&](Cols, Cols h, Cols l, Cols c, Cols v) { return ta::mfi(h, l, c, v, n); });
           }});
    r.add({"rate_of_return", {{"window", 63}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) { return ta::rate_of_return(c, w); });
           }});
    r.add({"returns_39w", {{"offset", 215}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int k = spec.param("offset");
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) { return ta::returns_over_offset(c, k); });
           }});
    r.add({"mean_reversion_1m", {{"window", 21}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               return cross_sectional_zscore(
                   per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) { return ta::rate_of_return(c, w); }));
           }});
    r.add({"trendline", {{"window", 21}}, {"close"}, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols c, Cols) { return ta::trendline(c, w); });
           }});
    r.add({"volume_22d", {{"window", 22}}, {"volume"}, [](Ctx ctx, Spec spec) {
               const int w = spec.param("window");
               return per_symbol(ctx.market(), [&](Cols, Cols, Cols, Cols, Cols v) { return ta::rolling_sum(v, w); });
           }});

    r.add({"asset_to_equity", {}, {"total_assets", "shareholders_equity"}, fundamental_only(&fundamental::asset_to_equity)});
    r.add({"capex_to_cashflow", {}, {"operating_cash_flow", "capital_expenditure"},
           fundamental_only(&fundamental::capex_to_cashflow)});
    r.add({"asset_growth_3m", {{"lag", 63}}, {"total_assets"},
           [](Ctx ctx, Spec spec) { return fundamental::asset_growth(ctx, spec.param("lag")); }});
    r.add({"ebit_to_assets", {}, {"revenue", "cogs", "operating_expenses", "total_assets"},
           fundamental_only(&fundamental::ebit_to_assets)});
    r.add({"ebitda_yield", {}, {"ebitda", "shares_outstanding", "close"}, fundamental_only(&fundamental::ebitda_yield)});
    r.add({"roic", {}, {"nopat", "invested_capital"}, fundamental_only(&fundamental::roic)});
    r.add({"ocf_to_assets", {}, {"operating_cash_flow", "total_assets"}, fundamental_only(&fundamental::ocf_to_assets)});
    r.add({"operating_ratio", {}, {"operating_expenses", "cogs", "revenue"}, fundamental_only(&fundamental::operating_ratio)});
    r.add({"earnings_quality", {}, {"operating_cash_flow", "net_income"}, fundamental_only(&fundamental::earnings_quality)});
    return r;
}

} // namespace lsq
