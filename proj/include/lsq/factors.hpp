#pragma once

#include "lsq/market_data.hpp"
#include "lsq/panel.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lsq {

// Inputs a factor may read. Fundamentals are optional; fundamental factors
// come out all-missing without them.
class FactorContext {
public:
    FactorContext(const MarketData& market, const FundamentalsTable* fundamentals = nullptr);

    const MarketData& market() const { return market_; }
    // Equal-weighted close-to-close return across every symbol with both closes.
    const std::vector<double>& market_returns() const { return market_returns_; }
    // As-of joined fundamentals field (cached).
    const Panel& fundamental(FundamentalField field) const;
    bool has_fundamentals() const { return fundamentals_ != nullptr; }

private:
    const MarketData& market_;
    const FundamentalsTable* fundamentals_;
    std::vector<double> market_returns_;
    mutable std::map<FundamentalField, Panel> cache_;
};

struct FactorSpec {
    std::string name;
    // Named window lengths / smoothing constants, all >= 1.
    std::vector<std::pair<std::string, int>> params;
    // Price panels ("high", "close", ...) and/or fundamentals field names.
    std::vector<std::string> dependencies;
    std::function<Panel(const FactorContext&, const FactorSpec&)> compute;

    int param(const std::string& key) const;
};

class FactorRegistry {
public:
    // Throws std::invalid_argument on a duplicate name or a window < 1.
    void add(FactorSpec spec);
    const std::vector<FactorSpec>& specs() const { return specs_; }
    std::vector<std::string> names() const;
    const FactorSpec* find(const std::string& name) const;
    std::size_t size() const { return specs_.size(); }

    // The 28 technical and fundamental factors with their default parameters.
    static FactorRegistry standard();

private:
    std::vector<FactorSpec> specs_;
};

// One Panel per factor, all on the market data axes, in registry order.
struct FactorMatrix {
    std::vector<std::string> names;
    std::vector<Panel> panels;

    const Panel& at(const std::string& name) const;
    std::size_t size() const { return names.size(); }
    std::size_t index_of(const std::string& name) const;
};

FactorMatrix compute_factors(const FactorRegistry& registry, const FactorContext& ctx);

// Per date: clip to the [lower, upper] cross-sectional quantiles (linear
// interpolation), subtract the mean, divide by the population deviation.
// Zero deviation gives zeros; all-missing dates pass through.
Panel standardize_cross_section(const Panel& factor, double lower = 0.01, double upper = 0.01);

// Plain per-date z-score without winsorizing.
Panel cross_sectional_zscore(const Panel& values);

FactorMatrix standardize_all(const FactorMatrix& raw, double lower = 0.01, double upper = 0.01);

// Cells where `keep` is false become missing; axes must match.
Panel mask_panel(const Panel& values, const std::function<bool(std::size_t, std::size_t)>& keep);

// Long CSV `date,symbol,factor,value`; missing cells are skipped.
void write_factor_matrix_csv(const FactorMatrix& m, const std::filesystem::path& path);

namespace fundamental {

// Elementwise ratio; zero or missing denominator -> missing.
Panel ratio(const Panel& num, const Panel& den);

Panel asset_to_equity(const FactorContext& ctx);
Panel capex_to_cashflow(const FactorContext& ctx);
// 100 * (A_t - A_{t-lag}) / A_{t-lag}, lag in sessions.
Panel asset_growth(const FactorContext& ctx, int lag = 63);
Panel ebit(const FactorContext& ctx);
Panel ebit_to_assets(const FactorContext& ctx);
// EBITDA / (close * shares_outstanding); missing without a share count.
Panel ebitda_yield(const FactorContext& ctx);
Panel roic(const FactorContext& ctx);
Panel ocf_to_assets(const FactorContext& ctx);
Panel operating_ratio(const FactorContext& ctx);
Panel earnings_quality(const FactorContext& ctx);

} // namespace fundamental

} // namespace lsq
