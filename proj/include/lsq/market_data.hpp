#pragma once

#include "lsq/date.hpp"
#include "lsq/panel.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lsq {

struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    // Positive prices, integral non-negative volume, low <= min(open, close),
    // high >= max(open, close). Returns the violated rule or nullptr.
    const char* violation() const;
};

enum class FundamentalField {
    total_assets,
    total_liabilities,
    shareholders_equity,
    operating_cash_flow,
    capital_expenditure,
    revenue,
    cogs,
    operating_expenses,
    net_income,
    interest,
    taxes,
    nopat,
    invested_capital,
    ebitda,
    shares_outstanding,
};

inline constexpr std::size_t kFundamentalFieldCount = 15;

std::string_view to_string(FundamentalField f);
std::optional<FundamentalField> parse_fundamental_field(std::string_view name);
const std::array<FundamentalField, kFundamentalFieldCount>& all_fundamental_fields();

struct FundamentalsRow {
    Date date;
    std::string symbol;
    FundamentalField field = FundamentalField::total_assets;
    double value = 0.0;
};

// OHLCV panels sharing one date x symbol axis.
struct MarketData {
    Panel open;
    Panel high;
    Panel low;
    Panel close;
    Panel volume;

    const std::vector<Date>& dates() const { return close.dates(); }
    const std::vector<std::string>& symbols() const { return close.symbols(); }
    bool has_bar(std::size_t t, std::size_t s) const { return !is_missing(close(t, s)); }
    Panel dollar_volume() const;
    // Rows [0, n) of every panel.
    MarketData head(std::size_t n) const;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::size_t rows_rejected = 0;
    std::size_t duplicates = 0;
    std::size_t malformed_dates = 0;
    // A = L + SE checked on every (date, symbol) carrying all three fields;
    // mismatches beyond 1% of assets are counted, never enforced.
    std::size_t balance_identity_checked = 0;
    std::size_t balance_identity_violations = 0;
    std::vector<std::string> diagnostics;
};

// Column names for the bar file; defaults match `date,symbol,open,high,low,close,volume`.
struct BarSchema {
    std::string date = "date";
    std::string symbol = "symbol";
    std::string open = "open";
    std::string high = "high";
    std::string low = "low";
    std::string close = "close";
    std::string volume = "volume";
};

struct BarIngest {
    MarketData data;
    IngestReport report;
};

// Unreadable file or missing header column -> std::runtime_error. Invalid rows are
// skipped and counted; a repeated (date, symbol) keeps the last row seen.
// Symbols are sorted so the result does not depend on row order.
BarIngest ingest_bars(const std::filesystem::path& path, const BarSchema& schema = {});
BarIngest parse_bars(std::istream& in, const BarSchema& schema = {}, const std::filesystem::path& source = "<stream>");
MarketData make_market_data(const std::map<std::pair<Date, std::string>, Bar>& bars);

void write_bars_csv(const MarketData& data, const std::filesystem::path& path);

// Long-format fundamentals kept as per-(symbol, field) dated series.
class FundamentalsTable {
public:
    void insert(const FundamentalsRow& row, IngestReport* report = nullptr);
    std::size_t size() const;

    // Latest value dated on or before `d`, if any.
    std::optional<double> as_of(const std::string& symbol, FundamentalField field, Date d) const;

    // As-of join onto an existing axis.
    Panel as_of_panel(FundamentalField field, const std::vector<Date>& dates,
                      const std::vector<std::string>& symbols) const;

    std::vector<FundamentalsRow> rows() const;

private:
    using Series = std::vector<std::pair<Date, double>>; // sorted by date
    std::map<std::string, std::array<Series, kFundamentalFieldCount>> data_;
};

struct FundamentalsIngest {
    FundamentalsTable table;
    IngestReport report;
};

FundamentalsIngest ingest_fundamentals(const std::filesystem::path& path);
FundamentalsIngest parse_fundamentals(std::istream& in, const std::filesystem::path& source = "<stream>");
void write_fundamentals_csv(const FundamentalsTable& table, const std::filesystem::path& path);

enum class UniverseRefresh { daily, monthly };

// Per-date admitted symbols; membership is a dates x symbols boolean mask.
class Universe {
public:
    Universe() = default;
    Universe(std::vector<Date> dates, std::vector<std::string> symbols, std::size_t target_size);

    bool contains(std::size_t t, std::size_t s) const { return mask_[t * symbols_.size() + s] != 0; }
    void set(std::size_t t, std::size_t s, bool in) { mask_[t * symbols_.size() + s] = in ? 1 : 0; }
    std::vector<std::size_t> members(std::size_t t) const;
    std::size_t size_at(std::size_t t) const;

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& symbols() const { return symbols_; }
    std::size_t target_size() const { return target_size_; }

    // Everything listed on a date, no ranking.
    static Universe all_listed(const MarketData& data);

private:
    std::vector<Date> dates_;
    std::vector<std::string> symbols_;
    std::vector<unsigned char> mask_;
    std::size_t target_size_ = 0;
};

// Top-n symbols by trailing mean dollar volume over `lookback` sessions. Dates with
// fewer than `lookback` sessions of history are empty. With monthly refresh the
// ranking is recomputed on the first eligible session of each month and carried
// until the next refresh; a member is admitted on a date only if it has a bar there.
Universe build_universe(const Panel& dollar_volume, int n, int lookback,
                        UniverseRefresh refresh = UniverseRefresh::monthly);

void write_universe_csv(const Universe& universe, const std::filesystem::path& path);

} // namespace lsq
