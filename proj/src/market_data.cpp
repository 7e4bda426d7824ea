#include "lsq/market_data.hpp"

#include "lsq/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace lsq {

namespace {

constexpr std::size_t kMaxDiagnostics = 200;

void note(IngestReport& r, std::string msg) {
    if (r.diagnostics.size() < kMaxDiagnostics) r.diagnostics.push_back(std::move(msg));
}

constexpr std::array<std::string_view, kFundamentalFieldCount> kFieldNames = {
    "total_assets", "total_liabilities", "shareholders_equity", "operating_cash_flow", "capital_expenditure",
    "revenue",      "cogs",              "operating_expenses",  "net_income",          "interest",
    "taxes",        "nopat",             "invested_capital",    "ebitda",              "shares_outstanding",
};

} // namespace

const char* Bar::violation() const {
    for (double p : {open, high, low, close}) {
        if (!std::isfinite(p) || p <= 0.0) return "non-positive price";
    }
    if (!std::isfinite(volume) || volume < 0.0 || std::floor(volume) != volume) return "volume not a non-negative integer";
    if (low > high) return "low above high";
    if (low > std::min(open, close)) return "low above open/close";
    if (high < std::max(open, close)) return "high below open/close";
    return nullptr;
}

std::string_view to_string(FundamentalField f) { return kFieldNames[static_cast<std::size_t>(f)]; }

std::optional<FundamentalField> parse_fundamental_field(std::string_view name) {
    for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
        if (kFieldNames[i] == name) return static_cast<FundamentalField>(i);
    }
    return std::nullopt;
}

const std::array<FundamentalField, kFundamentalFieldCount>& all_fundamental_fields() {
    static const auto fields = [] {
        std::array<FundamentalField, kFundamentalFieldCount> a{};
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<FundamentalField>(i);
        return a;
    }();
    return fields;
}

Panel MarketData::dollar_volume() const {
    Panel out = close.blank_like();
    for (std::size_t t = 0; t < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) out(t, s) = close(t, s) * volume(t, s);
    }
    return out;
}

MarketData MarketData::head(std::size_t n) const {
    return MarketData{open.head(n), high.head(n), low.head(n), close.head(n), volume.head(n)};
}

MarketData make_market_data(const std::map<std::pair<Date, std::string>, Bar>& bars) {
    std::set<Date> date_set;
    std::set<std::string> symbol_set;
    for (const auto& [key, bar] : bars) {
        date_set.insert(key.first);
        symbol_set.insert(key.second);
    }
    std::vector<Date> dates(date_set.begin(), date_set.end());
    std::vector<std::string> symbols(symbol_set.begin(), symbol_set.end());
    MarketData md{Panel(dates, symbols), Panel(dates, symbols), Panel(dates, symbols), Panel(dates, symbols),
                  Panel(dates, symbols)};
    for (const auto& [key, bar] : bars) {
        const auto t = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), key.first) - dates.begin());
        const auto s = static_cast<std::size_t>(std::lower_bound(symbols.begin(), symbols.end(), key.second) - symbols.begin());
        md.open(t, s) = bar.open;
        md.high(t, s) = bar.high;
        md.low(t, s) = bar.low;
        md.close(t, s) = bar.close;
        md.volume(t, s) = bar.volume;
    }
    return md;
}

BarIngest parse_bars(std::istream& in, const BarSchema& schema, const std::filesystem::path& source) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + source.string() + "': empty bar file");
    const auto header = csv::split(line);
    const std::size_t c_date = csv::column_of(header, schema.date, source);
    const std::size_t c_sym = csv::column_of(header, schema.symbol, source);
    const std::size_t c_open = csv::column_of(header, schema.open, source);
    const std::size_t c_high = csv::column_of(header, schema.high, source);
    const std::size_t c_low = csv::column_of(header, schema.low, source);
    const std::size_t c_close = csv::column_of(header, schema.close, source);
    const std::size_t c_vol = csv::column_of(header, schema.volume, source);
    const std::size_t width = header.size();

    IngestReport report;
    std::map<std::pair<Date, std::string>, Bar> bars;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        ++report.rows_read;
        const auto f = csv::split(line);
        auto reject = [&](const std::string& why) {
            ++report.rows_rejected;
            note(report, source.string() + ":" + std::to_string(line_no) + ": " + why);
        };
        if (f.size() != width) {
            reject("expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));
            continue;
        }
        Bar bar;
        if (!Date::try_parse(csv::trim(f[c_date]), bar.date)) {
            ++report.malformed_dates;
            reject("malformed date '" + std::string(f[c_date]) + "'");
            continue;
        }
        const std::string symbol(csv::trim(f[c_sym]));
        if (symbol.empty()) {
            reject("empty symbol");
            continue;
        }
        if (!csv::parse_double(f[c_open], bar.open) || !csv::parse_double(f[c_high], bar.high) ||
            !csv::parse_double(f[c_low], bar.low) || !csv::parse_double(f[c_close], bar.close) ||
            !csv::parse_double(f[c_vol], bar.volume)) {
            reject("unparseable number");
            continue;
        }
        if (const char* why = bar.violation()) {
            reject(why);
            continue;
        }
        auto [it, inserted] = bars.insert_or_assign({bar.date, symbol}, bar);
        if (!inserted) {
            ++report.duplicates;
            note(report, source.string() + ":" + std::to_string(line_no) + ": duplicate " + bar.date.iso() + "/" +
                             symbol + " replaces earlier row");
        }
    }
    report.rows_accepted = bars.size();
    return BarIngest{make_market_data(bars), std::move(report)};
}

BarIngest ingest_bars(const std::filesystem::path& path, const BarSchema& schema) {
    auto in = csv::open_input(path);
    return parse_bars(in, schema, path);
}

void write_bars_csv(const MarketData& data, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,open,high,low,close,volume\n";
    for (std::size_t t = 0; t < data.close.n_dates(); ++t) {
        const std::string d = data.dates()[t].iso();
        for (std::size_t s = 0; s < data.close.n_symbols(); ++s) {
            if (!data.has_bar(t, s)) continue;
            out << d << ',' << data.symbols()[s] << ',' << csv::format(data.open(t, s)) << ','
                << csv::format(data.high(t, s)) << ',' << csv::format(data.low(t, s)) << ','
                << csv::format(data.close(t, s)) << ',' << csv::format(data.volume(t, s)) << '\n';
        }
    }
}

// --- fundamentals ---------------------------------------------------------------

void FundamentalsTable::insert(const FundamentalsRow& row, IngestReport* report) {
    auto& series = data_[row.symbol][static_cast<std::size_t>(row.field)];
    auto it = std::lower_bound(series.begin(), series.end(), row.date,
                               [](const auto& p, Date d) { return p.first < d; });
    if (it != series.end() && it->first == row.date) {
        it->second = row.value;
        if (report) {
            ++report->duplicates;
            note(*report, "duplicate " + row.date.iso() + "/" + row.symbol + "/" + std::string(to_string(row.field)) +
                              " replaces earlier value");
        }
        return;
    }
    series.insert(it, {row.date, row.value});
}

std::size_t FundamentalsTable::size() const {
    std::size_t n = 0;
    for (const auto& [sym, fields] : data_) {
        for (const auto& s : fields) n += s.size();
    }
    return n;
}

std::optional<double> FundamentalsTable::as_of(const std::string& symbol, FundamentalField field, Date d) const {
    auto it = data_.find(symbol);
    if (it == data_.end()) return std::nullopt;
    const auto& series = it->second[static_cast<std::size_t>(field)];
    auto pos = std::upper_bound(series.begin(), series.end(), d,
                                [](Date v, const auto& p) { return v < p.first; });
    if (pos == series.begin()) return std::nullopt;
    return std::prev(pos)->second;
}

Panel FundamentalsTable::as_of_panel(FundamentalField field, const std::vector<Date>& dates,
                                     const std::vector<std::string>& symbols) const {
    Panel out(dates, symbols);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        auto it = data_.find(symbols[s]);
        if (it == data_.end()) continue;
        const auto& series = it->second[static_cast<std::size_t>(field)];
        std::size_t k = 0;
        for (std::size_t t = 0; t < dates.size(); ++t) {
            while (k < series.size() && series[k].first <= dates[t]) ++k;
            if (k > 0) out(t, s) = series[k - 1].second;
        }
    }
    return out;
}

std::vector<FundamentalsRow> FundamentalsTable::rows() const {
    std::vector<FundamentalsRow> out;
    for (const auto& [sym, fields] : data_) {
        for (std::size_t f = 0; f < fields.size(); ++f) {
            for (const auto& [d, v] : fields[f]) out.push_back({d, sym, static_cast<FundamentalField>(f), v});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.date != b.date) return a.date < b.date;
        if (a.symbol != b.symbol) return a.symbol < b.symbol;
        return a.field < b.field;
    });
    return out;
}

FundamentalsIngest parse_fundamentals(std::istream& in, const std::filesystem::path& source) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + source.string() + "': empty fundamentals file");
    const auto header = csv::split(line);
    const std::size_t c_date = csv::column_of(header, "date", source);
    const std::size_t c_sym = csv::column_of(header, "symbol", source);
    const std::size_t c_field = csv::column_of(header, "field", source);
    const std::size_t c_value = csv::column_of(header, "value", source);
    const std::size_t width = header.size();

    FundamentalsIngest result;
    auto& report = result.report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        ++report.rows_read;
        const auto f = csv::split(line);
        auto reject = [&](const std::string& why) {
            ++report.rows_rejected;
            note(report, source.string() + ":" + std::to_string(line_no) + ": " + why);
        };
        if (f.size() != width) {
            reject("wrong field count");
            continue;
        }
        FundamentalsRow row;
        if (!Date::try_parse(csv::trim(f[c_date]), row.date)) {
            ++report.malformed_dates;
            reject("malformed date '" + std::string(f[c_date]) + "'");
            continue;
        }
        row.symbol = std::string(csv::trim(f[c_sym]));
        if (row.symbol.empty()) {
            reject("empty symbol");
            continue;
        }
        const auto field = parse_fundamental_field(csv::trim(f[c_field]));
        if (!field) {
            reject("unknown field '" + std::string(f[c_field]) + "'");
            continue;
        }
        row.field = *field;
        if (!csv::parse_double(f[c_value], row.value) || !std::isfinite(row.value)) {
            reject("unparseable value");
            continue;
        }
        result.table.insert(row, &report);
    }
    report.rows_accepted = result.table.size();

    // Accounting identity check, reported only.
    for (const auto& row : result.table.rows()) {
        if (row.field != FundamentalField::total_assets) continue;
        const auto l = result.table.as_of(row.symbol, FundamentalField::total_liabilities, row.date);
        const auto e = result.table.as_of(row.symbol, FundamentalField::shareholders_equity, row.date);
        if (!l || !e) continue;
        ++report.balance_identity_checked;
        if (std::abs(row.value - (*l + *e)) > 0.01 * std::abs(row.value)) ++report.balance_identity_violations;
    }
    return result;
}

FundamentalsIngest ingest_fundamentals(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    return parse_fundamentals(in, path);
}

void write_fundamentals_csv(const FundamentalsTable& table, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,field,value\n";
    for (const auto& r : table.rows()) {
        out << r.date.iso() << ',' << r.symbol << ',' << to_string(r.field) << ',' << csv::format(r.value) << '\n';
    }
}

// --- universe ---------------------------------------------------------------------

Universe::Universe(std::vector<Date> dates, std::vector<std::string> symbols, std::size_t target_size)
    : dates_(std::move(dates)), symbols_(std::move(symbols)), mask_(dates_.size() * symbols_.size(), 0),
      target_size_(target_size) {}

std::vector<std::size_t> Universe::members(std::size_t t) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < symbols_.size(); ++s) {
        if (contains(t, s)) out.push_back(s);
    }
    return out;
}

std::size_t Universe::size_at(std::size_t t) const {
    std::size_t n = 0;
    for (std::size_t s = 0; s < symbols_.size(); ++s) n += contains(t, s) ? 1 : 0;
    return n;
}

Universe Universe::all_listed(const MarketData& data) {
    Universe u(data.dates(), data.symbols(), data.symbols().size());
    for (std::size_t t = 0; t < data.dates().size(); ++t) {
        for (std::size_t s = 0; s < data.symbols().size(); ++s) u.set(t, s, data.has_bar(t, s));
    }
    return u;
}

Universe build_universe(const Panel& dollar_volume, int n, int lookback, UniverseRefresh refresh) {
    if (n <= 0) throw std::invalid_argument("universe size must be positive");
    if (lookback < 1) throw std::invalid_argument("universe lookback must be >= 1");
    const std::size_t n_dates = dollar_volume.n_dates();
    const std::size_t n_sym = dollar_volume.n_symbols();
    const auto lb = static_cast<std::size_t>(lookback);
    Universe u(dollar_volume.dates(), dollar_volume.symbols(), static_cast<std::size_t>(n));

    std::vector<unsigned char> ranked(n_sym, 0);
    bool have_ranking = false;
    for (std::size_t t = 0; t < n_dates; ++t) {
        if (t + 1 < lb) continue;
        const bool refresh_now = refresh == UniverseRefresh::daily || !have_ranking ||
                                 dollar_volume.dates()[t].month_start() != dollar_volume.dates()[t - 1].month_start();
        if (refresh_now) {
            std::vector<std::pair<double, std::size_t>> adv;
            for (std::size_t s = 0; s < n_sym; ++s) {
                if (is_missing(dollar_volume(t, s))) continue;
                double sum = 0.0;
                std::size_t count = 0;
                for (std::size_t k = t + 1 - lb; k <= t; ++k) {
                    const double v = dollar_volume(k, s);
                    if (!is_missing(v)) {
                        sum += v;
                        ++count;
                    }
                }
                adv.emplace_back(sum / static_cast<double>(count), s);
            }
            std::stable_sort(adv.begin(), adv.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            std::fill(ranked.begin(), ranked.end(), 0);
            for (std::size_t i = 0; i < adv.size() && i < static_cast<std::size_t>(n); ++i) ranked[adv[i].second] = 1;
            have_ranking = true;
        }
        for (std::size_t s = 0; s < n_sym; ++s) {
            if (ranked[s] && !is_missing(dollar_volume(t, s))) u.set(t, s, true);
        }
    }
    return u;
}

void write_universe_csv(const Universe& universe, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol\n";
    for (std::size_t t = 0; t < universe.dates().size(); ++t) {
        for (std::size_t s : universe.members(t)) out << universe.dates()[t].iso() << ',' << universe.symbols()[s] << '\n';
    }
}

} // namespace lsq
