#include "lsq/synth.hpp"

#include "lsq/csv.hpp"
#include "lsq/random.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace lsq {

void SynthConfig::validate() const {
    if (n_symbols < 10) throw std::invalid_argument("synth: n_symbols must be >= 10");
    if (n_days < 300) throw std::invalid_argument("synth: n_days must be >= 300");
    if (!(persistence >= 0.0 && persistence < 1.0)) throw std::invalid_argument("synth: persistence must lie in [0, 1)");
    if (signal_strength < 0.0) throw std::invalid_argument("synth: signal_strength must be >= 0");
    if (publish_every < 1) throw std::invalid_argument("synth: publish_every must be >= 1");
}

namespace {

std::vector<Date> sessions(Date start, std::size_t n) {
    std::vector<Date> out;
    for (Date d = start; out.size() < n; d = d.plus_days(1)) {
        if (d.iso_weekday() <= 5) out.push_back(d);
    }
    return out;
}

std::vector<std::string> synth_symbols(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "SYN%03zu", i);
        out.emplace_back(buf);
    }
    return out;
}

} // namespace

SynthMarket generate_synthetic_market(const SynthConfig& cfg) {
    cfg.validate();
    const auto dates = sessions(cfg.start, cfg.n_days);
    const auto symbols = synth_symbols(cfg.n_symbols);
    SynthMarket out{{Panel(dates, symbols), Panel(dates, symbols), Panel(dates, symbols), Panel(dates, symbols),
                     Panel(dates, symbols)},
                    {},
                    Panel(dates, symbols)};
    auto& md = out.market;

    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> market(cfg.n_days);
    {
        std::mt19937_64 rng(derive_seed(cfg.seed, 1));
        for (auto& m : market) m = cfg.market_drift + cfg.market_vol * N(rng);
    }
    const double load = cfg.signal_scale * cfg.signal_strength;
    const double innovation = std::sqrt(1.0 - cfg.persistence * cfg.persistence);

    for (std::size_t s = 0; s < cfg.n_symbols; ++s) {
        std::mt19937_64 params(derive_seed(cfg.seed, 1000 + 3 * s));
        std::mt19937_64 path(derive_seed(cfg.seed, 1001 + 3 * s));
        std::mt19937_64 views(derive_seed(cfg.seed, 1002 + 3 * s));
        std::uniform_real_distribution<double> price0(20.0, 100.0), beta_u(0.6, 1.4);
        const double beta = beta_u(params);
        const double volume_base = std::exp(13.0 + 0.5 * N(params));
        double close = price0(params);
        double z = N(params);
        for (std::size_t t = 0; t < cfg.n_days; ++t) {
            const double open = close * std::exp(cfg.overnight_vol * N(path));
            const double z_prev = z;
            const double r = beta * market[t] + cfg.idio_vol * (load * z_prev + N(path));
            close = open * std::exp(r);
            const double high = std::max(open, close) * std::exp(std::abs(0.005 * N(path)));
            const double low = std::min(open, close) * std::exp(-std::abs(0.005 * N(path)));
            md.open(t, s) = open;
            md.high(t, s) = high;
            md.low(t, s) = low;
            md.close(t, s) = close;
            md.volume(t, s) = std::floor(volume_base * std::exp(0.3 * N(path)));
            z = cfg.persistence * z + innovation * N(path);
            out.latent(t, s) = z;

            if (t % static_cast<std::size_t>(cfg.publish_every) != 0) continue;
            const double v1 = z + cfg.view_noise * N(views);
            const double v2 = z + cfg.view_noise * N(views);
            const double v3 = z + cfg.view_noise * N(views);
            const Date d = dates[t];
            const std::string& sym = symbols[s];
            const double assets = 2000.0, revenue = 1000.0, cogs = 600.0;
            const double opex = 1000.0 * (0.2 - 0.03 * v3);
            auto put = [&](FundamentalField f, double v) { out.fundamentals.insert({d, sym, f, v}); };
            put(FundamentalField::total_assets, assets);
            put(FundamentalField::total_liabilities, 1200.0);
            put(FundamentalField::shareholders_equity, 800.0);
            put(FundamentalField::invested_capital, 1000.0);
            put(FundamentalField::nopat, 1000.0 * (0.10 + 0.03 * v1));
            put(FundamentalField::operating_cash_flow, assets * (0.08 + 0.02 * v2));
            put(FundamentalField::capital_expenditure, 50.0);
            put(FundamentalField::net_income, 100.0);
            put(FundamentalField::revenue, revenue);
            put(FundamentalField::cogs, cogs);
            put(FundamentalField::operating_expenses, opex);
            put(FundamentalField::ebitda, revenue - cogs - opex + 50.0);
            put(FundamentalField::interest, 10.0);
            put(FundamentalField::taxes, 20.0);
            put(FundamentalField::shares_outstanding, 100.0);
        }
    }
    return out;
}

void write_synthetic_market(const SynthMarket& m, const std::filesystem::path& dir) {
    write_bars_csv(m.market, dir / "bars.csv");
    write_fundamentals_csv(m.fundamentals, dir / "fundamentals.csv");
    auto out = csv::open_output(dir / "latent.csv");
    out << "date,symbol,latent\n";
    for (std::size_t t = 0; t < m.latent.n_dates(); ++t) {
        const std::string d = m.latent.dates()[t].iso();
        for (std::size_t s = 0; s < m.latent.n_symbols(); ++s) {
            if (is_missing(m.latent(t, s))) continue;
            out << d << ',' << m.latent.symbols()[s] << ',' << csv::format(m.latent(t, s)) << '\n';
        }
    }
}

Panel read_latent_csv(const std::filesystem::path& path, const std::vector<Date>& dates,
                      const std::vector<std::string>& symbols) {
    auto in = csv::open_input(path);
    Panel p(dates, symbols);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "': empty latent file");
    const auto header = csv::split(line);
    const auto c_date = csv::column_of(header, "date", path);
    const auto c_sym = csv::column_of(header, "symbol", path);
    const auto c_val = csv::column_of(header, "latent", path);
    while (std::getline(in, line)) {
        const auto f = csv::split(line);
        if (f.size() <= std::max({c_date, c_sym, c_val})) continue;
        Date d;
        double v = 0.0;
        if (!Date::try_parse(f[c_date], d) || !csv::parse_double(f[c_val], v)) continue;
        const auto t = p.date_index(d);
        const auto s = p.symbol_index(std::string(f[c_sym]));
        if (t && s) p(*t, *s) = v;
    }
    return p;
}

} // namespace lsq
