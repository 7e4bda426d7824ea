#include "doctest.h"

#include "lsq/factors.hpp"
#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <set>

using namespace lsq;

namespace {

// n symbols, each a fuzzed random walk with its own seed.
MarketData fuzz_market(std::size_t days, std::size_t n_symbols, std::uint64_t seed) {
    const auto dates = testing::business_days(Date(2020, 1, 1), days);
    const auto syms = testing::symbol_names(n_symbols);
    MarketData md{Panel(dates, syms), Panel(dates, syms), Panel(dates, syms), Panel(dates, syms), Panel(dates, syms)};
    for (std::size_t s = 0; s < n_symbols; ++s) {
        const auto b = testing::fuzz_bars(days, seed + s);
        md.open.set_column(s, b.open);
        md.high.set_column(s, b.high);
        md.low.set_column(s, b.low);
        md.close.set_column(s, b.close);
        md.volume.set_column(s, b.volume);
    }
    return md;
}

FundamentalsTable one_symbol_table(Date d, std::initializer_list<std::pair<FundamentalField, double>> fields) {
    FundamentalsTable t;
    for (const auto& [f, v] : fields) t.insert({d, "S000", f, v});
    return t;
}

} // namespace

TEST_CASE("registry: 28 uniquely named factors with windows >= 1") {
    const auto r = FactorRegistry::standard();
    CHECK(r.size() == 28);
    const auto names = r.names();
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    for (const auto& s : r.specs()) {
        for (const auto& [k, v] : s.params) CHECK(v >= 1);
    }
    CHECK(r.find("returns_39w")->param("offset") == 215);
    CHECK(r.find("volume_22d")->param("window") == 22);
    CHECK(r.find("williams_r")->param("n") == 10);

    FactorRegistry dup;
    FactorSpec a{"x", {}, {}, [](const FactorContext& c, const FactorSpec&) { return c.market().close; }};
    dup.add(a);
    CHECK_THROWS_AS(dup.add(a), std::invalid_argument);
    FactorSpec bad{"y", {{"n", 0}}, {}, a.compute};
    CHECK_THROWS_AS(dup.add(bad), std::invalid_argument);
}

TEST_CASE("fundamental plug-ins: EBIT, ROIC, asset growth, ratios") {
    const auto md = fuzz_market(70, 1, 3);
    const Date d0 = md.dates().front();
    auto table = one_symbol_table(d0, {{FundamentalField::revenue, 100},
                                       {FundamentalField::cogs, 40},
                                       {FundamentalField::operating_expenses, 20},
                                       {FundamentalField::nopat, 10},
                                       {FundamentalField::invested_capital, 100},
                                       {FundamentalField::total_assets, 100},
                                       {FundamentalField::shareholders_equity, 0},
                                       {FundamentalField::net_income, 8},
                                       {FundamentalField::operating_cash_flow, 12}});
    table.insert({md.dates()[63], "S000", FundamentalField::total_assets, 150});
    const FactorContext ctx(md, &table);

    CHECK(fundamental::ebit(ctx)(0, 0) == 40.0);
    CHECK(fundamental::roic(ctx)(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(fundamental::operating_ratio(ctx)(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(fundamental::earnings_quality(ctx)(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(is_missing(fundamental::asset_to_equity(ctx)(0, 0)));
    // no shares count supplied
    CHECK(is_missing(fundamental::ebitda_yield(ctx)(0, 0)));

    const auto g = fundamental::asset_growth(ctx, 63);
    const double oracle = (150.0 - 100.0) / 100.0 * 100.0;
    CHECK(g(63, 0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(g(63, 0) == doctest::Approx(50.0));
    CHECK(is_missing(g(62, 0)));
    CHECK(g(64, 0) == doctest::Approx(50.0));
}

TEST_CASE("fundamental factors without a table are missing") {
    const auto md = fuzz_market(30, 2, 1);
    const FactorContext ctx(md);
    const auto r = fundamental::roic(ctx);
    for (double v : r.values()) CHECK(is_missing(v));
}

TEST_CASE("standardize: population z-scores, constants, idempotence, winsor limits") {
    const auto dates = testing::business_days(Date(2024, 1, 1), 2);
    Panel p(dates, testing::symbol_names(3), std::vector<double>{1, 2, 3, 5, 5, 5});
    const auto z = standardize_cross_section(p, 0.0, 0.0);
    CHECK(z(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(z(0, 1) == doctest::Approx(0.0));
    CHECK(z(0, 2) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    for (std::size_t s = 0; s < 3; ++s) CHECK(z(1, s) == 0.0);

    const auto twice = standardize_cross_section(z, 0.0, 0.0);
    for (std::size_t i = 0; i < z.values().size(); ++i) CHECK(twice.values()[i] == doctest::Approx(z.values()[i]));

    CHECK_THROWS_AS(standardize_cross_section(p, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(standardize_cross_section(p, -0.1, 0.0), std::invalid_argument);

    // winsorizing pulls an outlier in before scaling
    Panel q(std::vector<Date>{dates[0]}, testing::symbol_names(101));
    for (std::size_t s = 0; s < 100; ++s) q(0, s) = static_cast<double>(s);
    q(0, 100) = 1e9;
    const auto w = standardize_cross_section(q, 0.01, 0.01);
    CHECK(w(0, 100) < 3.0);
}

TEST_CASE("mean reversion: identical trailing returns give zero everywhere") {
    const auto dates = testing::business_days(Date(2024, 1, 1), 30);
    const auto syms = testing::symbol_names(4);
    Panel c(dates, syms);
    for (std::size_t t = 0; t < dates.size(); ++t) {
        for (std::size_t s = 0; s < syms.size(); ++s) c(t, s) = (10.0 + s) * std::pow(1.01, t);
    }
    MarketData md{c, c, c, c, c};
    const FactorContext ctx(md);
    const auto reg = FactorRegistry::standard();
    const auto* spec = reg.find("mean_reversion_1m");
    const auto mr = spec->compute(ctx, *spec);
    for (std::size_t s = 0; s < syms.size(); ++s) CHECK(mr(25, s) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("compute_factors: every factor on shared axes, causal under truncation") {
    const auto md = fuzz_market(300, 5, 40);
    const auto reg = FactorRegistry::standard();
    const FactorContext ctx(md);
    const auto full = compute_factors(reg, ctx);
    REQUIRE(full.size() == 28);
    for (const auto& p : full.panels) CHECK(p.same_axes(md.close));

    const auto cut = md.head(240);
    const FactorContext ctx_cut(cut);
    const auto part = compute_factors(reg, ctx_cut);
    for (std::size_t f = 0; f < full.size(); ++f) {
        if (full.names[f] == "mean_reversion_1m") continue; // cross-sectional, still causal; checked below
        const auto& a = part.panels[f];
        const auto& b = full.panels[f];
        bool same = true;
        for (std::size_t t = 0; t < 240; ++t) {
            for (std::size_t s = 0; s < 5; ++s) {
                const double x = a(t, s), y = b(t, s);
                if (is_missing(x) != is_missing(y) || (!is_missing(x) && x != y)) same = false;
            }
        }
        INFO(full.names[f]);
        CHECK(same);
    }
    const auto& mr_part = part.at("mean_reversion_1m");
    const auto& mr_full = full.at("mean_reversion_1m");
    for (std::size_t t = 0; t < 240; ++t) {
        for (std::size_t s = 0; s < 5; ++s) {
            if (is_missing(mr_full(t, s))) {
                CHECK(is_missing(mr_part(t, s)));
            } else {
                CHECK(mr_part(t, s) == doctest::Approx(mr_full(t, s)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("factor CSV export writes one row per defined cell") {
    const auto md = fuzz_market(40, 2, 9);
    FactorRegistry reg;
    reg.add({"close", {}, {"close"}, [](const FactorContext& c, const FactorSpec&) { return c.market().close; }});
    const auto m = compute_factors(reg, FactorContext(md));
    const auto path = std::filesystem::temp_directory_path() / "lsq_factor_csv" / "f.csv";
    write_factor_matrix_csv(m, path);
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    std::getline(in, line);
    CHECK(line == "date,symbol,factor,value");
    while (std::getline(in, line)) ++n;
    CHECK(n == 80);
    std::filesystem::remove_all(path.parent_path());
}
