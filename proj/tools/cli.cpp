#include "cli.hpp"

#include "lsq/analytics.hpp"
#include "lsq/csv.hpp"
#include "lsq/factors.hpp"
#include "lsq/pipeline.hpp"
#include "lsq/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace lsq::cli {

namespace {

using nlohmann::json;

json report_json(const IngestReport& r) {
    return {{"rows_read", r.rows_read},
            {"rows_accepted", r.rows_accepted},
            {"rows_rejected", r.rows_rejected},
            {"duplicates", r.duplicates},
            {"malformed_dates", r.malformed_dates},
            {"balance_identity_checked", r.balance_identity_checked},
            {"balance_identity_violations", r.balance_identity_violations},
            {"diagnostics", r.diagnostics}};
}

void write_json(const json& j, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << j.dump(2) << '\n';
}

struct IngestArgs {
    std::string bars, fundamentals, out = "ingested";
};

int cmd_ingest(const IngestArgs& a, std::ostream& log) {
    auto bars = ingest_bars(a.bars);
    json report;
    report["bars"] = report_json(bars.report);
    report["bars"]["path"] = a.bars;
    report["bars"]["sessions"] = bars.data.dates().size();
    report["bars"]["symbols"] = bars.data.symbols().size();
    write_bars_csv(bars.data, std::filesystem::path(a.out) / "bars.csv");
    log << "bars: " << bars.report.rows_accepted << " accepted, " << bars.report.rows_rejected << " rejected ("
        << bars.report.malformed_dates << " malformed dates)\n";
    if (!a.fundamentals.empty()) {
        auto f = ingest_fundamentals(a.fundamentals);
        report["fundamentals"] = report_json(f.report);
        report["fundamentals"]["path"] = a.fundamentals;
        write_fundamentals_csv(f.table, std::filesystem::path(a.out) / "fundamentals.csv");
        log << "fundamentals: " << f.report.rows_accepted << " accepted, " << f.report.rows_rejected << " rejected\n";
    }
    write_json(report, std::filesystem::path(a.out) / "ingest_report.json");
    return 0;
}

struct SynthArgs {
    SynthConfig cfg;
    std::string out = "synthetic";
};

int cmd_synth(const SynthArgs& a, std::ostream& log) {
    const auto m = generate_synthetic_market(a.cfg);
    write_synthetic_market(m, a.out);
    log << "synthetic market: " << a.cfg.n_symbols << " symbols x " << a.cfg.n_days << " sessions, strength "
        << a.cfg.signal_strength << ", seed " << a.cfg.seed << " -> " << a.out << "\n";
    return 0;
}

struct DataArgs {
    std::string config, bars, fundamentals;
};

RunConfig config_from(const DataArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
    if (!a.bars.empty()) cfg.bars = a.bars;
    if (!a.fundamentals.empty()) cfg.fundamentals = a.fundamentals;
    if (cfg.bars.empty()) throw ConfigError("bars: no bar file given (use --bars or a config)");
    return cfg;
}

int cmd_factors(const DataArgs& a, const std::string& out, bool raw, std::ostream& log) {
    const RunConfig cfg = config_from(a);
    const auto bars = ingest_bars(cfg.bars);
    std::optional<FundamentalsTable> fundamentals;
    if (!cfg.fundamentals.empty()) fundamentals = ingest_fundamentals(cfg.fundamentals).table;
    const FactorContext ctx(bars.data, fundamentals ? &*fundamentals : nullptr);
    auto m = compute_factors(FactorRegistry::standard(), ctx);
    if (!raw) m = standardize_all(m, cfg.winsor, cfg.winsor);
    write_factor_matrix_csv(m, out);
    log << m.size() << " factors over " << bars.data.dates().size() << " sessions -> " << out << "\n";
    return 0;
}

int cmd_analyze_factor(const DataArgs& a, const std::string& factor, int quantiles, const std::vector<int>& horizons,
                       const std::string& out, std::ostream& log) {
    const RunConfig cfg = config_from(a);
    const auto bars = ingest_bars(cfg.bars);
    std::optional<FundamentalsTable> fundamentals;
    if (!cfg.fundamentals.empty()) fundamentals = ingest_fundamentals(cfg.fundamentals).table;
    const auto& registry = FactorRegistry::standard();
    const FactorContext ctx(bars.data, fundamentals ? &*fundamentals : nullptr);
    const auto m = compute_factors(registry, ctx);
    const auto names = m.names;
    if (std::find(names.begin(), names.end(), factor) == names.end()) {
        std::string valid;
        for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("factor: unknown factor '" + factor + "'; valid: " + valid);
    }
    const auto q = quantile_report(m.at(factor), bars.data.close, quantiles, horizons);
    write_quantile_report(q, out);
    for (const auto& s : q.stats) {
        log << "q" << s.quantile << " " << s.horizon << "d mean " << s.mean << " (se " << s.std_error << ")\n";
    }
    return 0;
}

struct BacktestArgs {
    std::string config, output_dir, rebalance, ensemble;
    std::optional<std::uint64_t> seed;
};

int cmd_backtest(const BacktestArgs& a, std::ostream& log) {
    RunConfig cfg = RunConfig::load(a.config);
    if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
    if (a.seed) cfg.seed = *a.seed;
    if (!a.rebalance.empty()) {
        try {
            cfg.backtest.rebalance = parse_rebalance_mode(a.rebalance);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("backtest.rebalance: ") + e.what());
        }
    }
    if (!a.ensemble.empty()) {
        cfg.ensemble = a.ensemble;
        cfg.members.clear();
        try {
            cfg.ensemble_spec();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("ensemble: ") + e.what());
        }
    }
    try {
        const auto data = load_and_prepare(cfg);
        std::optional<Panel> latent;
        if (cfg.scorer == "latent") {
            if (cfg.latent.empty()) throw ConfigError("latent: the latent scorer needs a latent file");
            latent = read_latent_csv(cfg.latent, data.market.dates(), data.market.symbols());
        }
        log << "backtest: " << data.market.symbols().size() << " symbols, " << data.market.dates().size()
            << " sessions, scorer " << cfg.scorer << "\n";
        const auto out = run_pipeline(cfg, data, latent ? &*latent : nullptr);
        write_run(cfg, data, out);
        const auto& ts = out.tearsheet;
        log << "total return " << ts.total_return_pct << "%, sharpe "
            << (ts.sharpe ? std::to_string(*ts.sharpe) : std::string("undefined")) << ", max drawdown "
            << ts.max_drawdown_pct << "%, " << out.result.decisions.size() << " decisions in " << out.seconds
            << " s -> " << cfg.output_dir.string() << "\n";
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        json manifest;
        manifest["config"] = cfg.to_json();
        manifest["error"] = e.what();
        write_json(manifest, cfg.output_dir / "manifest.json");
        throw;
    }
}

struct CompareArgs {
    std::string config, out = "compare.csv";
    std::vector<std::string> models;
};

int cmd_compare(const CompareArgs& a, std::ostream& log) {
    const RunConfig cfg = RunConfig::load(a.config);
    const auto models = a.models.empty() ? cfg.compare_models : a.models;
    if (models.empty()) throw ConfigError("compare.models: at least one algorithm tag required");
    const auto data = load_and_prepare(cfg);
    CompareResult r;
    try {
        r = run_compare(cfg, data, models);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("compare.models: ") + e.what());
    }
    write_compare_csv(r, a.out);
    log << "train rows " << r.train_rows << ", test rows " << r.test_rows << ", majority baseline "
        << r.majority_baseline << "\n";
    for (const auto& row : r.rows) {
        log << row.name << ": overall " << row.overall_accuracy;
        if (row.ensemble) log << ", top-and-bottom " << row.top_bottom_accuracy;
        log << "\n";
    }
    return 0;
}

// Plain-text summary of a finished run directory.
int cmd_report(const std::string& run_dir, const std::string& out, std::ostream& log) {
    const std::filesystem::path dir(run_dir);
    auto in = csv::open_input(dir / "tearsheet.json");
    const json ts = json::parse(in);
    auto value = [&](const char* key) {
        const auto& v = ts.at(key);
        return v.is_null() ? std::string("undefined") : v.dump();
    };
    const std::filesystem::path target = out.empty() ? dir / "report.txt" : std::filesystem::path(out);
    auto o = csv::open_output(target);
    o << "total return %        " << value("total_return_pct") << '\n'
      << "specific return %     " << value("specific_return_pct") << '\n'
      << "common return %       " << value("common_return_pct") << '\n'
      << "sharpe                " << value("sharpe") << '\n'
      << "max drawdown %        " << value("max_drawdown_pct") << '\n'
      << "volatility (daily)    " << value("volatility_daily") << '\n'
      << "volatility (annual)   " << value("volatility_annual") << '\n'
      << "beta                  " << value("beta") << '\n'
      << "max holdings          " << value("max_holdings") << '\n'
      << "rebalance leverage    " << ts.at("rebalance_leverage").dump() << '\n'
      << "fills                 " << value("fills") << '\n'
      << "commissions           " << value("commissions") << '\n';
    log << "report -> " << target.string() << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& log) {
    CLI::App app{"Long-short equity research pipeline: ingest, factors, backtests and reports."};
    app.name("lsq");
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate bar and fundamentals files and write clean copies");
    c_ingest->add_option("--bars", ingest.bars, "Bar CSV (date,symbol,open,high,low,close,volume)")->required();
    c_ingest->add_option("--fundamentals", ingest.fundamentals, "Fundamentals CSV (date,symbol,field,value)");
    c_ingest->add_option("--out", ingest.out, "Output directory")->capture_default_str();

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic market with a planted signal");
    c_synth->add_option("--symbols", synth.cfg.n_symbols, "Number of symbols (>= 10)")->capture_default_str();
    c_synth->add_option("--days", synth.cfg.n_days, "Number of sessions (>= 300)")->capture_default_str();
    c_synth->add_option("--strength", synth.cfg.signal_strength, "Signal strength (0 = null market)")
        ->capture_default_str();
    c_synth->add_option("--seed", synth.cfg.seed, "Root seed")->capture_default_str();
    c_synth->add_option("--out", synth.out, "Output directory")->capture_default_str();

    DataArgs fdata;
    std::string factors_out = "factors.csv";
    bool raw = false;
    auto* c_factors = app.add_subcommand("factors", "Compute the factor registry and write it in long format");
    c_factors->add_option("--config", fdata.config, "Run config JSON (for paths and winsor)");
    c_factors->add_option("--bars", fdata.bars, "Bar CSV (overrides the config)");
    c_factors->add_option("--fundamentals", fdata.fundamentals, "Fundamentals CSV (overrides the config)");
    c_factors->add_option("--out", factors_out, "Output CSV")->capture_default_str();
    c_factors->add_flag("--raw", raw, "Skip cross-sectional standardization");

    DataArgs qdata;
    std::string factor_name, quantile_out = "factor_report";
    int quantiles = 3;
    std::vector<int> horizons{1, 5, 22};
    auto* c_analyze = app.add_subcommand("analyze-factor", "Quantile return report for one factor");
    c_analyze->add_option("--config", qdata.config, "Run config JSON");
    c_analyze->add_option("--bars", qdata.bars, "Bar CSV (overrides the config)");
    c_analyze->add_option("--fundamentals", qdata.fundamentals, "Fundamentals CSV (overrides the config)");
    c_analyze->add_option("--factor", factor_name, "Factor name")->required();
    c_analyze->add_option("--quantiles", quantiles, "Number of quantiles")->capture_default_str();
    c_analyze->add_option("--horizons", horizons, "Forward horizons in sessions")->capture_default_str();
    c_analyze->add_option("--out", quantile_out, "Output directory")->capture_default_str();

    BacktestArgs bt;
    std::uint64_t seed_override = 0;
    auto* c_backtest = app.add_subcommand("backtest", "Run the walk-forward backtest described by a config");
    c_backtest->add_option("--config", bt.config, "Run config JSON")->required();
    c_backtest->add_option("--output-dir", bt.output_dir, "Override output_dir");
    auto* seed_opt = c_backtest->add_option("--seed", seed_override, "Override seed");
    c_backtest->add_option("--rebalance", bt.rebalance, "Override backtest.rebalance (daily, weekly, monthly)");
    c_backtest->add_option("--ensemble", bt.ensemble, "Override the ensemble preset");

    CompareArgs cmp;
    auto* c_compare = app.add_subcommand("compare", "Accuracy table for classifiers and ensembles");
    c_compare->add_option("--config", cmp.config, "Run config JSON")->required();
    c_compare->add_option("--models", cmp.models, "Comma-separated algorithm tags or ensemble presets (default: compare.models)")
        ->delimiter(',');
    c_compare->add_option("--out", cmp.out, "Output CSV")->capture_default_str();

    std::string run_dir, report_out;
    auto* c_report = app.add_subcommand("report", "Summarize a run directory as text");
    c_report->add_option("--run", run_dir, "Run directory holding tearsheet.json")->required();
    c_report->add_option("--out", report_out, "Output file (default: <run>/report.txt)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, log);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_ingest) return cmd_ingest(ingest, log);
        if (*c_synth) return cmd_synth(synth, log);
        if (*c_factors) return cmd_factors(fdata, factors_out, raw, log);
        if (*c_analyze) return cmd_analyze_factor(qdata, factor_name, quantiles, horizons, quantile_out, log);
        if (*c_backtest) {
            if (seed_opt->count()) bt.seed = seed_override;
            return cmd_backtest(bt, log);
        }
        if (*c_compare) return cmd_compare(cmp, log);
        if (*c_report) return cmd_report(run_dir, report_out, log);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace lsq::cli
