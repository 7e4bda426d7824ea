#include "lsq/pipeline.hpp"

#include "lsq/csv.hpp"
#include "lsq/random.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace lsq {

// --- config ------------------------------------------------------------------------

namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        const auto& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::runtime_error("expected a boolean");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) throw std::runtime_error("expected a number");
                if constexpr (std::is_integral_v<T>) {
                    if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
                    if constexpr (std::is_unsigned_v<T>) {
                        if (v.is_number_integer() && v.get<long long>() < 0 && !v.is_number_unsigned()) {
                            throw std::runtime_error("expected a non-negative integer");
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::runtime_error("expected a string");
            }
            out = v.get<T>();
        } catch (const std::exception& e) {
            fail(child(key), e.what());
        }
    }

    void get_path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
        std::string s;
        get(key, s);
        if (!j_.contains(key)) return;
        std::filesystem::path p(s);
        out = (p.is_relative() && !base.empty()) ? base / p : p;
    }

    void get_strings(const std::string& key, std::vector<std::string>& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(child(key), "expected an array of strings");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) fail(child(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(v[i].get<std::string>());
        }
    }

    std::optional<ObjectReader> object(const std::string& key) {
        if (!j_.contains(key)) return std::nullopt;
        seen_.insert(key);
        return ObjectReader(j_.at(key), child(key));
    }

    const json* raw(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) fail(child(k), "unknown key");
        }
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError(path + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

UniverseRefresh parse_refresh(const std::string& s, const std::string& path) {
    if (s == "daily") return UniverseRefresh::daily;
    if (s == "monthly") return UniverseRefresh::monthly;
    ObjectReader::fail(path, "expected \"daily\" or \"monthly\"");
}

} // namespace

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base) {
    RunConfig c;
    ObjectReader r(j, "");
    r.get_path("bars", c.bars, base);
    r.get_path("fundamentals", c.fundamentals, base);
    r.get_path("latent", c.latent, base);
    r.get_path("output_dir", c.output_dir, base);
    r.get("scorer", c.scorer);
    if (c.scorer != "ensemble" && c.scorer != "latent") ObjectReader::fail("scorer", "expected \"ensemble\" or \"latent\"");
    if (const json* e = r.raw("ensemble")) {
        if (e->is_string()) {
            c.ensemble = e->get<std::string>();
        } else if (e->is_array()) {
            for (std::size_t i = 0; i < e->size(); ++i) {
                if (!(*e)[i].is_string()) ObjectReader::fail("ensemble[" + std::to_string(i) + "]", "expected a string");
                c.members.push_back((*e)[i].get<std::string>());
            }
        } else {
            ObjectReader::fail("ensemble", "expected a preset name or an array of member tags");
        }
    }
    r.get("combine", c.combine);
    if (c.combine != "hard" && c.combine != "score") ObjectReader::fail("combine", "expected \"hard\" or \"score\"");
    r.get("k_features", c.k_features);
    r.get("seed", c.seed);

    if (auto b = r.object("backtest")) {
        b->get("window", c.backtest.window);
        b->get("horizon", c.backtest.horizon);
        std::string mode = to_string(c.backtest.rebalance);
        b->get("rebalance", mode);
        try {
            c.backtest.rebalance = parse_rebalance_mode(mode);
        } catch (const std::exception& e) {
            ObjectReader::fail("backtest.rebalance", e.what());
        }
        b->get("n_long", c.backtest.n_long);
        b->get("n_short", c.backtest.n_short);
        if (const json* band = b->raw("leverage_band")) {
            if (!band->is_array() || band->size() != 2 || !(*band)[0].is_number() || !(*band)[1].is_number()) {
                ObjectReader::fail("backtest.leverage_band", "expected [min, max]");
            }
            c.backtest.min_leverage = (*band)[0].get<double>();
            c.backtest.max_leverage = (*band)[1].get<double>();
        }
        b->get("gross_target", c.backtest.gross_target);
        b->get("commission_per_share", c.backtest.commission_per_share);
        b->get("slippage", c.backtest.slippage);
        b->get("initial_capital", c.backtest.initial_capital);
        b->finish();
    }
    if (auto u = r.object("universe")) {
        u->get("size", c.universe_size);
        u->get("lookback", c.universe_lookback);
        std::string refresh = "monthly";
        u->get("refresh", refresh);
        c.universe_refresh = parse_refresh(refresh, "universe.refresh");
        u->finish();
    }
    if (auto l = r.object("labels")) {
        l->get("upper", c.label_upper);
        l->get("lower", c.label_lower);
        l->get("max_missing_fraction", c.max_missing_fraction);
        l->get("exclude_neutral", c.exclude_neutral);
        l->finish();
    }
    if (auto p = r.object("preprocess")) {
        p->get("winsor", c.winsor);
        p->finish();
    }
    if (auto cmp = r.object("compare")) {
        cmp->get_strings("models", c.compare_models);
        cmp->get("train_fraction", c.train_fraction);
        cmp->get("extreme_fraction", c.extreme_fraction);
        cmp->finish();
    }
    r.finish();

    try {
        c.backtest.validate();
    } catch (const std::exception& e) {
        ObjectReader::fail("backtest", e.what());
    }
    if (c.k_features < 1) ObjectReader::fail("k_features", "must be >= 1");
    if (c.universe_size < 1) ObjectReader::fail("universe.size", "must be >= 1");
    if (c.universe_lookback < 1) ObjectReader::fail("universe.lookback", "must be >= 1");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) ObjectReader::fail("compare.train_fraction", "must lie in (0, 1)");
    if (!(c.extreme_fraction > 0.0 && c.extreme_fraction <= 0.5)) {
        ObjectReader::fail("compare.extreme_fraction", "must lie in (0, 0.5]");
    }
    try {
        c.ensemble_spec();
    } catch (const std::exception& e) {
        ObjectReader::fail("ensemble", e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

json RunConfig::to_json() const {
    json j;
    j["bars"] = bars.string();
    j["fundamentals"] = fundamentals.string();
    j["latent"] = latent.string();
    j["output_dir"] = output_dir.string();
    j["scorer"] = scorer;
    if (members.empty()) {
        j["ensemble"] = ensemble;
    } else {
        j["ensemble"] = members;
    }
    j["combine"] = combine;
    j["k_features"] = k_features;
    j["seed"] = seed;
    j["backtest"] = {{"window", backtest.window},
                     {"horizon", backtest.horizon},
                     {"rebalance", to_string(backtest.rebalance)},
                     {"n_long", backtest.n_long},
                     {"n_short", backtest.n_short},
                     {"leverage_band", {backtest.min_leverage, backtest.max_leverage}},
                     {"gross_target", backtest.gross_target},
                     {"commission_per_share", backtest.commission_per_share},
                     {"slippage", backtest.slippage},
                     {"initial_capital", backtest.initial_capital}};
    j["universe"] = {{"size", universe_size},
                     {"lookback", universe_lookback},
                     {"refresh", universe_refresh == UniverseRefresh::daily ? "daily" : "monthly"}};
    j["labels"] = {{"upper", label_upper},
                   {"lower", label_lower},
                   {"max_missing_fraction", max_missing_fraction},
                   {"exclude_neutral", exclude_neutral}};
    j["preprocess"] = {{"winsor", winsor}};
    j["compare"] = {{"models", compare_models}, {"train_fraction", train_fraction}, {"extreme_fraction", extreme_fraction}};
    return j;
}

EnsembleSpec RunConfig::ensemble_spec() const {
    EnsembleSpec s = members.empty() ? EnsembleSpec::preset(ensemble) : EnsembleSpec::from_tags(members);
    s.k_features = k_features;
    s.mode = combine == "score" ? CombineMode::score : CombineMode::hard;
    s.validate();
    return s;
}

WindowOptions RunConfig::window_options() const {
    WindowOptions o;
    o.window = backtest.window;
    o.max_missing_fraction = max_missing_fraction;
    o.exclude_neutral = exclude_neutral;
    return o;
}

// --- data --------------------------------------------------------------------------

PreparedData prepare_data(const RunConfig& cfg, MarketData market, std::optional<FundamentalsTable> fundamentals) {
    PreparedData d;
    d.market = std::move(market);
    d.fundamentals = std::move(fundamentals);
    {
        const FactorContext ctx(d.market, d.fundamentals ? &*d.fundamentals : nullptr);
        d.factors = standardize_all(compute_factors(FactorRegistry::standard(), ctx), cfg.winsor, cfg.winsor);
    }
    d.labels = quantile_labels(forward_returns(d.market.close, cfg.backtest.horizon), cfg.backtest.horizon,
                               cfg.label_upper, cfg.label_lower);
    d.universe = build_universe(d.market.dollar_volume(), static_cast<int>(cfg.universe_size), cfg.universe_lookback,
                                cfg.universe_refresh);

    const auto& close = d.market.close;
    d.benchmark.assign(close.n_dates(), 0.0);
    for (std::size_t t = 1; t < close.n_dates(); ++t) {
        auto mean_over = [&](bool members_only) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t s = 0; s < close.n_symbols(); ++s) {
                if (members_only && !d.universe.contains(t, s)) continue;
                const double a = close(t - 1, s), b = close(t, s);
                if (is_missing(a) || is_missing(b) || !(a > 0.0)) continue;
                sum += b / a - 1.0;
                ++n;
            }
            return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
        };
        auto m = mean_over(true);
        if (!m) m = mean_over(false);
        d.benchmark[t] = m.value_or(0.0);
    }
    return d;
}

PreparedData load_and_prepare(const RunConfig& cfg) {
    auto bars = ingest_bars(cfg.bars);
    std::optional<FundamentalsTable> fundamentals;
    std::vector<std::string> diag;
    diag.push_back("bars: " + std::to_string(bars.report.rows_accepted) + " accepted, " +
                   std::to_string(bars.report.rows_rejected) + " rejected");
    if (!cfg.fundamentals.empty()) {
        auto f = ingest_fundamentals(cfg.fundamentals);
        diag.push_back("fundamentals: " + std::to_string(f.report.rows_accepted) + " accepted, " +
                       std::to_string(f.report.rows_rejected) + " rejected");
        fundamentals = std::move(f.table);
    }
    auto d = prepare_data(cfg, std::move(bars.data), std::move(fundamentals));
    d.diagnostics.insert(d.diagnostics.begin(), diag.begin(), diag.end());
    return d;
}

// --- scorers ------------------------------------------------------------------------

EnsembleScorer::EnsembleScorer(const PreparedData& data, EnsembleSpec spec, WindowOptions options, std::uint64_t seed)
    : data_(data), spec_(std::move(spec)), options_(options), seed_(seed) {}

ConvictionVector EnsembleScorer::scores(std::size_t t, std::string& why) {
    ConvictionVector cv;
    cv.asof = data_.market.dates()[t];
    TrainingWindow w;
    try {
        w = build_training_window(data_.factors, data_.labels, t, options_, &data_.universe);
    } catch (const std::runtime_error& e) {
        why = e.what();
        return cv;
    }
    const auto start = std::chrono::steady_clock::now();
    FittedEnsemble fitted;
    try {
        fitted = ensemble_fit(spec_, w, derive_seed(seed_, t));
    } catch (const std::exception& e) {
        why = e.what();
        return cv;
    }
    fit_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    int rank = 0;
    std::vector<FeatureScore> chosen;
    for (const auto& s : fitted.scores) {
        if (std::find(fitted.features.begin(), fitted.features.end(), s.name) != fitted.features.end()) chosen.push_back(s);
    }
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    for (const auto& s : chosen) log_.push_back({cv.asof.iso(), ++rank, s.name, s.f});

    const auto rows = prediction_rows(data_.factors, fitted.features, t, &data_.universe);
    if (rows.symbols.empty()) {
        why = "no universe member has every selected feature";
        return cv;
    }
    cv.symbols = rows.symbols;
    cv.scores = ensemble_score(fitted, rows.X);
    return cv;
}

ConvictionVector PanelScorer::scores(std::size_t t, std::string& why) {
    ConvictionVector cv;
    cv.asof = values_.dates()[t];
    for (std::size_t s = 0; s < values_.n_symbols(); ++s) {
        if (!universe_.contains(t, s) || is_missing(values_(t, s))) continue;
        cv.symbols.push_back(s);
        cv.scores.push_back(values_(t, s));
    }
    if (cv.symbols.empty()) why = "no universe member has a score";
    return cv;
}

// --- runs ---------------------------------------------------------------------------

RunOutputs run_pipeline(const RunConfig& cfg, const PreparedData& data, const Panel* latent) {
    const auto start = std::chrono::steady_clock::now();
    RunOutputs out;
    if (cfg.scorer == "latent") {
        if (!latent) throw std::invalid_argument("run_pipeline: the latent scorer needs a latent panel");
        if (!latent->same_axes(data.market.close)) throw std::invalid_argument("run_pipeline: latent axes differ");
        PanelScorer scorer(*latent, data.universe);
        out.result = run_backtest(cfg.backtest, data.market, scorer);
    } else {
        EnsembleScorer scorer(data, cfg.ensemble_spec(), cfg.window_options(), cfg.seed);
        out.result = run_backtest(cfg.backtest, data.market, scorer);
        out.selection_log = scorer.selection_log();
    }
    out.tearsheet = make_tearsheet(out.result, data.benchmark);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string file_fingerprint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_run(const RunConfig& cfg, const PreparedData& data, const RunOutputs& out) {
    const auto& dir = cfg.output_dir;
    write_equity_csv(out.result, dir / "equity.csv");
    write_fills_csv(out.result, dir / "fills.csv");
    write_positions_csv(out.result, dir / "positions.csv");
    write_conviction_csv(out.result.convictions, dir / "convictions.csv");
    write_selection_log_csv(out.selection_log, dir / "selection_log.csv");
    write_tearsheet(out.tearsheet, dir);

    json manifest;
    manifest["config"] = cfg.to_json();
    json inputs = json::object();
    for (const auto& [name, p] : {std::pair{"bars", cfg.bars}, {"fundamentals", cfg.fundamentals}, {"latent", cfg.latent}}) {
        if (!p.empty()) inputs[name] = {{"path", p.string()}, {"fnv1a64", file_fingerprint(p)}};
    }
    manifest["inputs"] = inputs;
    manifest["data"] = {{"sessions", data.market.dates().size()},
                        {"symbols", data.market.symbols().size()},
                        {"first_date", data.market.dates().empty() ? "" : data.market.dates().front().iso()},
                        {"last_date", data.market.dates().empty() ? "" : data.market.dates().back().iso()}};
    json diag = data.diagnostics;
    for (const auto& d : out.result.diagnostics) diag.push_back(d);
    manifest["diagnostics"] = diag;
    manifest["decisions"] = out.result.decisions.size();
    manifest["halted"] = out.result.halted;
    manifest["outputs"] = {"equity.csv",          "fills.csv",          "positions.csv",      "convictions.csv",
                           "selection_log.csv",   "tearsheet.json",     "returns_daily.csv",  "returns_weekly.csv",
                           "returns_monthly.csv", "common_specific.csv", "exposure.csv"};
    auto m = csv::open_output(dir / "manifest.json");
    m << manifest.dump(2) << '\n';
}

// --- compare ------------------------------------------------------------------------

namespace {

// Weighted plurality of member votes; a tie resolves to 0.
std::vector<int> plurality(const FittedEnsemble& f, const Matrix& X) {
    const auto preds = member_predictions(f, X);
    std::vector<int> out(X.rows(), 0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        std::map<int, double> votes;
        for (std::size_t m = 0; m < preds.size(); ++m) votes[preds[m][r]] += f.spec.weight(m);
        double best = -1.0;
        bool tie = false;
        for (const auto& [cls, w] : votes) {
            if (w > best + 1e-12) {
                best = w;
                out[r] = cls;
                tie = false;
            } else if (std::abs(w - best) <= 1e-12) {
                tie = true;
            }
        }
        if (tie) out[r] = 0;
    }
    return out;
}

} // namespace

CompareResult run_compare(const RunConfig& cfg, const PreparedData& data, const std::vector<std::string>& names) {
    if (names.empty()) throw std::invalid_argument("compare: at least one model name required");
    const auto presets = ensemble_presets();
    for (const auto& n : names) {
        if (std::find(presets.begin(), presets.end(), n) == presets.end()) member_from_tag(n); // validates
    }
    const std::size_t T = data.market.dates().size();
    const auto H = static_cast<std::size_t>(cfg.backtest.horizon);
    if (T < H + 2) throw std::runtime_error("compare: not enough sessions");
    const auto w = build_training_window(data.factors, data.labels, T - 1, cfg.window_options(), &data.universe);

    // chronological split on dates, purging the horizon between the parts
    const std::size_t n_dates = w.last_date - w.first_date + 1;
    const auto train_dates = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(n_dates)));
    const std::size_t train_end = w.first_date + train_dates;                   // exclusive
    const std::size_t test_begin = train_end + H;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < w.y.size(); ++i) {
        if (w.row_date[i] + H < train_end) train_idx.push_back(i); // label formed before the split
        else if (w.row_date[i] >= test_begin) test_idx.push_back(i);
    }
    if (train_idx.empty() || test_idx.empty()) throw std::runtime_error("compare: split leaves an empty part");

    TrainingWindow train;
    train.feature_names = w.feature_names;
    train.X = w.X.select_rows(train_idx);
    for (std::size_t i : train_idx) train.y.push_back(w.y[i]);

    CompareResult res;
    res.train_rows = train_idx.size();
    res.test_rows = test_idx.size();
    std::vector<int> y_test;
    for (std::size_t i : test_idx) y_test.push_back(w.y[i]);
    {
        std::map<int, std::size_t> counts;
        for (int v : train.y) ++counts[v];
        int majority = counts.begin()->first;
        for (const auto& [cls, n] : counts) {
            if (n > counts[majority]) majority = cls;
        }
        res.majority_baseline = accuracy(std::vector<int>(y_test.size(), majority), y_test);
    }

    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& name = names[k];
        const bool is_ensemble = std::find(presets.begin(), presets.end(), name) != presets.end();
        EnsembleSpec spec = is_ensemble ? EnsembleSpec::preset(name) : EnsembleSpec::from_tags({name});
        spec.k_features = cfg.k_features;
        spec.mode = cfg.combine == "score" ? CombineMode::score : CombineMode::hard;
        const auto fitted = ensemble_fit(spec, train, derive_seed(cfg.seed, k));
        if (res.features.empty()) res.features = fitted.features;
        const Matrix Xt = w.X.select_rows(test_idx).select_cols(column_indices(w.feature_names, fitted.features));

        CompareRow row;
        row.name = name;
        row.ensemble = is_ensemble;
        row.test_rows = test_idx.size();
        row.top_bottom_accuracy = std::numeric_limits<double>::quiet_NaN();
        if (!is_ensemble) {
            row.overall_accuracy = accuracy(predict(fitted.models.front(), Xt), y_test);
            res.rows.push_back(row);
            continue;
        }
        row.overall_accuracy = accuracy(plurality(fitted, Xt), y_test);
        const auto scores = ensemble_score(fitted, Xt);
        std::size_t right = 0;
        for (std::size_t a = 0; a < test_idx.size();) {
            std::size_t b = a;
            while (b < test_idx.size() && w.row_date[test_idx[b]] == w.row_date[test_idx[a]]) ++b;
            const std::vector<double> day(scores.begin() + static_cast<std::ptrdiff_t>(a),
                                          scores.begin() + static_cast<std::ptrdiff_t>(b));
            const std::vector<int> truth(y_test.begin() + static_cast<std::ptrdiff_t>(a),
                                         y_test.begin() + static_cast<std::ptrdiff_t>(b));
            const auto n = static_cast<std::size_t>(std::floor(cfg.extreme_fraction * static_cast<double>(day.size())));
            if (n >= 1 && 2 * n <= day.size()) {
                const auto acc = top_bottom_accuracy(select_positions(day, n, n), truth);
                row.top_bottom_rows += acc.counted;
                right += static_cast<std::size_t>(std::lround(acc.counted ? acc.accuracy * static_cast<double>(acc.counted) : 0.0));
            }
            a = b;
        }
        if (row.top_bottom_rows) row.top_bottom_accuracy = static_cast<double>(right) / static_cast<double>(row.top_bottom_rows);
        res.rows.push_back(row);
    }
    return res;
}

void write_compare_csv(const CompareResult& r, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "model,kind,overall_accuracy,top_bottom_accuracy,test_rows,top_bottom_rows\n";
    for (const auto& row : r.rows) {
        out << row.name << ',' << (row.ensemble ? "ensemble" : "classifier") << ',' << csv::format(row.overall_accuracy)
            << ',' << csv::format(row.top_bottom_accuracy) << ',' << row.test_rows << ',' << row.top_bottom_rows << '\n';
    }
}

} // namespace lsq
