#pragma once

#include "lsq/analytics.hpp"
#include "lsq/backtest.hpp"
#include "lsq/dataset.hpp"
#include "lsq/ensemble.hpp"
#include "lsq/factors.hpp"
#include "lsq/market_data.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsq {

// Raised for schema problems; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::filesystem::path bars;
    std::filesystem::path fundamentals; // optional
    std::filesystem::path latent;       // optional, for the latent scorer
    std::filesystem::path output_dir = "run";

    std::string scorer = "ensemble"; // or "latent"
    std::string ensemble = "best";   // preset name, ignored when members is set
    std::vector<std::string> members;
    std::string combine = "hard";    // or "score"
    int k_features = 15;
    std::uint64_t seed = 0;

    BacktestConfig backtest;

    std::size_t universe_size = 1500;
    int universe_lookback = 63;
    UniverseRefresh universe_refresh = UniverseRefresh::monthly;

    double label_upper = 0.3;
    double label_lower = 0.3;
    double max_missing_fraction = 0.3;
    bool exclude_neutral = false;
    double winsor = 0.01;

    // compare command
    std::vector<std::string> compare_models;
    double train_fraction = 0.8;
    double extreme_fraction = 0.1;

    // Relative paths resolve against `base_dir`. Unknown keys and wrong types
    // throw ConfigError naming the field path.
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    EnsembleSpec ensemble_spec() const;
    WindowOptions window_options() const;
};

struct PreparedData {
    MarketData market;
    std::optional<FundamentalsTable> fundamentals;
    FactorMatrix factors; // cross-sectionally standardized
    LabelPanel labels;
    Universe universe;
    std::vector<double> benchmark; // equal-weighted universe return per session
    std::vector<std::string> diagnostics;
};

PreparedData prepare_data(const RunConfig& cfg, MarketData market, std::optional<FundamentalsTable> fundamentals);
// Reads the files named in the config.
PreparedData load_and_prepare(const RunConfig& cfg);

// Walk-forward ensemble: window as of t, fit, score the universe at t.
class EnsembleScorer : public ScoreProvider {
public:
    EnsembleScorer(const PreparedData& data, EnsembleSpec spec, WindowOptions options, std::uint64_t seed);
    ConvictionVector scores(std::size_t t, std::string& why) override;

    const std::vector<SelectionLogRow>& selection_log() const { return log_; }
    double fit_seconds() const { return fit_seconds_; }

private:
    const PreparedData& data_;
    EnsembleSpec spec_;
    WindowOptions options_;
    std::uint64_t seed_;
    std::vector<SelectionLogRow> log_;
    double fit_seconds_ = 0.0;
};

// Scores universe members by a panel's value at t (e.g. the latent signal).
class PanelScorer : public ScoreProvider {
public:
    PanelScorer(const Panel& values, const Universe& universe) : values_(values), universe_(universe) {}
    ConvictionVector scores(std::size_t t, std::string& why) override;

private:
    const Panel& values_;
    const Universe& universe_;
};

struct RunOutputs {
    BacktestResult result;
    TearSheet tearsheet;
    std::vector<SelectionLogRow> selection_log;
    double seconds = 0.0;
};

// Backtest with the configured scorer. A latent scorer needs `latent` on the
// market axis.
RunOutputs run_pipeline(const RunConfig& cfg, const PreparedData& data, const Panel* latent = nullptr);

// equity.csv, fills.csv, positions.csv, convictions.csv, selection_log.csv,
// tearsheet.json (+ series) and manifest.json into cfg.output_dir.
void write_run(const RunConfig& cfg, const PreparedData& data, const RunOutputs& out);

struct CompareRow {
    std::string name;
    bool ensemble = false;
    double overall_accuracy = 0.0;
    double top_bottom_accuracy = 0.0; // NaN for single classifiers
    std::size_t test_rows = 0;
    std::size_t top_bottom_rows = 0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::vector<std::string> features;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    double majority_baseline = 0.0; // accuracy of the training majority class on test rows
};

// Chronological split of the last labeled window: the first train_fraction of
// dates train, `horizon` dates are purged, the rest test. Names are member tags
// or ensemble presets; an ensemble row also carries its top-and-bottom accuracy
// over the extreme_fraction best and worst scored symbols of each test date.
CompareResult run_compare(const RunConfig& cfg, const PreparedData& data, const std::vector<std::string>& names);

void write_compare_csv(const CompareResult& r, const std::filesystem::path& path);

// FNV-1a of a file's bytes, hex encoded.
std::string file_fingerprint(const std::filesystem::path& path);

} // namespace lsq
