#pragma once

#include "lsq/factors.hpp"
#include "lsq/market_data.hpp"
#include "lsq/matrix.hpp"
#include "lsq/panel.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lsq {

// (P_{t+n} - P_t) / P_t; the last n dates are missing.
Panel forward_returns(const Panel& close, int n);

// Values in {-1, 0, +1} or missing.
struct LabelPanel {
    Panel values;
    int horizon = 0;
};

// Per date: top ceil(upper*k) defined returns -> +1, bottom ceil(lower*k) -> -1,
// the rest 0. Equal values rank by symbol position. Dates with fewer than three
// defined returns stay missing.
LabelPanel quantile_labels(const Panel& fwd, int horizon, double upper = 0.3, double lower = 0.3);

struct WindowOptions {
    int window = 200;
    // Drop a feature column whose missing share among labeled rows exceeds this.
    double max_missing_fraction = 0.3;
    bool exclude_neutral = false;
};

struct TrainingWindow {
    Date asof;
    std::vector<std::string> feature_names;
    Matrix X;
    std::vector<int> y;
    std::vector<std::size_t> row_date;   // index into the factor date axis
    std::vector<std::size_t> row_symbol; // index into the factor symbol axis
    std::vector<std::string> dropped_columns;
    std::size_t first_date = 0; // first and last training date indices (inclusive)
    std::size_t last_date = 0;
};

// Samples from dates [asof - window + 1, asof - horizon]: the trailing horizon
// days are still unlabeled at asof. With a universe, only member cells count.
// Throws std::runtime_error when history is too short or no row survives.
TrainingWindow build_training_window(const FactorMatrix& factors, const LabelPanel& labels, std::size_t asof,
                                     const WindowOptions& options, const Universe* universe = nullptr);

// Rows of date t with every listed feature defined (and universe membership).
struct PredictionRows {
    Matrix X;
    std::vector<std::size_t> symbols;
};
PredictionRows prediction_rows(const FactorMatrix& factors, const std::vector<std::string>& features, std::size_t t,
                               const Universe* universe = nullptr);

// `date,symbol,label,<feature...>`
void write_training_window_csv(const TrainingWindow& w, const FactorMatrix& factors, const std::filesystem::path& path);

} // namespace lsq
