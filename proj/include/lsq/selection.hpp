#pragma once

#include "lsq/matrix.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace lsq {

struct FeatureScore {
    std::string name;
    double f = 0.0;
    int rank = 0; // 1 = best
};

// Score given to a feature that separates the classes perfectly
// (zero within-class spread, nonzero between-class spread).
inline constexpr double kPerfectSeparation = std::numeric_limits<double>::max();

// One-way ANOVA F per column over the class groups of y, in column order.
// Throws std::invalid_argument with fewer than two classes or no residual
// degrees of freedom.
std::vector<FeatureScore> anova_f_scores(const Matrix& X, const std::vector<int>& y,
                                         const std::vector<std::string>& names);

// The min(k, n) best features; equal scores prefer the earlier column. The
// result keeps the input (registry) order.
std::vector<std::string> select_k_best(const std::vector<FeatureScore>& scores, int k);

// Column indices of `chosen` within `names`.
std::vector<std::size_t> column_indices(const std::vector<std::string>& names, const std::vector<std::string>& chosen);

// Appends `asof,rank,feature,F` lines for the selected features.
struct SelectionLogRow {
    std::string asof;
    int rank = 0;
    std::string feature;
    double f = 0.0;
};
void write_selection_log_csv(const std::vector<SelectionLogRow>& rows, const std::filesystem::path& path);

} // namespace lsq
