#pragma once

#include "lsq/classifiers.hpp"
#include "lsq/dataset.hpp"
#include "lsq/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lsq {

struct EnsembleMember {
    std::string tag; // e.g. "logistic_l1"
    Algorithm algorithm = Algorithm::gaussian_nb;
    ClassifierConfig config;
};

// Member tags: gaussian_nb, bernoulli_nb, logistic (= logistic_l2), logistic_l1,
// sgd, linear_svm, decision_tree, random_forest, adaboost.
EnsembleMember member_from_tag(const std::string& tag);
std::vector<std::string> member_tags();

enum class CombineMode {
    hard,  // weighted mean of predicted classes in {-1, 0, +1}
    score, // weighted mean of P(+1) - P(-1)
};

struct EnsembleSpec {
    std::vector<EnsembleMember> members;
    std::vector<double> weights; // empty = equal
    int k_features = 15;
    CombineMode mode = CombineMode::hard;

    // "best" = gaussian_nb, logistic_l1, decision_tree, sgd;
    // "ensemble1" = logistic, gaussian_nb, bernoulli_nb, sgd.
    static EnsembleSpec preset(const std::string& name);
    static EnsembleSpec from_tags(const std::vector<std::string>& tags);

    // Throws std::invalid_argument unless there is a member, weights are
    // non-negative, and they sum to 1 within 1e-12.
    void validate() const;
    double weight(std::size_t m) const;
};

std::vector<std::string> ensemble_presets();

struct FittedEnsemble {
    EnsembleSpec spec;
    std::vector<FeatureScore> scores;  // every window column
    std::vector<std::string> features; // selected, window column order
    std::vector<TrainedModel> models;
    std::vector<FitReport> reports;
};

// Selects the top-k ANOVA features on the window and fits every member on
// them. Member m uses seed derive_seed(seed, m). Errors are rethrown as
// std::runtime_error naming the member.
FittedEnsemble ensemble_fit(const EnsembleSpec& spec, const TrainingWindow& window, std::uint64_t seed = 0);

// Rows are samples over fitted.features. Throws std::invalid_argument on a
// width mismatch.
std::vector<double> ensemble_score(const FittedEnsemble& fitted, const Matrix& X);

// Hard predictions of every member, one vector per member.
std::vector<std::vector<int>> member_predictions(const FittedEnsemble& fitted, const Matrix& X);

struct ConvictionVector {
    Date asof;
    std::vector<std::size_t> symbols; // symbol-axis indices
    std::vector<double> scores;
};

struct PositionSets {
    std::vector<std::size_t> longs;  // positions into the score vector
    std::vector<std::size_t> shorts;
    std::vector<std::string> diagnostics;
};

// Orders by score descending, equal scores by position. The first n_long go
// long, the last n_short go short. Throws std::invalid_argument on empty
// scores, non-finite scores, or n_long + n_short > size.
PositionSets select_positions(const std::vector<double>& scores, std::size_t n_long, std::size_t n_short);

// Share of selected rows whose realized label is +/-1 and matches the side.
// Rows whose label is 0 are left out; the result is NaN when nothing counts.
struct TopBottomAccuracy {
    double accuracy = 0.0;
    std::size_t counted = 0;
    std::size_t skipped_neutral = 0;
};
TopBottomAccuracy top_bottom_accuracy(const PositionSets& sets, const std::vector<int>& realized);

// `date,symbol,score,position`
struct ConvictionRow {
    std::string date;
    std::string symbol;
    double score = 0.0;
    std::string position; // long, short, none
};
void write_conviction_csv(const std::vector<ConvictionRow>& rows, const std::filesystem::path& path);

} // namespace lsq
