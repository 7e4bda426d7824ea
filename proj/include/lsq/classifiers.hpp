#pragma once

#include "lsq/matrix.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace lsq {

enum class Algorithm { gaussian_nb, bernoulli_nb, logistic, sgd, linear_svm, decision_tree, random_forest, adaboost };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

enum class Penalty { l1, l2 };

struct FitReport {
    double training_accuracy = 0.0;
    int iterations = 0;
    bool converged = true;
    double wall_seconds = 0.0;
    std::vector<std::string> diagnostics;
};

// --- hyperparameters ----------------------------------------------------------------

struct GaussianNBConfig {
    double var_smoothing = 1e-9; // floor = var_smoothing * largest feature variance
};
struct BernoulliNBConfig {
    double binarize_threshold = 0.0;
};
struct LogisticConfig {
    Penalty penalty = Penalty::l1;
    double lambda = 1e-3;
    int max_iter = 1000;
    double tol = 1e-6;
};
struct SgdConfig {
    double alpha = 1e-4;
    double l1_ratio = 0.15;
    int epochs = 5;
    double eta0 = 0.01;
    std::uint64_t seed = 0;
};
struct SvmConfig {
    double C = 1.0;
    int max_iter = 1000;
    double tol = 1e-6;
};
struct TreeConfig {
    int max_depth = 8;
    int min_leaf = 5;
};
struct ForestConfig {
    int n_trees = 100;
    int max_depth = 8;
    int min_leaf = 5;
    int features_per_split = 0; // 0 -> ceil(sqrt(k))
    std::uint64_t seed = 0;
    bool bootstrap = true; // off only for testing
};
struct AdaBoostConfig {
    int n_rounds = 50;
};

struct ClassifierConfig {
    GaussianNBConfig gaussian_nb;
    BernoulliNBConfig bernoulli_nb;
    LogisticConfig logistic;
    SgdConfig sgd;
    SvmConfig svm;
    TreeConfig tree;
    ForestConfig forest;
    AdaBoostConfig adaboost;
};

// --- fitted parameters ------------------------------------------------------------

struct GaussianNBParams {
    std::vector<double> log_prior; // per class
    Matrix mean;                   // classes x features
    Matrix var;
};

struct BernoulliNBParams {
    double threshold = 0.0;
    std::vector<double> log_prior;
    Matrix log_p; // log rate of a 1, classes x features
    Matrix log_q; // log(1 - rate)
};

// One row per binary problem. With two classes a single row scores
// classes[1] against classes[0]; otherwise one-vs-rest, one row per class.
struct LinearParams {
    Matrix w;
    std::vector<double> b;
};

struct TreeNode {
    int feature = -1; // -1 for a leaf
    double threshold = 0.0;
    int left = -1;  // x <= threshold
    int right = -1; // x > threshold
    int leaf = 0;   // class index of the majority
    std::vector<double> class_counts;
};

struct TreeParams {
    std::vector<TreeNode> nodes;
};

struct ForestParams {
    std::vector<TreeParams> trees;
    std::uint64_t seed = 0;
    bool bootstrap = true;
    std::size_t n_train = 0; // bootstrap draws are replayed from the seed for OOB
};

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    double polarity = 1.0; // +1: x > threshold -> +1
    double weight = 0.0;
    double error = 0.0;

    double predict(std::span<const double> x) const {
        return (x[static_cast<std::size_t>(feature)] > threshold ? 1.0 : -1.0) * polarity;
    }
};

// One booster for two classes (positive = classes[1]), else one per class.
struct AdaBoostParams {
    std::vector<std::vector<Stump>> boosters;
};

using ModelParams =
    std::variant<GaussianNBParams, BernoulliNBParams, LinearParams, TreeParams, ForestParams, AdaBoostParams>;

struct TrainedModel {
    Algorithm algorithm = Algorithm::gaussian_nb;
    std::vector<int> classes; // ascending
    std::size_t n_features = 0;
    ModelParams params;
};

struct Fitted {
    TrainedModel model;
    FitReport report;
};

Fitted fit_gaussian_nb(const Matrix& X, const std::vector<int>& y, const GaussianNBConfig& cfg = {});
Fitted fit_bernoulli_nb(const Matrix& X, const std::vector<int>& y, const BernoulliNBConfig& cfg = {});
Fitted fit_logistic(const Matrix& X, const std::vector<int>& y, const LogisticConfig& cfg = {});
Fitted fit_sgd(const Matrix& X, const std::vector<int>& y, const SgdConfig& cfg = {});
Fitted fit_linear_svm(const Matrix& X, const std::vector<int>& y, const SvmConfig& cfg = {});
Fitted fit_decision_tree(const Matrix& X, const std::vector<int>& y, const TreeConfig& cfg = {});
Fitted fit_random_forest(const Matrix& X, const std::vector<int>& y, const ForestConfig& cfg = {});
Fitted fit_adaboost(const Matrix& X, const std::vector<int>& y, const AdaBoostConfig& cfg = {});

Fitted fit(Algorithm a, const Matrix& X, const std::vector<int>& y, const ClassifierConfig& cfg = {});

// rows x classes; algorithm-native scores (posterior for the Bayes models,
// margin for linear ones, vote or leaf fraction for trees, sum of weighted
// stumps for boosting). The argmax column is the predicted class.
Matrix predict_score(const TrainedModel& m, const Matrix& X);
std::vector<int> predict(const TrainedModel& m, const Matrix& X);
// Scores mapped onto the probability simplex (softmax for margin scores).
Matrix class_probabilities(const TrainedModel& m, const Matrix& X);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct OobResult {
    double error = 0.0;
    std::size_t scored = 0;
    std::size_t never_out_of_bag = 0;
};
// Training data must be the rows the forest was fitted on.
OobResult oob_error(const TrainedModel& forest, const Matrix& X, const std::vector<int>& y);

nlohmann::json to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);

// --- building blocks exposed for tests ------------------------------------------------

// H = -sum p log2 p over class counts.
double entropy_bits(const std::vector<double>& counts);

// One stochastic step of the elastic-net hinge update on a single sample with
// label in {-1, +1}.
void sgd_step(std::vector<double>& w, double& b, std::span<const double> x, double y, double gamma, double alpha,
              double l1_ratio);

// w_t = 1/2 ln(1/eps - 1), with eps clamped below at 1e-10.
double adaboost_weight(double eps);
// Best weighted stump over all features, midpoints and both polarities.
Stump fit_stump(const Matrix& X, const std::vector<double>& y, const std::vector<double>& weights);

} // namespace lsq
