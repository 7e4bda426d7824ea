#pragma once

#include "lsq/classifiers.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace lsq::detail {

// Sorted distinct labels and each row's index into them.
struct Encoded {
    std::vector<int> classes;
    std::vector<std::size_t> index;
};

inline Encoded encode_labels(const Matrix& X, const std::vector<int>& y, const char* who) {
    if (X.cols() == 0) throw std::invalid_argument(std::string(who) + ": no features");
    if (X.rows() == 0) throw std::invalid_argument(std::string(who) + ": no samples");
    if (X.rows() != y.size()) throw std::invalid_argument(std::string(who) + ": X and y row counts differ");
    Encoded e;
    e.classes = y;
    std::sort(e.classes.begin(), e.classes.end());
    e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
    e.index.reserve(y.size());
    for (int v : y) {
        e.index.push_back(static_cast<std::size_t>(std::lower_bound(e.classes.begin(), e.classes.end(), v) -
                                                    e.classes.begin()));
    }
    return e;
}

// Rows x classes score layout for models that store one binary problem.
inline bool single_binary(std::size_t n_classes) { return n_classes == 2; }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void finish_report(Fitted& f, const Matrix& X, const std::vector<int>& y, const Stopwatch& sw) {
    f.report.training_accuracy = accuracy(predict(f.model, X), y);
    f.report.wall_seconds = sw.seconds();
}

// Tree growing shared by the tree and the forest.
struct TreeGrowOptions {
    int max_depth = 8;
    int min_leaf = 1;
    std::size_t features_per_split = 0; // 0 = all
};
TreeParams grow_tree(const Matrix& X, const std::vector<std::size_t>& cls, std::size_t n_classes,
                     std::vector<std::size_t> rows, const TreeGrowOptions& opt, std::uint64_t feature_seed);
const TreeNode& tree_leaf(const TreeParams& t, std::span<const double> x);

Matrix linear_scores(const LinearParams& p, const Matrix& X, std::size_t n_classes);
Matrix adaboost_scores(const AdaBoostParams& p, const Matrix& X, std::size_t n_classes);
Matrix forest_scores(const ForestParams& p, const Matrix& X, std::size_t n_classes);
Matrix tree_scores(const TreeParams& p, const Matrix& X, std::size_t n_classes);
Matrix gaussian_nb_scores(const GaussianNBParams& p, const Matrix& X);
Matrix bernoulli_nb_scores(const BernoulliNBParams& p, const Matrix& X);

// Bootstrap rows of tree `i`, replayable from the forest seed.
std::vector<std::size_t> bootstrap_rows(std::uint64_t forest_seed, std::size_t tree, std::size_t n, bool bootstrap);

} // namespace lsq::detail
