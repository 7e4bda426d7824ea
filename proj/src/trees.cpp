#include "classifier_detail.hpp"
#include "lsq/random.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

namespace lsq {

double entropy_bits(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

namespace detail {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class Grower {
public:
    Grower(const Matrix& X, const std::vector<std::size_t>& cls, std::size_t n_classes, const TreeGrowOptions& opt,
           std::uint64_t feature_seed)
        : X_(X), cls_(cls), k_(n_classes), opt_(opt), rng_(feature_seed), global_(n_classes, 0.0) {
        for (std::size_t c : cls) global_[c] += 1.0;
        features_.resize(X.cols());
        std::iota(features_.begin(), features_.end(), 0);
    }

    // `rows` may repeat a row (bootstrap). Work is done on slots 0..n-1 into it;
    // each node keeps one slot list per feature, sorted by that feature, and a
    // split partitions every list stably so nothing is re-sorted below the root.
    TreeParams grow(std::vector<std::size_t> rows) {
        rows_ = std::move(rows);
        const std::size_t n = rows_.size(), d = X_.cols();
        Sorted root(d, std::vector<Entry>(n));
        for (std::size_t f = 0; f < d; ++f) {
            auto& list = root[f];
            for (std::size_t sl = 0; sl < n; ++sl) {
                list[sl] = {value(sl, f), static_cast<std::uint32_t>(sl), static_cast<std::uint32_t>(cls_[rows_[sl]])};
            }
            std::sort(list.begin(), list.end(), [](const Entry& a, const Entry& b) {
                return a.v < b.v || (a.v == b.v && a.slot < b.slot);
            });
        }
        goes_left_.assign(n, 0);
        xlogx_.assign(n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i) xlogx_[i] = static_cast<double>(i) * std::log2(static_cast<double>(i));

        TreeParams t;
        t.nodes.emplace_back();
        struct Job {
            Sorted lists;
            int depth;
            int node;
        };
        std::vector<Job> stack;
        stack.push_back({std::move(root), 0, 0});
        while (!stack.empty()) {
            Job job = std::move(stack.back());
            stack.pop_back();
            const auto& slots = job.lists.front();
            TreeNode node;
            node.class_counts.assign(k_, 0.0);
            for (const auto& e : slots) node.class_counts[e.cls] += 1.0;
            node.leaf = majority(node.class_counts);
            const Split s = best_split(job.lists, node.class_counts, job.depth);
            if (s.feature >= 0) {
                const auto f = static_cast<std::size_t>(s.feature);
                std::size_t n_left = 0;
                for (const auto& e : job.lists[f]) {
                    goes_left_[e.slot] = e.v <= s.threshold ? 1 : 0;
                    n_left += goes_left_[e.slot];
                }
                Sorted left(d), right(d);
                for (std::size_t g = 0; g < d; ++g) {
                    left[g].reserve(n_left);
                    right[g].reserve(slots.size() - n_left);
                    for (const auto& e : job.lists[g]) (goes_left_[e.slot] ? left[g] : right[g]).push_back(e);
                }
                node.feature = s.feature;
                node.threshold = s.threshold;
                node.left = static_cast<int>(t.nodes.size());
                node.right = node.left + 1;
                t.nodes.emplace_back();
                t.nodes.emplace_back();
                stack.push_back({std::move(right), job.depth + 1, node.right});
                stack.push_back({std::move(left), job.depth + 1, node.left});
            }
            t.nodes[static_cast<std::size_t>(job.node)] = std::move(node);
        }
        return t;
    }

private:
    struct Entry {
        double v;
        std::uint32_t slot;
        std::uint32_t cls;
    };
    using Sorted = std::vector<std::vector<Entry>>;

    double value(std::size_t slot, std::size_t f) const { return X_(rows_[slot], f); }

    // Majority; ties go to the class with more training samples overall, then the lower class.
    int majority(const std::vector<double>& counts) const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k_; ++c) {
            if (counts[c] > counts[best] || (counts[c] == counts[best] && global_[c] > global_[best])) best = c;
        }
        return static_cast<int>(best);
    }

    Split best_split(const Sorted& lists, const std::vector<double>& counts, int depth) {
        Split best;
        const auto n = lists.front().size();
        const auto min_leaf = static_cast<std::size_t>(std::max(opt_.min_leaf, 1));
        if (depth >= opt_.max_depth || n < 2 * min_leaf) return best;
        const double parent = entropy_bits(counts);
        if (parent <= 0.0) return best;

        std::vector<std::size_t> candidates;
        if (opt_.features_per_split == 0 || opt_.features_per_split >= X_.cols()) {
            candidates = features_;
        } else {
            // partial Fisher-Yates for a random subset, then scan it in column order
            std::vector<std::size_t> pool = features_;
            for (std::size_t i = 0; i < opt_.features_per_split; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng_)]);
            }
            candidates.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(opt_.features_per_split));
            std::sort(candidates.begin(), candidates.end());
        }

        std::vector<double> left(k_), right(k_);
        const double total = static_cast<double>(n);
        for (std::size_t f : candidates) {
            const auto& order = lists[f];
            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t c = order[i].cls;
                left[c] += 1.0;
                right[c] -= 1.0;
                const double a = order[i].v, b = order[i + 1].v;
                if (a == b) continue;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                // n_side * H(side) = n_side log n_side - sum c log c, counts are whole numbers
                double weighted = xlogx_[nl] + xlogx_[nr];
                for (std::size_t c2 = 0; c2 < k_; ++c2) {
                    weighted -= xlogx_[static_cast<std::size_t>(left[c2])] + xlogx_[static_cast<std::size_t>(right[c2])];
                }
                const double gain = parent - weighted / total;
                if (gain > best.gain + 1e-12) {
                    double mid = 0.5 * (a + b);
                    if (!(mid < b)) mid = a;
                    best = {static_cast<int>(f), mid, gain};
                }
            }
        }
        return best;
    }

    const Matrix& X_;
    const std::vector<std::size_t>& cls_;
    std::size_t k_;
    TreeGrowOptions opt_;
    std::mt19937_64 rng_;
    std::vector<double> global_;
    std::vector<std::size_t> features_;
    std::vector<std::size_t> rows_;
    std::vector<char> goes_left_;
    std::vector<double> xlogx_;
};

} // namespace

TreeParams grow_tree(const Matrix& X, const std::vector<std::size_t>& cls, std::size_t n_classes,
                     std::vector<std::size_t> rows, const TreeGrowOptions& opt, std::uint64_t feature_seed) {
    return Grower(X, cls, n_classes, opt, feature_seed).grow(std::move(rows));
}

const TreeNode& tree_leaf(const TreeParams& t, std::span<const double> x) {
    std::size_t i = 0;
    while (t.nodes[i].feature >= 0) {
        const auto& n = t.nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return t.nodes[i];
}

Matrix tree_scores(const TreeParams& p, const Matrix& X, std::size_t n_classes) {
    Matrix out(X.rows(), n_classes);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto& leaf = tree_leaf(p, X.row(r));
        double total = 0.0;
        for (double c : leaf.class_counts) total += c;
        for (std::size_t c = 0; c < n_classes; ++c) out(r, c) = total > 0.0 ? leaf.class_counts[c] / total : 0.0;
        // the leaf's own tie-broken class wins an exact tie in the fractions
        out(r, static_cast<std::size_t>(leaf.leaf)) += 1e-9;
    }
    return out;
}

std::vector<std::size_t> bootstrap_rows(std::uint64_t forest_seed, std::size_t tree, std::size_t n, bool bootstrap) {
    std::vector<std::size_t> rows(n);
    if (!bootstrap) {
        std::iota(rows.begin(), rows.end(), 0);
        return rows;
    }
    std::mt19937_64 rng(derive_seed(derive_seed(forest_seed, tree), 0));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& r : rows) r = pick(rng);
    return rows;
}

Matrix forest_scores(const ForestParams& p, const Matrix& X, std::size_t n_classes) {
    Matrix out(X.rows(), n_classes);
    if (p.trees.empty()) return out;
    const double share = 1.0 / static_cast<double>(p.trees.size());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (const auto& t : p.trees) out(r, static_cast<std::size_t>(tree_leaf(t, X.row(r)).leaf)) += share;
    }
    return out;
}

} // namespace detail

Fitted fit_decision_tree(const Matrix& X, const std::vector<int>& y, const TreeConfig& cfg) {
    if (cfg.max_depth < 1 || cfg.min_leaf < 1) throw std::invalid_argument("decision_tree: max_depth and min_leaf must be >= 1");
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, "decision_tree");
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    Fitted f{{Algorithm::decision_tree, enc.classes, X.cols(), {}}, {}};
    auto tree = detail::grow_tree(X, enc.index, enc.classes.size(), std::move(rows), {cfg.max_depth, cfg.min_leaf, 0}, 0);
    f.report.iterations = static_cast<int>(tree.nodes.size());
    f.model.params = std::move(tree);
    detail::finish_report(f, X, y, sw);
    return f;
}

Fitted fit_random_forest(const Matrix& X, const std::vector<int>& y, const ForestConfig& cfg) {
    if (cfg.n_trees < 1) throw std::invalid_argument("random_forest: n_trees must be >= 1");
    if (cfg.features_per_split < 0) throw std::invalid_argument("random_forest: features_per_split must be >= 1");
    const detail::Stopwatch sw;
    const auto enc = detail::encode_labels(X, y, "random_forest");
    const std::size_t m = cfg.features_per_split > 0
                              ? static_cast<std::size_t>(cfg.features_per_split)
                              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
    ForestParams p;
    p.seed = cfg.seed;
    p.bootstrap = cfg.bootstrap;
    p.n_train = X.rows();
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.n_trees); ++i) {
        auto rows = detail::bootstrap_rows(cfg.seed, i, X.rows(), cfg.bootstrap);
        p.trees.push_back(detail::grow_tree(X, enc.index, enc.classes.size(), std::move(rows),
                                            {cfg.max_depth, cfg.min_leaf, m}, derive_seed(derive_seed(cfg.seed, i), 1)));
    }
    Fitted f{{Algorithm::random_forest, enc.classes, X.cols(), std::move(p)}, {}};
    f.report.iterations = cfg.n_trees;
    detail::finish_report(f, X, y, sw);
    return f;
}

OobResult oob_error(const TrainedModel& forest, const Matrix& X, const std::vector<int>& y) {
    const auto* p = std::get_if<ForestParams>(&forest.params);
    if (!p) throw std::invalid_argument("oob_error: model is not a random forest");
    if (X.rows() != p->n_train || y.size() != X.rows()) {
        throw std::invalid_argument("oob_error: data must be the forest's training rows");
    }
    const std::size_t k = forest.classes.size();
    Matrix votes(X.rows(), k);
    std::vector<char> in_bag(X.rows());
    for (std::size_t t = 0; t < p->trees.size(); ++t) {
        std::fill(in_bag.begin(), in_bag.end(), 0);
        for (std::size_t r : detail::bootstrap_rows(p->seed, t, X.rows(), p->bootstrap)) in_bag[r] = 1;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            if (!in_bag[r]) votes(r, static_cast<std::size_t>(detail::tree_leaf(p->trees[t], X.row(r)).leaf)) += 1.0;
        }
    }
    OobResult out;
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = votes.row(r);
        const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        if (row[best] == 0.0) {
            ++out.never_out_of_bag;
            continue;
        }
        ++out.scored;
        wrong += forest.classes[best] != y[r] ? 1 : 0;
    }
    out.error = out.scored ? static_cast<double>(wrong) / static_cast<double>(out.scored) : 0.0;
    return out;
}

} // namespace lsq
