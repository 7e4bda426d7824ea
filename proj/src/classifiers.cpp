#include "classifier_detail.hpp"

#include <cmath>

namespace lsq {

namespace {

constexpr std::pair<Algorithm, const char*> kAlgorithmNames[] = {
    {Algorithm::gaussian_nb, "gaussian_nb"},     {Algorithm::bernoulli_nb, "bernoulli_nb"},
    {Algorithm::logistic, "logistic"},           {Algorithm::sgd, "sgd"},
    {Algorithm::linear_svm, "linear_svm"},       {Algorithm::decision_tree, "decision_tree"},
    {Algorithm::random_forest, "random_forest"}, {Algorithm::adaboost, "adaboost"},
};

} // namespace

std::string to_string(Algorithm a) {
    for (const auto& [k, v] : kAlgorithmNames) {
        if (k == a) return v;
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& s) {
    std::string valid;
    for (const auto& [k, v] : kAlgorithmNames) {
        if (s == v) return k;
        valid += valid.empty() ? v : std::string(", ") + v;
    }
    throw std::invalid_argument("unknown algorithm '" + s + "' (valid: " + valid + ")");
}

Fitted fit(Algorithm a, const Matrix& X, const std::vector<int>& y, const ClassifierConfig& cfg) {
    switch (a) {
    case Algorithm::gaussian_nb: return fit_gaussian_nb(X, y, cfg.gaussian_nb);
    case Algorithm::bernoulli_nb: return fit_bernoulli_nb(X, y, cfg.bernoulli_nb);
    case Algorithm::logistic: return fit_logistic(X, y, cfg.logistic);
    case Algorithm::sgd: return fit_sgd(X, y, cfg.sgd);
    case Algorithm::linear_svm: return fit_linear_svm(X, y, cfg.svm);
    case Algorithm::decision_tree: return fit_decision_tree(X, y, cfg.tree);
    case Algorithm::random_forest: return fit_random_forest(X, y, cfg.forest);
    case Algorithm::adaboost: return fit_adaboost(X, y, cfg.adaboost);
    }
    throw std::invalid_argument("fit: unhandled algorithm");
}

Matrix predict_score(const TrainedModel& m, const Matrix& X) {
    if (X.rows() > 0 && X.cols() != m.n_features) {
        throw std::invalid_argument("predict: model expects " + std::to_string(m.n_features) + " features, got " +
                                    std::to_string(X.cols()));
    }
    const std::size_t k = m.classes.size();
    if (X.rows() == 0) return Matrix(0, k);
    if (k == 1) return Matrix(X.rows(), 1, 1.0);
    return std::visit(
        [&](const auto& p) -> Matrix {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GaussianNBParams>) return detail::gaussian_nb_scores(p, X);
            else if constexpr (std::is_same_v<P, BernoulliNBParams>) return detail::bernoulli_nb_scores(p, X);
            else if constexpr (std::is_same_v<P, LinearParams>) return detail::linear_scores(p, X, k);
            else if constexpr (std::is_same_v<P, TreeParams>) return detail::tree_scores(p, X, k);
            else if constexpr (std::is_same_v<P, ForestParams>) return detail::forest_scores(p, X, k);
            else return detail::adaboost_scores(p, X, k);
        },
        m.params);
}

std::vector<int> predict(const TrainedModel& m, const Matrix& X) {
    const Matrix s = predict_score(m, X);
    std::vector<int> out(s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const auto row = s.row(r);
        out[r] = m.classes[static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin())];
    }
    return out;
}

Matrix class_probabilities(const TrainedModel& m, const Matrix& X) {
    Matrix s = predict_score(m, X);
    const bool simplex = m.algorithm == Algorithm::gaussian_nb || m.algorithm == Algorithm::bernoulli_nb ||
                         m.algorithm == Algorithm::random_forest || m.algorithm == Algorithm::decision_tree ||
                         m.classes.size() == 1;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        auto row = s.row(r);
        double z = 0.0;
        if (simplex) {
            for (double v : row) z += v;
            for (double& v : row) v /= z;
            continue;
        }
        const double mx = *std::max_element(row.begin(), row.end());
        for (double& v : row) {
            v = std::exp(v - mx);
            z += v;
        }
        for (double& v : row) v /= z;
    }
    return s;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (truth.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

// --- JSON ---------------------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix matrix_from(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

json tree_json(const TreeParams& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"leaf", n.leaf},
                         {"class_counts", n.class_counts}});
    }
    return nodes;
}

TreeParams tree_from(const json& j) {
    TreeParams t;
    for (const auto& n : j) {
        t.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                           n.at("right").get<int>(), n.at("leaf").get<int>(),
                           n.at("class_counts").get<std::vector<double>>()});
    }
    return t;
}

} // namespace

nlohmann::json to_json(const TrainedModel& m) {
    json params = std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GaussianNBParams>) {
                return {{"log_prior", p.log_prior}, {"mean", matrix_json(p.mean)}, {"var", matrix_json(p.var)}};
            } else if constexpr (std::is_same_v<P, BernoulliNBParams>) {
                return {{"threshold", p.threshold},
                        {"log_prior", p.log_prior},
                        {"log_p", matrix_json(p.log_p)},
                        {"log_q", matrix_json(p.log_q)}};
            } else if constexpr (std::is_same_v<P, LinearParams>) {
                return {{"w", matrix_json(p.w)}, {"b", p.b}};
            } else if constexpr (std::is_same_v<P, TreeParams>) {
                return {{"nodes", tree_json(p)}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                json trees = json::array();
                for (const auto& t : p.trees) trees.push_back(tree_json(t));
                return {{"seed", p.seed}, {"bootstrap", p.bootstrap}, {"n_train", p.n_train}, {"trees", trees}};
            } else {
                json boosters = json::array();
                for (const auto& b : p.boosters) {
                    json stumps = json::array();
                    for (const auto& s : b) {
                        stumps.push_back({{"feature", s.feature},
                                          {"threshold", s.threshold},
                                          {"polarity", s.polarity},
                                          {"weight", s.weight},
                                          {"error", s.error}});
                    }
                    boosters.push_back(stumps);
                }
                return {{"boosters", boosters}};
            }
        },
        m.params);
    return {{"format", "lsq-model"},
            {"version", 1},
            {"algorithm", to_string(m.algorithm)},
            {"classes", m.classes},
            {"n_features", m.n_features},
            {"params", params}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "lsq-model") throw std::runtime_error("model JSON: not an lsq-model document");
    if (j.value("version", 0) != 1) throw std::runtime_error("model JSON: unsupported version");
    TrainedModel m;
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.classes = j.at("classes").get<std::vector<int>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    const json& p = j.at("params");
    switch (m.algorithm) {
    case Algorithm::gaussian_nb:
        m.params = GaussianNBParams{p.at("log_prior").get<std::vector<double>>(), matrix_from(p.at("mean")),
                                    matrix_from(p.at("var"))};
        break;
    case Algorithm::bernoulli_nb:
        m.params = BernoulliNBParams{p.at("threshold").get<double>(), p.at("log_prior").get<std::vector<double>>(),
                                     matrix_from(p.at("log_p")), matrix_from(p.at("log_q"))};
        break;
    case Algorithm::logistic:
    case Algorithm::sgd:
    case Algorithm::linear_svm:
        m.params = LinearParams{matrix_from(p.at("w")), p.at("b").get<std::vector<double>>()};
        break;
    case Algorithm::decision_tree: m.params = tree_from(p.at("nodes")); break;
    case Algorithm::random_forest: {
        ForestParams f;
        f.seed = p.at("seed").get<std::uint64_t>();
        f.bootstrap = p.at("bootstrap").get<bool>();
        f.n_train = p.at("n_train").get<std::size_t>();
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from(t));
        m.params = std::move(f);
        break;
    }
    case Algorithm::adaboost: {
        AdaBoostParams a;
        for (const auto& b : p.at("boosters")) {
            std::vector<Stump> stumps;
            for (const auto& s : b) {
                stumps.push_back({s.at("feature").get<int>(), s.at("threshold").get<double>(),
                                  s.at("polarity").get<double>(), s.at("weight").get<double>(),
                                  s.at("error").get<double>()});
            }
            a.boosters.push_back(std::move(stumps));
        }
        m.params = std::move(a);
        break;
    }
    }
    return m;
}

} // namespace lsq
