#include "lsq/ensemble.hpp"

#include "lsq/csv.hpp"
#include "lsq/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace lsq {

namespace {

std::string joined(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

} // namespace

std::vector<std::string> member_tags() {
    return {"gaussian_nb", "bernoulli_nb", "logistic",      "logistic_l1", "logistic_l2",
            "sgd",         "linear_svm",   "decision_tree", "random_forest", "adaboost"};
}

EnsembleMember member_from_tag(const std::string& tag) {
    EnsembleMember m;
    m.tag = tag;
    if (tag == "logistic" || tag == "logistic_l2") {
        m.algorithm = Algorithm::logistic;
        m.config.logistic.penalty = Penalty::l2;
        return m;
    }
    if (tag == "logistic_l1") {
        m.algorithm = Algorithm::logistic;
        m.config.logistic.penalty = Penalty::l1;
        return m;
    }
    const auto tags = member_tags();
    if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
        throw std::invalid_argument("unknown ensemble member '" + tag + "'; valid: " + joined(tags));
    }
    m.algorithm = parse_algorithm(tag);
    return m;
}

std::vector<std::string> ensemble_presets() { return {"best", "ensemble1"}; }

EnsembleSpec EnsembleSpec::from_tags(const std::vector<std::string>& tags) {
    EnsembleSpec s;
    for (const auto& t : tags) s.members.push_back(member_from_tag(t));
    s.validate();
    return s;
}

EnsembleSpec EnsembleSpec::preset(const std::string& name) {
    if (name == "best") return from_tags({"gaussian_nb", "logistic_l1", "decision_tree", "sgd"});
    if (name == "ensemble1") return from_tags({"logistic", "gaussian_nb", "bernoulli_nb", "sgd"});
    throw std::invalid_argument("unknown ensemble preset '" + name + "'; valid: " + joined(ensemble_presets()));
}

void EnsembleSpec::validate() const {
    if (members.empty()) throw std::invalid_argument("ensemble: at least one member required");
    if (k_features < 1) throw std::invalid_argument("ensemble: k_features must be >= 1");
    if (weights.empty()) return;
    if (weights.size() != members.size()) throw std::invalid_argument("ensemble: one weight per member required");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("ensemble: weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("ensemble: weights must sum to 1");
}

double EnsembleSpec::weight(std::size_t m) const {
    return weights.empty() ? 1.0 / static_cast<double>(members.size()) : weights[m];
}

FittedEnsemble ensemble_fit(const EnsembleSpec& spec, const TrainingWindow& window, std::uint64_t seed) {
    spec.validate();
    FittedEnsemble out;
    out.spec = spec;
    const std::set<int> classes(window.y.begin(), window.y.end());
    if (classes.size() < 2) {
        // nothing to rank by: every column scores 0 and the first k are kept
        for (std::size_t j = 0; j < window.feature_names.size(); ++j) {
            out.scores.push_back({window.feature_names[j], 0.0, static_cast<int>(j) + 1});
        }
    } else {
        out.scores = anova_f_scores(window.X, window.y, window.feature_names);
    }
    out.features = select_k_best(out.scores, spec.k_features);
    const Matrix X = window.X.select_cols(column_indices(window.feature_names, out.features));
    for (std::size_t m = 0; m < spec.members.size(); ++m) {
        const auto& member = spec.members[m];
        ClassifierConfig cfg = member.config;
        cfg.sgd.seed = derive_seed(seed, 2 * m);
        cfg.forest.seed = derive_seed(seed, 2 * m + 1);
        try {
            auto f = fit(member.algorithm, X, window.y, cfg);
            out.models.push_back(std::move(f.model));
            out.reports.push_back(std::move(f.report));
        } catch (const std::exception& e) {
            throw std::runtime_error("ensemble member '" + member.tag + "' failed: " + e.what());
        }
    }
    return out;
}

std::vector<std::vector<int>> member_predictions(const FittedEnsemble& fitted, const Matrix& X) {
    if (X.cols() != fitted.features.size()) {
        throw std::invalid_argument("ensemble: expected " + std::to_string(fitted.features.size()) + " columns, got " +
                                    std::to_string(X.cols()));
    }
    std::vector<std::vector<int>> out;
    for (const auto& m : fitted.models) out.push_back(predict(m, X));
    return out;
}

std::vector<double> ensemble_score(const FittedEnsemble& fitted, const Matrix& X) {
    std::vector<double> score(X.rows(), 0.0);
    if (fitted.spec.mode == CombineMode::hard) {
        const auto preds = member_predictions(fitted, X);
        for (std::size_t m = 0; m < preds.size(); ++m) {
            const double w = fitted.spec.weight(m);
            for (std::size_t r = 0; r < X.rows(); ++r) score[r] += w * std::clamp(preds[m][r], -1, 1);
        }
        return score;
    }
    if (X.cols() != fitted.features.size()) {
        throw std::invalid_argument("ensemble: expected " + std::to_string(fitted.features.size()) + " columns, got " +
                                    std::to_string(X.cols()));
    }
    for (std::size_t m = 0; m < fitted.models.size(); ++m) {
        const auto& model = fitted.models[m];
        const auto p = class_probabilities(model, X);
        const double w = fitted.spec.weight(m);
        for (std::size_t c = 0; c < model.classes.size(); ++c) {
            const int sign = std::clamp(model.classes[c], -1, 1);
            if (sign == 0) continue;
            for (std::size_t r = 0; r < X.rows(); ++r) score[r] += w * sign * p(r, c);
        }
    }
    return score;
}

PositionSets select_positions(const std::vector<double>& scores, std::size_t n_long, std::size_t n_short) {
    if (scores.empty()) throw std::invalid_argument("select_positions: no scores");
    if (n_long + n_short > scores.size()) {
        throw std::invalid_argument("select_positions: " + std::to_string(n_long + n_short) +
                                    " positions requested from " + std::to_string(scores.size()) + " scores");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("select_positions: non-finite score");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    PositionSets out;
    out.longs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_long));
    out.shorts.assign(order.end() - static_cast<std::ptrdiff_t>(n_short), order.end());
    std::sort(out.longs.begin(), out.longs.end());
    std::sort(out.shorts.begin(), out.shorts.end());
    const std::size_t tied = static_cast<std::size_t>(
        std::count(scores.begin(), scores.end(), scores[order.front()]));
    if (tied == scores.size() && n_long + n_short > 0) {
        out.diagnostics.push_back("select_positions: all scores equal; sides filled by symbol order");
    }
    return out;
}

TopBottomAccuracy top_bottom_accuracy(const PositionSets& sets, const std::vector<int>& realized) {
    TopBottomAccuracy out;
    std::size_t right = 0;
    auto tally = [&](const std::vector<std::size_t>& rows, int side) {
        for (std::size_t r : rows) {
            const int y = realized.at(r);
            if (y == 0) {
                ++out.skipped_neutral;
                continue;
            }
            ++out.counted;
            right += y == side ? 1 : 0;
        }
    };
    tally(sets.longs, 1);
    tally(sets.shorts, -1);
    out.accuracy = out.counted ? static_cast<double>(right) / static_cast<double>(out.counted)
                               : std::numeric_limits<double>::quiet_NaN();
    return out;
}

void write_conviction_csv(const std::vector<ConvictionRow>& rows, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,score,position\n";
    for (const auto& r : rows) out << r.date << ',' << r.symbol << ',' << csv::format(r.score) << ',' << r.position << '\n';
}

} // namespace lsq
