#include "lsq/selection.hpp"

#include "lsq/csv.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace lsq {

std::vector<FeatureScore> anova_f_scores(const Matrix& X, const std::vector<int>& y,
                                         const std::vector<std::string>& names) {
    if (X.rows() != y.size()) throw std::invalid_argument("anova_f_scores: X and y row counts differ");
    if (names.size() != X.cols()) throw std::invalid_argument("anova_f_scores: one name per column required");
    std::map<int, std::size_t> group_of;
    for (int c : y) group_of.emplace(c, 0);
    const std::size_t g = group_of.size();
    if (g < 2) throw std::invalid_argument("anova_f_scores: need at least two classes");
    const std::size_t n = y.size();
    if (n <= g) throw std::invalid_argument("anova_f_scores: too few samples for the number of classes");
    std::size_t next = 0;
    for (auto& [c, idx] : group_of) idx = next++;
    std::vector<std::size_t> gi(n);
    std::vector<double> count(g, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        gi[i] = group_of[y[i]];
        count[gi[i]] += 1.0;
    }

    std::vector<FeatureScore> out(X.cols());
    std::vector<double> sum(g);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        std::fill(sum.begin(), sum.end(), 0.0);
        double total = 0.0, lo = X(0, j), hi = X(0, j);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = X(i, j);
            sum[gi[i]] += v;
            total += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out[j].name = names[j];
        if (lo == hi) continue; // constant column
        const double grand = total / static_cast<double>(n);
        double between = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            const double d = sum[k] / count[k] - grand;
            between += count[k] * d * d;
        }
        double within = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = X(i, j) - sum[gi[i]] / count[gi[i]];
            within += d * d;
        }
        const double ms_between = between / static_cast<double>(g - 1);
        const double ms_within = within / static_cast<double>(n - g);
        if (within <= 1e-12 * (between + within)) {
            out[j].f = between > 0.0 ? kPerfectSeparation : 0.0;
        } else {
            out[j].f = ms_between / ms_within;
        }
    }
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out[a].f > out[b].f; });
    for (std::size_t r = 0; r < order.size(); ++r) out[order[r]].rank = static_cast<int>(r + 1);
    return out;
}

std::vector<std::string> select_k_best(const std::vector<FeatureScore>& scores, int k) {
    if (scores.empty()) throw std::invalid_argument("select_k_best: no scores");
    if (k < 1) throw std::invalid_argument("select_k_best: k must be >= 1");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a].f > scores[b].f; });
    order.resize(std::min(order.size(), static_cast<std::size_t>(k)));
    std::sort(order.begin(), order.end());
    std::vector<std::string> out;
    for (std::size_t i : order) out.push_back(scores[i].name);
    return out;
}

std::vector<std::size_t> column_indices(const std::vector<std::string>& names, const std::vector<std::string>& chosen) {
    std::vector<std::size_t> out;
    for (const auto& c : chosen) {
        const auto it = std::find(names.begin(), names.end(), c);
        if (it == names.end()) throw std::invalid_argument("unknown feature '" + c + "'");
        out.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return out;
}

void write_selection_log_csv(const std::vector<SelectionLogRow>& rows, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "asof,rank,feature,F\n";
    for (const auto& r : rows) out << r.asof << ',' << r.rank << ',' << r.feature << ',' << csv::format(r.f) << '\n';
}

} // namespace lsq
