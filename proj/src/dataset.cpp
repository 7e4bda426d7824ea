#include "lsq/dataset.hpp"

#include "lsq/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lsq {

Panel forward_returns(const Panel& close, int n) {
    if (n < 1) throw std::invalid_argument("forward_returns: horizon must be >= 1");
    Panel out = close.blank_like();
    const auto h = static_cast<std::size_t>(n);
    for (std::size_t t = 0; t + h < close.n_dates(); ++t) {
        for (std::size_t s = 0; s < close.n_symbols(); ++s) {
            const double p0 = close(t, s), p1 = close(t + h, s);
            if (is_missing(p0) || is_missing(p1) || p0 == 0.0) continue;
            out(t, s) = (p1 - p0) / p0;
        }
    }
    return out;
}

LabelPanel quantile_labels(const Panel& fwd, int horizon, double upper, double lower) {
    if (upper < 0.0 || lower < 0.0 || upper + lower > 1.0) {
        throw std::invalid_argument("quantile_labels: need upper, lower >= 0 and upper + lower <= 1");
    }
    LabelPanel out{fwd.blank_like(), horizon};
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < fwd.n_dates(); ++t) {
        const auto row = fwd.row(t);
        order.clear();
        for (std::size_t s = 0; s < row.size(); ++s) {
            if (!is_missing(row[s])) order.push_back(s);
        }
        const std::size_t k = order.size();
        if (k < 3) continue;
        // stable sort keeps symbol order among equal values
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        const auto count = [k](double frac) {
            return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(k) - 1e-9));
        };
        const std::size_t n_up = std::min(count(upper), k);
        const std::size_t n_dn = std::min(count(lower), k - n_up);
        auto dst = out.values.row(t);
        for (std::size_t i = 0; i < k; ++i) {
            double v = 0.0;
            if (i < n_dn) v = -1.0;
            else if (i >= k - n_up) v = 1.0;
            dst[order[i]] = v;
        }
    }
    return out;
}

TrainingWindow build_training_window(const FactorMatrix& factors, const LabelPanel& labels, std::size_t asof,
                                     const WindowOptions& options, const Universe* universe) {
    if (options.window < 1) throw std::invalid_argument("training window must be >= 1 day");
    if (factors.size() == 0) throw std::invalid_argument("training window needs at least one factor");
    const Panel& lab = labels.values;
    if (!factors.panels.front().same_axes(lab)) throw std::invalid_argument("factor and label axes differ");
    if (asof >= lab.n_dates()) throw std::out_of_range("as-of index beyond the date axis");
    const auto window = static_cast<std::size_t>(options.window);
    const auto horizon = static_cast<std::size_t>(std::max(labels.horizon, 0));
    if (asof + 1 < window || window <= horizon) {
        throw std::runtime_error("insufficient history for a " + std::to_string(window) + "-day window at " +
                                 lab.dates()[asof].iso());
    }
    TrainingWindow w;
    w.asof = lab.dates()[asof];
    w.first_date = asof + 1 - window;
    w.last_date = asof - horizon;

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t t = w.first_date; t <= w.last_date; ++t) {
        for (std::size_t s = 0; s < lab.n_symbols(); ++s) {
            const double y = lab(t, s);
            if (is_missing(y)) continue;
            if (universe && !universe->contains(t, s)) continue;
            if (options.exclude_neutral && y == 0.0) continue;
            candidates.emplace_back(t, s);
        }
    }
    if (candidates.empty()) throw std::runtime_error("insufficient history: no labeled rows before " + w.asof.iso());

    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < factors.size(); ++f) {
        std::size_t missing = 0;
        for (const auto& [t, s] : candidates) missing += is_missing(factors.panels[f](t, s)) ? 1 : 0;
        if (static_cast<double>(missing) > options.max_missing_fraction * static_cast<double>(candidates.size())) {
            w.dropped_columns.push_back(factors.names[f]);
        } else {
            kept.push_back(f);
            w.feature_names.push_back(factors.names[f]);
        }
    }
    if (kept.empty()) throw std::runtime_error("every feature column is too sparse before " + w.asof.iso());

    w.X = Matrix(0, kept.size());
    std::vector<double> buf(kept.size());
    for (const auto& [t, s] : candidates) {
        bool complete = true;
        for (std::size_t j = 0; j < kept.size() && complete; ++j) {
            buf[j] = factors.panels[kept[j]](t, s);
            complete = !is_missing(buf[j]);
        }
        if (!complete) continue;
        w.X.append_row(buf);
        w.y.push_back(static_cast<int>(lab(t, s)));
        w.row_date.push_back(t);
        w.row_symbol.push_back(s);
    }
    if (w.X.empty()) throw std::runtime_error("insufficient history: no complete rows before " + w.asof.iso());
    return w;
}

PredictionRows prediction_rows(const FactorMatrix& factors, const std::vector<std::string>& features, std::size_t t,
                               const Universe* universe) {
    std::vector<const Panel*> cols;
    for (const auto& name : features) cols.push_back(&factors.at(name));
    PredictionRows out{Matrix(0, cols.size()), {}};
    if (cols.empty()) return out;
    std::vector<double> buf(cols.size());
    for (std::size_t s = 0; s < cols.front()->n_symbols(); ++s) {
        if (universe && !universe->contains(t, s)) continue;
        bool complete = true;
        for (std::size_t j = 0; j < cols.size() && complete; ++j) {
            buf[j] = (*cols[j])(t, s);
            complete = !is_missing(buf[j]);
        }
        if (!complete) continue;
        out.X.append_row(buf);
        out.symbols.push_back(s);
    }
    return out;
}

void write_training_window_csv(const TrainingWindow& w, const FactorMatrix& factors, const std::filesystem::path& path) {
    auto out = csv::open_output(path);
    out << "date,symbol,label";
    for (const auto& n : w.feature_names) out << ',' << n;
    out << '\n';
    const Panel& axes = factors.panels.front();
    for (std::size_t r = 0; r < w.X.rows(); ++r) {
        out << axes.dates()[w.row_date[r]].iso() << ',' << axes.symbols()[w.row_symbol[r]] << ',' << w.y[r];
        for (double v : w.X.row(r)) out << ',' << csv::format(v);
        out << '\n';
    }
}

} // namespace lsq
