#include "lsq/panel.hpp"

#include <algorithm>
#include <stdexcept>

namespace lsq {

namespace {

void check_axes(const std::vector<Date>& dates, const std::vector<std::string>& symbols) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) throw std::invalid_argument("panel dates must be strictly increasing");
    }
    auto sorted = symbols;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("panel symbols must be unique");
    }
}

} // namespace

Panel::Panel(std::vector<Date> dates, std::vector<std::string> symbols, double fill)
    : dates_(std::move(dates)), symbols_(std::move(symbols)), values_(dates_.size() * symbols_.size(), fill) {
    check_axes(dates_, symbols_);
}

Panel::Panel(std::vector<Date> dates, std::vector<std::string> symbols, std::vector<double> values)
    : dates_(std::move(dates)), symbols_(std::move(symbols)), values_(std::move(values)) {
    check_axes(dates_, symbols_);
    if (values_.size() != dates_.size() * symbols_.size()) {
        throw std::invalid_argument("panel value count does not match dates x symbols");
    }
}

std::vector<double> Panel::column(std::size_t s) const {
    std::vector<double> col(dates_.size());
    const std::size_t stride = symbols_.size();
    for (std::size_t t = 0; t < dates_.size(); ++t) col[t] = values_[t * stride + s];
    return col;
}

void Panel::set_column(std::size_t s, std::span<const double> col) {
    if (col.size() != dates_.size()) throw std::invalid_argument("column length does not match panel");
    const std::size_t stride = symbols_.size();
    for (std::size_t t = 0; t < dates_.size(); ++t) values_[t * stride + s] = col[t];
}

std::optional<std::size_t> Panel::date_index(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> Panel::symbol_index(const std::string& sym) const {
    auto it = std::find(symbols_.begin(), symbols_.end(), sym);
    if (it == symbols_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - symbols_.begin());
}

bool Panel::same_axes(const Panel& other) const {
    return dates_ == other.dates_ && symbols_ == other.symbols_;
}

Panel Panel::head(std::size_t n) const {
    n = std::min(n, dates_.size());
    std::vector<Date> d(dates_.begin(), dates_.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n * symbols_.size()));
    return Panel(std::move(d), symbols_, std::move(v));
}

} // namespace lsq
