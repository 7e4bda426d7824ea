#pragma once

#include "lsq/date.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lsq {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

// Aligned dates x symbols matrix of one field. NaN marks a missing cell.
// Dates are strictly increasing and symbols unique; both axes are fixed at
// construction so a Panel can be shared read-only between threads.
class Panel {
public:
    Panel() = default;
    Panel(std::vector<Date> dates, std::vector<std::string> symbols, double fill = kMissing);
    Panel(std::vector<Date> dates, std::vector<std::string> symbols, std::vector<double> values);

    std::size_t n_dates() const noexcept { return dates_.size(); }
    std::size_t n_symbols() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }

    double operator()(std::size_t t, std::size_t s) const { return values_[t * symbols_.size() + s]; }
    double& operator()(std::size_t t, std::size_t s) { return values_[t * symbols_.size() + s]; }

    std::span<const double> row(std::size_t t) const {
        return {values_.data() + t * symbols_.size(), symbols_.size()};
    }
    std::span<double> row(std::size_t t) { return {values_.data() + t * symbols_.size(), symbols_.size()}; }

    std::vector<double> column(std::size_t s) const;
    void set_column(std::size_t s, std::span<const double> col);

    std::optional<std::size_t> date_index(Date d) const;
    std::optional<std::size_t> symbol_index(const std::string& sym) const;

    const std::vector<double>& values() const noexcept { return values_; }

    // Same axes, every cell missing.
    Panel blank_like() const { return Panel(dates_, symbols_); }
    bool same_axes(const Panel& other) const;

    // Rows [0, n) only; used by the causality tests.
    Panel head(std::size_t n) const;

private:
    std::vector<Date> dates_;
    std::vector<std::string> symbols_;
    std::vector<double> values_;
};

// Map a per-symbol sequence transform over every column.
template <typename Fn>
Panel map_columns(const Panel& in, Fn&& fn) {
    Panel out = in.blank_like();
    for (std::size_t s = 0; s < in.n_symbols(); ++s) {
        const auto col = in.column(s);
        out.set_column(s, fn(std::span<const double>(col)));
    }
    return out;
}

} // namespace lsq
