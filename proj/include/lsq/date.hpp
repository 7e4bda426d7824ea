#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lsq {

// Calendar day stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}
    explicit Date(std::chrono::sys_days d) : days_(static_cast<std::int32_t>(d.time_since_epoch().count())) {}
    Date(int year, unsigned month, unsigned day);

    // Strict ISO-8601 "YYYY-MM-DD"; throws std::invalid_argument otherwise.
    static Date parse(std::string_view text);
    // Non-throwing variant used by the CSV readers.
    static bool try_parse(std::string_view text, Date& out);

    std::string iso() const;

    constexpr std::int32_t days() const noexcept { return days_; }
    std::chrono::sys_days sys() const { return std::chrono::sys_days{std::chrono::days{days_}}; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{sys()}; }

    int year() const;
    unsigned month() const;
    // 1 = Monday .. 7 = Sunday
    unsigned iso_weekday() const;
    // Monday of the ISO week containing this day; identifies the ISO week uniquely.
    Date iso_week_start() const;
    Date month_start() const;

    Date plus_days(int n) const { return Date{days_ + n}; }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::int32_t days_ = 0;
};

} // namespace lsq
