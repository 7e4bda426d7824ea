#include "lsq/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace lsq {

namespace {

bool parse_digits(std::string_view s, int& out) {
    if (s.empty()) return false;
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

} // namespace

Date::Date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    days_ = static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count());
}

bool Date::try_parse(std::string_view text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
        !parse_digits(text.substr(8, 2), d)) {
        return false;
    }
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    out = Date{sys_days{ymd}};
    return true;
}

Date Date::parse(std::string_view text) {
    Date d;
    if (!try_parse(text, d)) throw std::invalid_argument("malformed date '" + std::string(text) + "'");
    return d;
}

std::string Date::iso() const {
    const auto d = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int Date::year() const { return static_cast<int>(ymd().year()); }

unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }

unsigned Date::iso_weekday() const { return std::chrono::weekday{sys()}.iso_encoding(); }

Date Date::iso_week_start() const { return plus_days(-static_cast<int>(iso_weekday() - 1)); }

Date Date::month_start() const {
    const auto d = ymd();
    return Date{std::chrono::sys_days{d.year() / d.month() / std::chrono::day{1}}};
}

} // namespace lsq
