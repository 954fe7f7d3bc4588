#include "lfgp/timeparse.hpp"

#include <cstdio>
#include <stdexcept>

namespace lfgp {

// Howard Hinnant's branchless civil date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

int weekday_from_days(std::int64_t days) {
    // 1970-01-01 was a Thursday; map to Monday = 0.
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t parse_iso8601_utc(const std::string& text) {
    int y, mo, d, h, mi, s;
    char sep;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) != 7 ||
        (sep != 'T' && sep != ' '))
        throw std::invalid_argument("bad ISO-8601 timestamp '" + text +
                                    "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
        throw std::invalid_argument("out-of-range ISO-8601 timestamp '" + text + "'");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(std::int64_t t) {
    const std::int64_t days = floor_div(t, 86400);
    const auto sod = static_cast<int>(t - days * 86400);
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo, d, sod / 3600,
                  (sod % 3600) / 60, sod % 60);
    return buf;
}

std::int64_t parse_iso_date(const std::string& text) {
    int y, mo, d;
    if (std::sscanf(text.c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
        throw std::invalid_argument("bad ISO date '" + text + "' (expected YYYY-MM-DD)");
    return days_from_civil(y, mo, d);
}

} // namespace lfgp
