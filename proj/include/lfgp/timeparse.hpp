#pragma once

#include <cstdint>
#include <string>

namespace lfgp {

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// Weekday with Monday = 0 ... Sunday = 6.
int weekday_from_days(std::int64_t days);

/// Strict "YYYY-MM-DDTHH:MM:SSZ" (the 'Z' may be omitted, a space may stand
/// in for 'T'); returns UTC epoch seconds.
std::int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(std::int64_t epoch_seconds);

/// Parse "YYYY-MM-DD" into a civil day number.
std::int64_t parse_iso_date(const std::string& text);

std::int64_t floor_div(std::int64_t a, std::int64_t b);

} // namespace lfgp
