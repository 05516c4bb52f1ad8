#pragma once

#include <cstdint>
#include <string>

namespace ctxsep {

// Civil-time conversions on the proleptic Gregorian calendar. All
// timestamps in this project are epoch seconds of *local standard time*:
// the CSV inputs carry wall-clock instants, and no timezone or DST
// arithmetic is applied anywhere, so parsing is independent of the host
// environment.

// Days since 1970-01-01 for a civil date.
std::int64_t days_from_civil(int year, int month, int day);

// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int* year, int* month, int* day);

// Parses "YYYY-MM-DDTHH:MM" or "YYYY-MM-DDTHH:MM:SS" (a space is accepted
// in place of 'T') into epoch seconds. Throws ParseError on malformed or
// out-of-range fields; timezone suffixes are rejected (inputs are local
// standard time by contract).
std::int64_t parse_iso8601(const std::string& text);

// "YYYY-MM-DDTHH:MM:SS".
std::string format_iso8601(std::int64_t epoch_sec);

// Day of week, 0 = Monday .. 6 = Sunday.
int weekday_from_epoch(std::int64_t epoch_sec);

// Epoch seconds of Monday 00:00 of the week containing the instant.
std::int64_t week_start(std::int64_t epoch_sec);

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;
inline constexpr int kHoursPerWeek = 168;

}  // namespace ctxsep
