#include "ctxsep/timeutil.hpp"

#include <cstdio>

#include "ctxsep/errors.hpp"

namespace ctxsep {

namespace {

// Floor division/modulo for possibly-negative epoch values.
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

bool parse_fixed_int(const std::string& s, std::size_t pos, int len, int* out) {
    int v = 0;
    for (int i = 0; i < len; ++i) {
        if (pos + static_cast<std::size_t>(i) >= s.size()) return false;
        const char c = s[pos + static_cast<std::size_t>(i)];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    *out = v;
    return true;
}

}  // namespace

std::int64_t days_from_civil(int year, int month, int day) {
    // Howard Hinnant's algorithm: shift the year so it starts in March,
    // making the leap day the last day of the shifted year.
    year -= month <= 2;
    const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
    const int yoe = static_cast<int>(year - era * 400);                    // [0, 399]
    const int doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                 // [0, 146096]
    return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t days, int* year, int* month, int* day) {
    days += 719468;
    const std::int64_t era = floor_div(days, 146097);
    const int doe = static_cast<int>(days - era * 146097);
    const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int mp = (5 * doy + 2) / 153;
    *day = doy - (153 * mp + 2) / 5 + 1;
    *month = mp + (mp < 10 ? 3 : -9);
    *year = static_cast<int>(y + (*month <= 2));
}

std::int64_t parse_iso8601(const std::string& text) {
    const auto fail = [&text]() -> std::int64_t {
        throw ParseError("malformed timestamp '" + text +
                         "' (expected YYYY-MM-DDTHH:MM[:SS])");
    };
    int year, month, day, hour, minute;
    int second = 0;
    if (text.size() < 16) return fail();
    if (!parse_fixed_int(text, 0, 4, &year) || text[4] != '-' ||
        !parse_fixed_int(text, 5, 2, &month) || text[7] != '-' ||
        !parse_fixed_int(text, 8, 2, &day) ||
        (text[10] != 'T' && text[10] != ' ') ||
        !parse_fixed_int(text, 11, 2, &hour) || text[13] != ':' ||
        !parse_fixed_int(text, 14, 2, &minute)) {
        return fail();
    }
    std::size_t end = 16;
    if (text.size() > 16) {
        if (text[16] != ':') return fail();
        if (!parse_fixed_int(text, 17, 2, &second)) return fail();
        end = 19;
    }
    if (end != text.size()) {
        throw ParseError("unexpected suffix on timestamp '" + text +
                         "' (timestamps are local standard time; zone "
                         "designators are not accepted)");
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
        hour > 23 || minute > 59 || second > 59) {
        throw ParseError("out-of-range field in timestamp '" + text + "'");
    }
    return days_from_civil(year, month, day) * kSecondsPerDay +
           hour * kSecondsPerHour + minute * 60 + second;
}

std::string format_iso8601(std::int64_t epoch_sec) {
    const std::int64_t days = floor_div(epoch_sec, kSecondsPerDay);
    std::int64_t rem = epoch_sec - days * kSecondsPerDay;
    int year, month, day;
    civil_from_days(days, &year, &month, &day);
    const int hour = static_cast<int>(rem / kSecondsPerHour);
    rem -= hour * kSecondsPerHour;
    const int minute = static_cast<int>(rem / 60);
    const int second = static_cast<int>(rem % 60);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", year, month,
                  day, hour, minute, second);
    return buf;
}

int weekday_from_epoch(std::int64_t epoch_sec) {
    // 1970-01-01 was a Thursday; +3 rotates so Monday maps to 0.
    const std::int64_t days = floor_div(epoch_sec, kSecondsPerDay);
    return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

std::int64_t week_start(std::int64_t epoch_sec) {
    const std::int64_t days = floor_div(epoch_sec, kSecondsPerDay);
    const std::int64_t wd = ((days + 3) % 7 + 7) % 7;
    return (days - wd) * kSecondsPerDay;
}

}  // namespace ctxsep
