#include "kfs/datetime.hpp"

#include <cstdio>

namespace kfs {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

bool parse_int(const std::string& s, size_t begin, size_t end, int& out) {
    if (begin >= end || end > s.size()) return false;
    int v = 0;
    for (size_t i = begin; i < end; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

DateTime DateTime::parse(const std::string& text) {
    DateTime dt;
    const size_t n = text.size();
    bool ok = n >= 10 && text[4] == '-' && text[7] == '-' && parse_int(text, 0, 4, dt.year) &&
              parse_int(text, 5, 7, dt.month) && parse_int(text, 8, 10, dt.day);
    if (ok && n > 10) {
        ok = (text[10] == ' ' || text[10] == 'T') && n >= 16 && text[13] == ':' &&
             parse_int(text, 11, 13, dt.hour) && parse_int(text, 14, 16, dt.minute);
        if (ok && n > 16) {
            ok = n == 19 && text[16] == ':' && parse_int(text, 17, 19, dt.second);
        } else if (ok) {
            ok = n == 16;
        }
    } else if (ok) {
        ok = n == 10;
    }
    if (!ok || dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > 31 || dt.hour > 23 ||
        dt.minute > 59 || dt.second > 59) {
        throw DataError("unparseable datetime '" + text + "'");
    }
    return dt;
}

DateTime DateTime::from_epoch(int64_t seconds) {
    int64_t days = seconds / 86400;
    int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    DateTime dt;
    civil_from_days(days, dt.year, dt.month, dt.day);
    dt.hour = static_cast<int>(rem / 3600);
    dt.minute = static_cast<int>((rem % 3600) / 60);
    dt.second = static_cast<int>(rem % 60);
    return dt;
}

int64_t DateTime::epoch_seconds() const {
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

int DateTime::day_of_week() const {
    // 1970-01-01 was a Thursday; shift so Monday = 0.
    const int64_t days = days_from_civil(year, month, day);
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

std::string DateTime::to_string() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", year, month, day, hour, minute,
                  second);
    return buf;
}

}  // namespace kfs
