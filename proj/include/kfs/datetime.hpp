#pragma once

#include <cstdint>
#include <string>

#include "kfs/errors.hpp"

namespace kfs {

// Civil date-time without timezone. Accepted text forms:
//   "YYYY-MM-DD", "YYYY-MM-DD HH:MM", "YYYY-MM-DD HH:MM:SS"
// (a 'T' separator is accepted in place of the space).
struct DateTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;

    static DateTime parse(const std::string& text);
    static DateTime from_epoch(int64_t seconds);

    int64_t epoch_seconds() const;
    int day_of_week() const;  // Monday = 0 .. Sunday = 6
    std::string to_string() const;

    bool operator==(const DateTime& other) const = default;
};

}  // namespace kfs
