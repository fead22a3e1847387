#include "kfs/timefeat.hpp"

namespace kfs {

Matrix stamp_features(const std::vector<DateTime>& timestamps) {
    const int n = static_cast<int>(timestamps.size());
    for (int i = 1; i < n; ++i) {
        if (timestamps[static_cast<size_t>(i)].epoch_seconds() <=
            timestamps[static_cast<size_t>(i) - 1].epoch_seconds()) {
            throw DataError("stamp_features: non-monotonic timestamps at index " + std::to_string(i));
        }
    }
    Matrix out(n, kStampFeatures);
    for (int i = 0; i < n; ++i) {
        const DateTime& t = timestamps[static_cast<size_t>(i)];
        out.at(i, 0) = t.month / 12.0 - 0.5;
        out.at(i, 1) = t.day / 31.0 - 0.5;
        out.at(i, 2) = t.day_of_week() / 7.0 - 0.5;
        out.at(i, 3) = t.hour / 24.0 - 0.5;
        out.at(i, 4) = t.minute / 60.0 - 0.5;
    }
    return out;
}

}  // namespace kfs
