#pragma once

#include <vector>

#include "kfs/datetime.hpp"
#include "kfs/matrix.hpp"

namespace kfs {

constexpr int kStampFeatures = 5;

// Calendar features per step, each bounded in [-0.5, 0.5]:
//   month/12 - 0.5, day/31 - 0.5, weekday/7 - 0.5, hour/24 - 0.5, minute/60 - 0.5
// Timestamps must be strictly increasing.
Matrix stamp_features(const std::vector<DateTime>& timestamps);

}  // namespace kfs
