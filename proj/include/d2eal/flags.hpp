#pragma once

#include <string>

namespace d2eal {

/// Per-step, per-robot condition flags written to the step log.
enum StepFlag : unsigned {
    kFlagDegenerateDirection = 1u << 0,
    kFlagCoincidentRobots = 1u << 1,
    kFlagWeightCollapse = 1u << 2,
    kFlagRegularizedCovariance = 1u << 3,
    kFlagNormalized = 1u << 4,
};

/// "|"-joined names, empty when no flag is set.
std::string describe_flags(unsigned flags);

}  // namespace d2eal
