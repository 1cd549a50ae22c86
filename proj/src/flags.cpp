#include "d2eal/flags.hpp"

#include <array>
#include <utility>

namespace d2eal {

std::string describe_flags(unsigned flags) {
    static constexpr std::array<std::pair<unsigned, const char*>, 5> kNames{{
        {kFlagDegenerateDirection, "degenerate_direction"},
        {kFlagCoincidentRobots, "coincident_robots"},
        {kFlagWeightCollapse, "weight_collapse"},
        {kFlagRegularizedCovariance, "regularized_covariance"},
        {kFlagNormalized, "normalized"},
    }};
    std::string out;
    for (const auto& [bit, name] : kNames) {
        if ((flags & bit) != 0) {
            if (!out.empty()) {
                out += '|';
            }
            out += name;
        }
    }
    return out;
}

}  // namespace d2eal
