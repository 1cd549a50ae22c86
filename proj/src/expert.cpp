#include "d2eal/expert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace d2eal::expert {

DriftState advance_drift(DriftState drift, double reset_probability, Rng& rng) {
    if (!(reset_probability >= 0.0 && reset_probability <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "drift reset probability must lie in [0, 1]");
    }
    const bool reset = rng.bernoulli(reset_probability);
    return reset ? DriftState{0} : DriftState{drift.steps + 1};
}

GammaSchedule::GammaSchedule(std::vector<Segment> segments, int horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
    if (horizon_ < 1) {
        throw Error(ErrorCode::ConfigError, "gamma schedule horizon must be >= 1");
    }
    if (segments_.empty()) {
        throw Error(ErrorCode::ConfigError, "gamma schedule needs at least one segment");
    }
    if (segments_.front().from != 0.0) {
        throw Error(ErrorCode::ConfigError, "first gamma segment must start at 0");
    }
    const std::size_t n = segments_.front().gamma.size();
    double prev = -1.0;
    for (const Segment& seg : segments_) {
        if (seg.gamma.size() != n || n == 0) {
            throw Error(ErrorCode::ConfigError, "every gamma segment needs one value per robot");
        }
        if (!(seg.from > prev) || seg.from >= 1.0) {
            throw Error(ErrorCode::ConfigError, "gamma segment starts must increase within [0, 1)");
        }
        prev = seg.from;
        for (double g : seg.gamma) {
            if (!std::isfinite(g) || g < 0.0) {
                throw Error(ErrorCode::ConfigError, "gamma values must be finite and non-negative");
            }
        }
    }
}

GammaSchedule GammaSchedule::reference_table(int horizon) {
    return GammaSchedule(
        {
            {0.0, {0.01, 0.1, 0.1, 0.2, 0.4, 0.8}},
            {1.0 / 6.0, {0.01, 0.1, 0.2, 0.1, 0.3, 0.6}},
            {1.0 / 3.0, {0.3, 0.3, 0.4, 0.05, 0.3, 0.3}},
            {1.0 / 2.0, {0.6, 0.3, 0.2, 0.2, 0.3, 0.01}},
            {5.0 / 6.0, {0.8, 0.3, 0.2, 0.2, 0.1, 0.01}},
        },
        horizon);
}

GammaSchedule GammaSchedule::constant(std::vector<double> gamma, int horizon) {
    return GammaSchedule({{0.0, std::move(gamma)}}, horizon);
}

double GammaSchedule::gamma(int step, std::size_t robot) const {
    if (robot >= robots()) {
        throw Error(ErrorCode::InvalidArgument, "gamma requested for unknown robot " + std::to_string(robot));
    }
    const double position = static_cast<double>(step);
    const Segment* active = &segments_.front();
    for (const Segment& seg : segments_) {
        if (position >= seg.from * horizon_) {
            active = &seg;
        }
    }
    return active->gamma[robot];
}

ExpertPrediction predict(const Vec2& true_future, std::size_t robot, int step, int lookahead, DriftState drift,
                         const GammaSchedule& schedule, Rng& rng) {
    const double g = schedule.gamma(step, robot);
    const Mat2 cov = declared_covariance(g);
    return {gaussian2(rng, true_future + drift_bias(g, drift), cov), cov, robot, lookahead};
}

double expert_divergence_bound(std::span<const Vec2> means) noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        for (std::size_t j = i + 1; j < means.size(); ++j) {
            worst = std::max(worst, distance(means[i], means[j]));
        }
    }
    return worst;
}

}  // namespace d2eal::expert
