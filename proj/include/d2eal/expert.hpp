// Synthetic heterogeneous predictors: truth + resetting linear drift + noise.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "d2eal/geometry.hpp"

namespace d2eal::expert {

/// Steps since the drift clock last reset.
struct DriftState {
    std::uint64_t steps{0};
    friend bool operator==(const DriftState&, const DriftState&) = default;
};

/// s <- s + 1 with probability 1 - p, else 0. Consumes exactly one uniform.
[[nodiscard]] DriftState advance_drift(DriftState drift, double reset_probability, Rng& rng);

/// Piecewise-constant per-robot drift/noise proportionality, segments given as
/// fractions of the horizon. A segment covers [from * T, next_from * T).
class GammaSchedule {
public:
    struct Segment {
        double from{0.0};
        std::vector<double> gamma;
    };

    GammaSchedule() = default;
    GammaSchedule(std::vector<Segment> segments, int horizon);

    /// The 6-robot, 5-segment table used by the reference scenario.
    [[nodiscard]] static GammaSchedule reference_table(int horizon);
    [[nodiscard]] static GammaSchedule constant(std::vector<double> gamma, int horizon);

    [[nodiscard]] double gamma(int step, std::size_t robot) const;
    [[nodiscard]] std::size_t robots() const noexcept { return segments_.empty() ? 0 : segments_.front().gamma.size(); }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }

private:
    std::vector<Segment> segments_;
    int horizon_{1};
};

struct ExpertPrediction {
    Vec2 mean;
    Mat2 cov;  ///< declared noise covariance only; the drift is not modelled in it
    std::size_t robot{0};
    int lookahead{1};
};

/// Drift bias gamma * s * [1, 1].
[[nodiscard]] constexpr Vec2 drift_bias(double gamma, DriftState drift) noexcept {
    const double b = gamma * static_cast<double>(drift.steps);
    return {b, b};
}

/// (10 gamma)^2 I.
[[nodiscard]] constexpr Mat2 declared_covariance(double gamma) noexcept {
    const double sigma = 10.0 * gamma;
    return Mat2::scaled_identity(sigma * sigma);
}

/// One prediction of the true future position. Consumes one normal pair.
[[nodiscard]] ExpertPrediction predict(const Vec2& true_future, std::size_t robot, int step, int lookahead,
                                       DriftState drift, const GammaSchedule& schedule, Rng& rng);

/// Max pairwise Euclidean distance between means (0 for fewer than two).
[[nodiscard]] double expert_divergence_bound(std::span<const Vec2> means) noexcept;

}  // namespace d2eal::expert
