// Comparison fusion strategies behind one interface.
//
// Covariance-based methods consume only the declared noise covariance of each
// prediction. Singular covariances are regularized by lambda * I and flagged.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "d2eal/flags.hpp"
#include "d2eal/geometry.hpp"

namespace d2eal::fusion {

enum class Strategy {
    D2EAL,
    NoComm,
    Mean,
    Median,
    Greedy,
    Kalman,
    CovarianceIntersection,
    Bayes,
    CovarianceUnion,
};

/// Config keys: d2eal, nocomm, mean, median, greedy, kf, ci, bf, cu.
[[nodiscard]] std::string_view to_string(Strategy s) noexcept;
[[nodiscard]] std::optional<Strategy> parse_strategy(std::string_view key) noexcept;
[[nodiscard]] std::span<const Strategy> all_strategies() noexcept;
[[nodiscard]] bool uses_covariance(Strategy s) noexcept;

struct FusionEntry {
    std::size_t robot{0};
    Vec2 mean;
    Mat2 cov;
    double cumulative_loss{0};
};

struct FusedPrediction {
    Vec2 mean;
    Mat2 cov{Mat2::identity()};  ///< identity for covariance-free methods
    std::optional<std::size_t> chosen;
    unsigned flags{0};
};

struct FusionOptions {
    double regularization{1e-9};
    /// Optimize CI weights for minimum fused trace instead of 1/trace weights.
    bool ci_exact{false};
    int ci_iterations{50};
    double ci_tolerance{1e-6};
    /// Choose each pairwise union mean by grid search along the segment
    /// between the two means, minimizing the union trace.
    bool cu_exact_mean{false};
    int cu_grid_points{101};
};

[[nodiscard]] FusedPrediction fuse_nocomm(std::span<const FusionEntry> input, std::size_t self);
[[nodiscard]] FusedPrediction fuse_mean(std::span<const FusionEntry> input);
/// Component-wise median; even counts average the two middle values.
[[nodiscard]] FusedPrediction fuse_median(std::span<const FusionEntry> input);
/// Least cumulative loss wins; ties go to the lowest robot id.
[[nodiscard]] FusedPrediction fuse_greedy_local(std::span<const FusionEntry> input);
/// Information-form fusion assuming uncorrelated inputs.
[[nodiscard]] FusedPrediction fuse_kalman(std::span<const FusionEntry> input, const FusionOptions& options = {});
[[nodiscard]] FusedPrediction fuse_ci(std::span<const FusionEntry> input, const FusionOptions& options = {});
/// Kalman mean with the covariance inflated by the neighbourhood size.
[[nodiscard]] FusedPrediction fuse_bayes(std::span<const FusionEntry> input, const FusionOptions& options = {});
/// Pairwise union folded in ascending robot order.
[[nodiscard]] FusedPrediction fuse_cu(std::span<const FusionEntry> input, const FusionOptions& options = {});

/// Dispatch for every strategy except D2EAL (which is stateful; see engine).
[[nodiscard]] FusedPrediction fuse(Strategy strategy, std::span<const FusionEntry> input, std::size_t self,
                                   const FusionOptions& options = {});

/// CI weights on the simplex, in input order.
[[nodiscard]] std::vector<double> ci_weights(std::span<const FusionEntry> input, const FusionOptions& options = {});

/// Smallest upper bound of two PSD matrices in the basis that diagonalizes
/// both: with A = L L^T and L^-1 B L^-T = V D V^T, returns L V max(D, I) V^T L^T.
[[nodiscard]] Mat2 union_covariance(const Mat2& a, const Mat2& b, double regularization = 1e-9,
                                    unsigned* flags = nullptr);

/// Union of two estimates about a chosen mean u.
[[nodiscard]] Mat2 union_about(const Vec2& u, const Vec2& m1, const Mat2& c1, const Vec2& m2, const Mat2& c2,
                               double regularization = 1e-9, unsigned* flags = nullptr);

}  // namespace d2eal::fusion
