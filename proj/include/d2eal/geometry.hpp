// Planar math, the bounded prediction loss and seedable random streams.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "d2eal/error.hpp"

namespace d2eal {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x{0};
    double y{0};

    constexpr Vec2& operator+=(const Vec2& o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

    [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
    [[nodiscard]] constexpr double squared_norm() const noexcept { return x * x + y * y; }
    [[nodiscard]] bool is_finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

[[nodiscard]] constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
/// z-component of the 3-D cross product of the embedded vectors.
[[nodiscard]] constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double distance(const Vec2& a, const Vec2& b) noexcept { return (a - b).norm(); }

/// 2x2 matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
    double a{0}, b{0}, c{0}, d{0};

    [[nodiscard]] static constexpr Mat2 identity() noexcept { return {1, 0, 0, 1}; }
    [[nodiscard]] static constexpr Mat2 diag(double d0, double d1) noexcept { return {d0, 0, 0, d1}; }
    [[nodiscard]] static constexpr Mat2 scaled_identity(double s) noexcept { return {s, 0, 0, s}; }
    [[nodiscard]] static constexpr Mat2 outer(const Vec2& u, const Vec2& v) noexcept {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    friend constexpr Mat2 operator+(const Mat2& m, const Mat2& n) noexcept {
        return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
    }
    friend constexpr Mat2 operator-(const Mat2& m, const Mat2& n) noexcept {
        return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
    }
    friend constexpr Mat2 operator*(const Mat2& m, double s) noexcept { return {m.a * s, m.b * s, m.c * s, m.d * s}; }
    friend constexpr Mat2 operator*(double s, const Mat2& m) noexcept { return m * s; }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) noexcept {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) noexcept {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

    [[nodiscard]] constexpr Mat2 transpose() const noexcept { return {a, c, b, d}; }
    [[nodiscard]] constexpr double trace() const noexcept { return a + d; }
    [[nodiscard]] constexpr double det() const noexcept { return a * d - b * c; }
    /// Caller guarantees det() != 0.
    [[nodiscard]] constexpr Mat2 inverse() const noexcept {
        const double inv = 1.0 / det();
        return {d * inv, -b * inv, -c * inv, a * inv};
    }
    [[nodiscard]] bool is_finite() const noexcept {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
    }
};

/// Eigen-decomposition of a symmetric 2x2 matrix. values ascending; vectors[k]
/// is the unit eigenvector of values[k].
struct SymEigen {
    std::array<double, 2> values;
    std::array<Vec2, 2> vectors;
};

/// Only the symmetric part (b+c)/2 of the off-diagonal is used.
[[nodiscard]] SymEigen eigen_symmetric(const Mat2& m) noexcept;

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kPsdTolerance = 1e-9;

[[nodiscard]] bool is_symmetric(const Mat2& m, double tol = kSymmetryTolerance) noexcept;
[[nodiscard]] bool is_psd(const Mat2& m, double tol = kPsdTolerance) noexcept;

/// Lower-triangular L with L*L^T == m for symmetric PSD m. Zero pivots are
/// handled, so singular covariances are allowed.
[[nodiscard]] Mat2 cholesky_psd(const Mat2& m) noexcept;

/// l(x, y) = min(||x - y|| / scale, 1).
[[nodiscard]] double loss(const Vec2& prediction, const Vec2& outcome, double scale);

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// xoshiro256** keyed by (seed, stream). State is expanded with splitmix64 so
/// neighbouring stream ids give unrelated sequences. Normal variates use the
/// Box-Muller transform with no cached spare, which keeps every draw a fixed
/// number of 64-bit outputs.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    bool bernoulli(double p) noexcept { return uniform() < p; }
    /// Pair of independent standard normals.
    std::array<double, 2> standard_normal_pair() noexcept;

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::array<std::uint64_t, 4> s_{};
};

/// Draw from N(mean, cov). Throws InvalidCovariance when cov is not symmetric PSD.
[[nodiscard]] Vec2 gaussian2(Rng& rng, const Vec2& mean, const Mat2& cov);

}  // namespace d2eal
