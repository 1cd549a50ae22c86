#include "d2eal/geometry.hpp"

#include <algorithm>
#include <string>

namespace d2eal {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::InvalidCovariance: return "InvalidCovariance";
        case ErrorCode::InvalidProbability: return "InvalidProbability";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

SymEigen eigen_symmetric(const Mat2& m) noexcept {
    const double a = m.a;
    const double d = m.d;
    const double b = 0.5 * (m.b + m.c);
    const double mean = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), b);

    SymEigen out{{mean - r, mean + r}, {Vec2{1, 0}, Vec2{0, 1}}};
    if (r == 0.0) {
        return out;
    }
    // Pick the better-conditioned of the two algebraically equivalent forms.
    Vec2 v = (a >= d) ? Vec2{out.values[1] - d, b} : Vec2{b, out.values[1] - a};
    v *= 1.0 / v.norm();
    out.vectors[1] = v;
    out.vectors[0] = Vec2{-v.y, v.x};
    return out;
}

bool is_symmetric(const Mat2& m, double tol) noexcept {
    return std::abs(m.b - m.c) <= tol;
}

bool is_psd(const Mat2& m, double tol) noexcept {
    if (!m.is_finite() || !is_symmetric(m)) {
        return false;
    }
    return eigen_symmetric(m).values[0] >= -tol;
}

Mat2 cholesky_psd(const Mat2& m) noexcept {
    const double b = 0.5 * (m.b + m.c);
    const double l11 = std::sqrt(std::max(0.0, m.a));
    if (l11 > 0.0) {
        const double l21 = b / l11;
        const double l22 = std::sqrt(std::max(0.0, m.d - l21 * l21));
        return {l11, 0.0, l21, l22};
    }
    return {0.0, 0.0, 0.0, std::sqrt(std::max(0.0, m.d))};
}

double loss(const Vec2& prediction, const Vec2& outcome, double scale) {
    if (!prediction.is_finite() || !outcome.is_finite() || !std::isfinite(scale)) {
        throw Error(ErrorCode::NonFiniteInput, "loss received a non-finite value");
    }
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "loss scale must be positive");
    }
    return std::min(distance(prediction, outcome) / scale, 1.0);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {
    std::uint64_t key = seed;
    std::uint64_t mixed = splitmix64(key) ^ (stream * 0xd1b54a32d192ed03ULL);
    for (auto& word : s_) {
        word = splitmix64(mixed);
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::array<double, 2> Rng::standard_normal_pair() noexcept {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

Vec2 gaussian2(Rng& rng, const Vec2& mean, const Mat2& cov) {
    if (!mean.is_finite()) {
        throw Error(ErrorCode::NonFiniteInput, "gaussian2 mean is not finite");
    }
    if (!is_psd(cov)) {
        throw Error(ErrorCode::InvalidCovariance, "gaussian2 covariance is not symmetric PSD");
    }
    const auto z = rng.standard_normal_pair();
    return mean + cholesky_psd(cov) * Vec2{z[0], z[1]};
}

}  // namespace d2eal
