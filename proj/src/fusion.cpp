#include "d2eal/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

namespace d2eal::fusion {

namespace {

constexpr std::array<Strategy, 9> kAll{
    Strategy::D2EAL,  Strategy::NoComm, Strategy::Mean, Strategy::Median,          Strategy::Greedy,
    Strategy::Kalman, Strategy::CovarianceIntersection, Strategy::Bayes, Strategy::CovarianceUnion,
};

void validate(std::span<const FusionEntry> input) {
    if (input.empty()) {
        throw Error(ErrorCode::InvalidArgument, "fusion input is empty");
    }
    for (const FusionEntry& e : input) {
        if (!e.mean.is_finite()) {
            throw Error(ErrorCode::NonFiniteInput, "fusion mean is not finite");
        }
        if (!is_psd(e.cov)) {
            throw Error(ErrorCode::InvalidCovariance, "fusion covariance is not symmetric PSD");
        }
        if (!(e.cumulative_loss >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "cumulative loss must be non-negative");
        }
    }
}

Mat2 symmetrized(const Mat2& m) noexcept {
    const double off = 0.5 * (m.b + m.c);
    return {m.a, off, off, m.d};
}

Mat2 regularized(const Mat2& c, double lambda, unsigned& flags) noexcept {
    if (eigen_symmetric(c).values[0] < lambda) {
        flags |= kFlagRegularizedCovariance;
        return c + Mat2::scaled_identity(lambda);
    }
    return c;
}

struct Information {
    Mat2 cov;
    Vec2 mean;
};

/// (sum w_j C_j^-1)^-1 and the matching information-weighted mean.
Information information_fusion(std::span<const FusionEntry> input, std::span<const double> weights,
                               double lambda, unsigned& flags) {
    Mat2 info{};
    Vec2 info_mean{};
    for (std::size_t k = 0; k < input.size(); ++k) {
        const Mat2 inv = regularized(input[k].cov, lambda, flags).inverse();
        info = info + weights[k] * inv;
        info_mean += weights[k] * (inv * input[k].mean);
    }
    const Mat2 cov = symmetrized(info.inverse());
    return {cov, cov * info_mean};
}

double fused_trace(std::span<const FusionEntry> input, std::span<const double> weights, double lambda) {
    unsigned ignored = 0;
    return information_fusion(input, weights, lambda, ignored).cov.trace();
}

/// Minimize f on [lo, hi] by golden-section search.
double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // Endpoints can be optimal; keep whichever of the three is lowest.
    double best = mid;
    double best_val = f(mid);
    for (double edge : {lo, hi}) {
        const double v = f(edge);
        if (v < best_val) {
            best_val = v;
            best = edge;
        }
    }
    return best;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::D2EAL: return "d2eal";
        case Strategy::NoComm: return "nocomm";
        case Strategy::Mean: return "mean";
        case Strategy::Median: return "median";
        case Strategy::Greedy: return "greedy";
        case Strategy::Kalman: return "kf";
        case Strategy::CovarianceIntersection: return "ci";
        case Strategy::Bayes: return "bf";
        case Strategy::CovarianceUnion: return "cu";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view key) noexcept {
    for (Strategy s : kAll) {
        if (to_string(s) == key) {
            return s;
        }
    }
    return std::nullopt;
}

std::span<const Strategy> all_strategies() noexcept { return kAll; }

bool uses_covariance(Strategy s) noexcept {
    return s == Strategy::Kalman || s == Strategy::CovarianceIntersection || s == Strategy::Bayes ||
           s == Strategy::CovarianceUnion;
}

FusedPrediction fuse_nocomm(std::span<const FusionEntry> input, std::size_t self) {
    validate(input);
    for (const FusionEntry& e : input) {
        if (e.robot == self) {
            return {e.mean, e.cov, e.robot, 0};
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no-communication fusion needs the robot's own entry");
}

FusedPrediction fuse_mean(std::span<const FusionEntry> input) {
    validate(input);
    Vec2 sum{};
    for (const FusionEntry& e : input) {
        sum += e.mean;
    }
    return {sum * (1.0 / static_cast<double>(input.size())), Mat2::identity(), std::nullopt, 0};
}

FusedPrediction fuse_median(std::span<const FusionEntry> input) {
    validate(input);
    auto median_of = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    std::vector<double> xs;
    std::vector<double> ys;
    for (const FusionEntry& e : input) {
        xs.push_back(e.mean.x);
        ys.push_back(e.mean.y);
    }
    return {{median_of(std::move(xs)), median_of(std::move(ys))}, Mat2::identity(), std::nullopt, 0};
}

FusedPrediction fuse_greedy_local(std::span<const FusionEntry> input) {
    validate(input);
    const FusionEntry* best = &input.front();
    for (const FusionEntry& e : input) {
        if (e.cumulative_loss < best->cumulative_loss ||
            (e.cumulative_loss == best->cumulative_loss && e.robot < best->robot)) {
            best = &e;
        }
    }
    return {best->mean, Mat2::identity(), best->robot, 0};
}

FusedPrediction fuse_kalman(std::span<const FusionEntry> input, const FusionOptions& options) {
    validate(input);
    FusedPrediction out;
    const std::vector<double> ones(input.size(), 1.0);
    const Information fused = information_fusion(input, ones, options.regularization, out.flags);
    out.mean = fused.mean;
    out.cov = fused.cov;
    return out;
}

std::vector<double> ci_weights(std::span<const FusionEntry> input, const FusionOptions& options) {
    validate(input);
    const std::size_t n = input.size();
    std::vector<double> w(n);
    unsigned ignored = 0;
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = 1.0 / regularized(input[k].cov, options.regularization, ignored).trace();
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) {
        v /= total;
    }
    if (!options.ci_exact || n == 1) {
        return w;
    }

    const double lambda = options.regularization;
    if (n == 2) {
        const double omega = golden_section(
            [&](double s) {
                const std::array<double, 2> trial{s, 1.0 - s};
                return fused_trace(input, trial, lambda);
            },
            0.0, 1.0, options.ci_tolerance);
        return {omega, 1.0 - omega};
    }

    // Coordinate descent: move mass between one member and the rest.
    double current = fused_trace(input, w, lambda);
    for (int iter = 0; iter < options.ci_iterations; ++iter) {
        const double before = current;
        for (std::size_t j = 0; j < n; ++j) {
            const std::vector<double> base = w;
            const double rest = 1.0 - base[j];
            auto reshaped = [&](double s) {
                std::vector<double> trial(n);
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == j) {
                        trial[k] = s;
                    } else {
                        trial[k] = rest > 0.0 ? (1.0 - s) * base[k] / rest
                                              : (1.0 - s) / static_cast<double>(n - 1);
                    }
                }
                return trial;
            };
            const double s = golden_section(
                [&](double v) { return fused_trace(input, reshaped(v), lambda); }, 0.0, 1.0, options.ci_tolerance);
            const std::vector<double> candidate = reshaped(s);
            const double value = fused_trace(input, candidate, lambda);
            if (value < current) {
                w = candidate;
                current = value;
            }
        }
        if (before - current < options.ci_tolerance) {
            break;
        }
    }
    return w;
}

FusedPrediction fuse_ci(std::span<const FusionEntry> input, const FusionOptions& options) {
    const std::vector<double> w = ci_weights(input, options);
    FusedPrediction out;
    const Information fused = information_fusion(input, w, options.regularization, out.flags);
    out.mean = fused.mean;
    out.cov = fused.cov;
    return out;
}

FusedPrediction fuse_bayes(std::span<const FusionEntry> input, const FusionOptions& options) {
    FusedPrediction out = fuse_kalman(input, options);
    out.cov = out.cov * static_cast<double>(input.size());
    return out;
}

Mat2 union_covariance(const Mat2& a, const Mat2& b, double regularization, unsigned* flags) {
    unsigned local = 0;
    const Mat2 base = regularized(symmetrized(a), regularization, local);
    if (flags != nullptr) {
        *flags |= local;
    }
    const Mat2 l = cholesky_psd(base);
    const Mat2 l_inv = l.inverse();
    const Mat2 m = symmetrized(l_inv * symmetrized(b) * l_inv.transpose());
    const SymEigen eig = eigen_symmetric(m);
    Mat2 widened{};
    for (int k = 0; k < 2; ++k) {
        widened = widened + std::max(eig.values[k], 1.0) * Mat2::outer(eig.vectors[k], eig.vectors[k]);
    }
    return symmetrized(l * widened * l.transpose());
}

Mat2 union_about(const Vec2& u, const Vec2& m1, const Mat2& c1, const Vec2& m2, const Mat2& c2,
                 double regularization, unsigned* flags) {
    const Vec2 d1 = u - m1;
    const Vec2 d2 = u - m2;
    return union_covariance(c1 + Mat2::outer(d1, d1), c2 + Mat2::outer(d2, d2), regularization, flags);
}

FusedPrediction fuse_cu(std::span<const FusionEntry> input, const FusionOptions& options) {
    validate(input);
    std::vector<const FusionEntry*> order;
    for (const FusionEntry& e : input) {
        order.push_back(&e);
    }
    std::sort(order.begin(), order.end(),
              [](const FusionEntry* x, const FusionEntry* y) { return x->robot < y->robot; });

    FusedPrediction out{order.front()->mean, symmetrized(order.front()->cov), std::nullopt, 0};
    for (std::size_t k = 1; k < order.size(); ++k) {
        const Vec2 m1 = out.mean;
        const Mat2 c1 = out.cov;
        const Vec2 m2 = order[k]->mean;
        const Mat2 c2 = order[k]->cov;
        Vec2 u = 0.5 * (m1 + m2);
        if (options.cu_exact_mean) {
            const int points = std::max(options.cu_grid_points, 2);
            double best = std::numeric_limits<double>::infinity();
            for (int g = 0; g < points; ++g) {
                const double s = static_cast<double>(g) / static_cast<double>(points - 1);
                const Vec2 candidate = m1 + s * (m2 - m1);
                const double tr = union_about(candidate, m1, c1, m2, c2, options.regularization).trace();
                if (tr < best) {
                    best = tr;
                    u = candidate;
                }
            }
        }
        out.cov = union_about(u, m1, c1, m2, c2, options.regularization, &out.flags);
        out.mean = u;
    }
    return out;
}

FusedPrediction fuse(Strategy strategy, std::span<const FusionEntry> input, std::size_t self,
                     const FusionOptions& options) {
    switch (strategy) {
        case Strategy::NoComm: return fuse_nocomm(input, self);
        case Strategy::Mean: return fuse_mean(input);
        case Strategy::Median: return fuse_median(input);
        case Strategy::Greedy: return fuse_greedy_local(input);
        case Strategy::Kalman: return fuse_kalman(input, options);
        case Strategy::CovarianceIntersection: return fuse_ci(input, options);
        case Strategy::Bayes: return fuse_bayes(input, options);
        case Strategy::CovarianceUnion: return fuse_cu(input, options);
        case Strategy::D2EAL: break;
    }
    throw Error(ErrorCode::InvalidArgument, "d2eal is not a stateless fusion rule; use engine::Network");
}

}  // namespace d2eal::fusion
