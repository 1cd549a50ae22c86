#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "d2eal/fusion.hpp"
#include "doctest.h"

using namespace d2eal;
using namespace d2eal::fusion;

namespace {

Eigen::Matrix2d to_eigen(const Mat2& m) {
    Eigen::Matrix2d e;
    e << m.a, m.b, m.c, m.d;
    return e;
}

Eigen::Vector2d to_eigen(const Vec2& v) { return {v.x, v.y}; }

Mat2 random_spd(Rng& rng) {
    const double l1 = rng.uniform(0.5, 30.0);
    const double l2 = rng.uniform(0.5, 30.0);
    const double th = rng.uniform(0, kPi);
    const Mat2 r{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
    return r * Mat2::diag(l1, l2) * r.transpose();
}

std::vector<FusionEntry> random_entries(Rng& rng, std::size_t n) {
    std::vector<FusionEntry> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({i, {rng.uniform(-50, 50), rng.uniform(-50, 50)}, random_spd(rng), rng.uniform(0, 10)});
    }
    return out;
}

double min_eig(const Eigen::Matrix2d& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(0.5 * (m + m.transpose())).eigenvalues()(0);
}

// Information form with explicit inverses.
std::pair<Eigen::Vector2d, Eigen::Matrix2d> info_oracle(const std::vector<FusionEntry>& in,
                                                        const std::vector<double>& w) {
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    Eigen::Vector2d vec = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < in.size(); ++k) {
        const Eigen::Matrix2d inv = to_eigen(in[k].cov).inverse();
        info += w[k] * inv;
        vec += w[k] * inv * to_eigen(in[k].mean);
    }
    const Eigen::Matrix2d p = info.inverse();
    return {p * vec, p};
}

}  // namespace

TEST_CASE("kalman and bayes match the explicit-inverse oracle") {
    Rng rng(2, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = random_entries(rng, 1 + trial % 5);
        const auto [m, p] = info_oracle(in, std::vector<double>(in.size(), 1.0));
        const FusedPrediction kf = fuse_kalman(in);
        CHECK((to_eigen(kf.mean) - m).norm() < 1e-9 * (1 + m.norm()));
        CHECK((to_eigen(kf.cov) - p).norm() < 1e-9 * (1 + p.norm()));
        const FusedPrediction bf = fuse_bayes(in);
        CHECK(bf.mean == kf.mean);
        CHECK((to_eigen(bf.cov) - p * static_cast<double>(in.size())).norm() < 1e-9 * (1 + p.norm()));
    }
}

TEST_CASE("ci uses inverse-trace weights on the simplex") {
    Rng rng(3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = random_entries(rng, 1 + trial % 6);
        std::vector<double> w;
        double z = 0;
        for (const auto& e : in) {
            w.push_back(1.0 / e.cov.trace());
            z += w.back();
        }
        for (double& x : w) {
            x /= z;
        }
        const auto got = ci_weights(in);
        double sum = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            CHECK(got[k] == doctest::Approx(w[k]));
            CHECK(got[k] >= 0.0);
            sum += got[k];
        }
        CHECK(sum == doctest::Approx(1.0));
        const auto [m, p] = info_oracle(in, w);
        const FusedPrediction ci = fuse_ci(in);
        CHECK((to_eigen(ci.mean) - m).norm() < 1e-9 * (1 + m.norm()));
        CHECK((to_eigen(ci.cov) - p).norm() < 1e-9 * (1 + p.norm()));
    }
}

TEST_CASE("exact ci never has a larger trace than the heuristic") {
    Rng rng(4, 3);
    FusionOptions exact;
    exact.ci_exact = true;
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_entries(rng, 2 + trial % 4);
        const double heuristic = fuse_ci(in).cov.trace();
        const FusedPrediction e = fuse_ci(in, exact);
        CHECK(e.cov.trace() <= heuristic * (1 + 1e-9));
        // A brute-force scan over the two-member simplex bounds the optimum.
        if (in.size() == 2) {
            double best = 1e300;
            for (int g = 0; g <= 2000; ++g) {
                const double a = g / 2000.0;
                best = std::min(best, info_oracle(in, {a, 1 - a}).second.trace());
            }
            CHECK(e.cov.trace() <= best * (1 + 1e-4));
        }
    }
}

TEST_CASE("union covariance is the joint-basis upper bound") {
    Rng rng(5, 3);
    for (int trial = 0; trial < 300; ++trial) {
        const Mat2 a = random_spd(rng);
        const Mat2 b = random_spd(rng);
        const Mat2 u = union_covariance(a, b);
        const Eigen::Matrix2d ue = to_eigen(u);
        CHECK(min_eig(ue - to_eigen(a)) > -1e-8 * ue.norm());
        CHECK(min_eig(ue - to_eigen(b)) > -1e-8 * ue.norm());
        // Generalized eigenproblem B v = l A v with V^T A V = I.
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(to_eigen(b), to_eigen(a));
        const Eigen::Matrix2d v = ges.eigenvectors();
        const Eigen::Vector2d d = ges.eigenvalues().cwiseMax(1.0);
        const Eigen::Matrix2d vinv = v.inverse();
        const Eigen::Matrix2d oracle = vinv.transpose() * d.asDiagonal() * vinv;
        CHECK((ue - oracle).norm() < 1e-8 * (1 + oracle.norm()));
    }
    CHECK(union_covariance(Mat2::identity(), Mat2::identity()).trace() == doctest::Approx(2.0));
}

TEST_CASE("pairwise cu covers both inputs") {
    Rng rng(6, 3);
    for (bool exact_mean : {false, true}) {
        FusionOptions opt;
        opt.cu_exact_mean = exact_mean;
        for (int trial = 0; trial < 200; ++trial) {
            const auto in = random_entries(rng, 2);
            const FusedPrediction cu = fuse_cu(in, opt);
            for (const FusionEntry& e : in) {
                const Eigen::Vector2d d = to_eigen(cu.mean - e.mean);
                const Eigen::Matrix2d spread = to_eigen(e.cov) + d * d.transpose();
                CHECK(min_eig(to_eigen(cu.cov) - spread) > -1e-9 * (1 + spread.norm()));
            }
        }
    }
}

TEST_CASE("multi-input cu is a left fold of pairwise unions") {
    Rng rng(16, 3);
    for (int trial = 0; trial < 100; ++trial) {
        auto in = random_entries(rng, 3 + trial % 3);
        std::vector<FusionEntry> shuffled(in.rbegin(), in.rend());
        const FusedPrediction cu = fuse_cu(shuffled);
        // Oracle fold in ascending robot order with generalized eigen solves.
        Eigen::Vector2d m = to_eigen(in[0].mean);
        Eigen::Matrix2d c = to_eigen(in[0].cov);
        for (std::size_t k = 1; k < in.size(); ++k) {
            const Eigen::Vector2d m2 = to_eigen(in[k].mean);
            const Eigen::Vector2d u = 0.5 * (m + m2);
            const Eigen::Matrix2d a = c + (u - m) * (u - m).transpose();
            const Eigen::Matrix2d b = to_eigen(in[k].cov) + (u - m2) * (u - m2).transpose();
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(b, a);
            const Eigen::Matrix2d vinv = ges.eigenvectors().inverse();
            c = vinv.transpose() * ges.eigenvalues().cwiseMax(1.0).asDiagonal() * vinv;
            m = u;
            // Each stage dominates both of its operands.
            CHECK(min_eig(c - a) > -1e-9 * (1 + c.norm()));
            CHECK(min_eig(c - b) > -1e-9 * (1 + c.norm()));
        }
        CHECK((to_eigen(cu.mean) - m).norm() < 1e-9 * (1 + m.norm()));
        CHECK((to_eigen(cu.cov) - c).norm() < 1e-8 * (1 + c.norm()));
    }
}

TEST_CASE("cu with two members uses the midpoint by default") {
    const std::vector<FusionEntry> in{{0, {0, 0}, Mat2::identity(), 0}, {1, {2, 0}, Mat2::identity(), 0}};
    const FusedPrediction cu = fuse_cu(in);
    CHECK(cu.mean == Vec2{1, 0});
    CHECK(cu.cov.a == doctest::Approx(2.0));
    CHECK(cu.cov.d == doctest::Approx(1.0));
}

TEST_CASE("covariance strategies are permutation invariant up to rounding") {
    Rng rng(7, 3);
    for (Strategy s : {Strategy::Kalman, Strategy::CovarianceIntersection, Strategy::Bayes,
                       Strategy::CovarianceUnion, Strategy::Mean, Strategy::Median, Strategy::Greedy}) {
        auto in = random_entries(rng, 4);
        const FusedPrediction a = fuse(s, in, 0);
        std::swap(in[0], in[3]);
        std::swap(in[1], in[2]);
        const FusedPrediction b = fuse(s, in, 0);
        CHECK(distance(a.mean, b.mean) < 1e-9 * (1 + a.mean.norm()));
    }
}

TEST_CASE("simple baselines") {
    const std::vector<FusionEntry> in{{0, {1, 9}, Mat2::identity(), 3.0},
                                      {3, {5, 1}, Mat2::identity(), 1.0},
                                      {2, {2, 4}, Mat2::identity(), 1.0},
                                      {1, {8, 2}, Mat2::identity(), 2.0}};
    CHECK(fuse_mean(in).mean == Vec2{4, 4});
    CHECK(fuse_median(in).mean == Vec2{3.5, 3});
    CHECK(fuse_median(std::span(in).first(3)).mean == Vec2{2, 4});
    const FusedPrediction g = fuse_greedy_local(in);
    CHECK(g.chosen == std::size_t{2});
    CHECK(g.mean == Vec2{2, 4});
    CHECK(fuse_nocomm(in, 3).mean == Vec2{5, 1});
    CHECK_THROWS_AS((void)fuse_nocomm(in, 7), Error);
    CHECK_THROWS_AS((void)fuse(Strategy::D2EAL, in, 0), Error);
}

TEST_CASE("singular covariance is regularized and flagged") {
    const std::vector<FusionEntry> in{{0, {0, 0}, Mat2::diag(0.0, 1.0), 0}, {1, {1, 1}, Mat2::identity(), 0}};
    const FusedPrediction kf = fuse_kalman(in);
    CHECK((kf.flags & kFlagRegularizedCovariance) != 0);
    CHECK(kf.mean.is_finite());
    CHECK(kf.cov.is_finite());
    CHECK(std::abs(kf.mean.x) < 1e-6);
    const std::vector<FusionEntry> same{{0, {1, 1}, Mat2::diag(0.0, 1.0), 0}, {1, {1, 1}, Mat2::identity(), 0}};
    const FusedPrediction cu = fuse_cu(same);
    CHECK((cu.flags & kFlagRegularizedCovariance) != 0);
    CHECK(cu.cov.a == doctest::Approx(1.0));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS((void)fuse_mean({}), Error);
    const std::vector<FusionEntry> nan{{0, {NAN, 0}, Mat2::identity(), 0}};
    CHECK_THROWS_AS((void)fuse_kalman(nan), Error);
    const std::vector<FusionEntry> neg{{0, {0, 0}, Mat2::diag(-1, 1), 0}};
    CHECK_THROWS_AS((void)fuse_ci(neg), Error);
}

TEST_CASE("strategy keys round trip") {
    for (Strategy s : all_strategies()) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK(all_strategies().size() == 9);
    CHECK_FALSE(parse_strategy("kalman").has_value());
    CHECK(uses_covariance(Strategy::CovarianceUnion));
    CHECK_FALSE(uses_covariance(Strategy::Median));
}
