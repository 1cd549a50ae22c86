#include <cmath>
#include <vector>

#include "d2eal/expert.hpp"
#include "doctest.h"

using namespace d2eal;
using namespace d2eal::expert;

TEST_CASE("drift clock has the geometric stationary mean") {
    // Stationary law of s: P(s = k) = p (1 - p)^k, mean (1 - p) / p.
    for (double p : {0.1, 0.3}) {
        Rng rng(99, 5);
        DriftState s{};
        double sum = 0.0;
        double zeros = 0.0;
        const int burn = 1000;
        const int n = 400000;
        for (int k = 0; k < burn + n; ++k) {
            s = advance_drift(s, p, rng);
            if (k >= burn) {
                sum += static_cast<double>(s.steps);
                zeros += s.steps == 0 ? 1.0 : 0.0;
            }
        }
        const double mean = (1.0 - p) / p;
        const double sd = std::sqrt(1.0 - p) / p;
        // Samples are correlated; allow a generous band.
        CHECK(std::abs(sum / n - mean) < 40.0 * sd / std::sqrt(static_cast<double>(n)));
        CHECK(zeros / n == doctest::Approx(p).epsilon(0.03));
    }
}

TEST_CASE("drift clock extremes and validation") {
    Rng rng(1, 0);
    DriftState s{};
    for (int k = 0; k < 10; ++k) {
        s = advance_drift(s, 0.0, rng);
    }
    CHECK(s.steps == 10);
    CHECK(advance_drift(s, 1.0, rng).steps == 0);
    CHECK_THROWS_AS((void)advance_drift(s, 1.5, rng), Error);
    CHECK_THROWS_AS((void)advance_drift(s, -0.1, rng), Error);
}

TEST_CASE("gamma segments are left-closed") {
    const GammaSchedule g({{0.0, {1.0}}, {0.5, {2.0}}}, 10);
    CHECK(g.gamma(0, 0) == 1.0);
    CHECK(g.gamma(4, 0) == 1.0);
    CHECK(g.gamma(5, 0) == 2.0);
    CHECK(g.gamma(10, 0) == 2.0);
    CHECK_THROWS_AS((void)g.gamma(0, 1), Error);
}

TEST_CASE("reference table switches robot 6 at the half horizon") {
    const GammaSchedule g = GammaSchedule::reference_table(1400);
    CHECK(g.robots() == 6);
    CHECK(g.gamma(699, 5) == 0.3);
    CHECK(g.gamma(700, 5) == 0.01);
    CHECK(g.gamma(0, 5) == 0.8);
    CHECK(g.gamma(233, 5) == 0.8);
    CHECK(g.gamma(234, 5) == 0.6);
    CHECK(g.gamma(1400, 0) == 0.8);
    CHECK(g.gamma(1166, 4) == 0.3);
    CHECK(g.gamma(1167, 4) == 0.1);
}

TEST_CASE("gamma schedule validation") {
    using Seg = GammaSchedule::Segment;
    CHECK_THROWS_AS(GammaSchedule({}, 10), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.1, {1.0}}}, 10), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.0, {1.0}}, Seg{0.0, {1.0}}}, 10), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.0, {1.0}}, Seg{0.5, {1.0, 2.0}}}, 10), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.0, {-1.0}}}, 10), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.0, {1.0}}}, 0), Error);
    CHECK_THROWS_AS(GammaSchedule({Seg{0.0, {1.0}}, Seg{1.0, {1.0}}}, 10), Error);
}

TEST_CASE("prediction statistics: biased mean and declared covariance") {
    const GammaSchedule g = GammaSchedule::constant({0.5}, 100);
    const DriftState s{4};
    const Vec2 truth{10, -3};
    Rng rng(3, 1);
    const int n = 100000;
    Vec2 sum{};
    double sxx = 0.0;
    for (int k = 0; k < n; ++k) {
        const ExpertPrediction p = predict(truth, 0, 0, 1, s, g, rng);
        CHECK(p.cov.a == doctest::Approx(25.0));
        sum += p.mean;
        sxx += (p.mean.x - 12.0) * (p.mean.x - 12.0);
    }
    const Vec2 mean = sum * (1.0 / n);
    CHECK(std::abs(mean.x - 12.0) < 5 * 5.0 / std::sqrt(n));
    CHECK(std::abs(mean.y - (-1.0)) < 5 * 5.0 / std::sqrt(n));
    CHECK(sxx / n == doctest::Approx(25.0).epsilon(0.03));
}

TEST_CASE("zero gamma gives the truth exactly") {
    const GammaSchedule g = GammaSchedule::constant({0.0}, 10);
    Rng rng(1, 1);
    const ExpertPrediction p = predict({3, 4}, 0, 2, 1, DriftState{50}, g, rng);
    CHECK(p.mean == Vec2{3, 4});
    CHECK(drift_bias(0.2, DriftState{5}) == Vec2{1.0, 1.0});
}

TEST_CASE("divergence is the largest pairwise distance") {
    std::vector<Vec2> m{{0, 0}, {3, 4}, {1, 1}, {-3, 0}};
    double brute = 0.0;
    for (const Vec2& a : m) {
        for (const Vec2& b : m) {
            brute = std::max(brute, std::hypot(a.x - b.x, a.y - b.y));
        }
    }
    CHECK(expert_divergence_bound(m) == doctest::Approx(brute));
    CHECK(expert_divergence_bound(std::vector<Vec2>{{1, 1}}) == 0.0);
    CHECK(expert_divergence_bound(std::vector<Vec2>{}) == 0.0);
}
