#include <cmath>
#include <vector>

#include "d2eal/engine.hpp"
#include "doctest.h"

using namespace d2eal;
using namespace d2eal::engine;

namespace {

// Independent re-implementation in the log domain: every weight is a log value,
// the mixing coefficient is a logistic of the log ratio and the fusion weights
// are a softmax over the neighbourhood.
struct Oracle {
    struct A {
        double la{0}, lap{0}, lw{0};
        Vec2 expert_prev, social_mixed_prev, social_prev, social_tau_prev, ind1;
        bool started{false};
    };
    std::vector<A> agents;
    double eta_a, eta_w, scale;
    int period;

    Oracle(std::size_t n, const LearningConfig& c)
        : agents(n), eta_a(c.eta_alpha), eta_w(c.eta_w), scale(c.loss_scale), period(c.reset_period) {}

    static double l(const Vec2& p, const Vec2& y, double s) {
        return std::min(std::hypot(p.x - y.x, p.y - y.y) / s, 1.0);
    }

    std::vector<Vec2> step(int t, const std::vector<Vec2>& e1, const std::vector<Vec2>& etau, const Vec2& y,
                           const std::vector<std::vector<std::size_t>>& lambda, std::vector<Vec2>& tau_out) {
        const std::size_t n = agents.size();
        std::vector<Vec2> ind1(n), indt(n);
        for (std::size_t i = 0; i < n; ++i) {
            A& a = agents[i];
            if (t > 0) {
                a.la -= eta_a * l(a.expert_prev, y, scale);
                a.lap -= eta_a * l(a.social_mixed_prev, y, scale);
                a.lw -= eta_w * l(a.ind1, y, scale);
                if (period > 0 && t % period == 0) {
                    a.la = a.lap = a.lw = 0;
                }
            }
            if (!a.started) {
                a.social_prev = e1[i];
                a.social_tau_prev = etau[i];
                a.started = true;
            }
            const double alpha = 1.0 / (1.0 + std::exp(a.lap - a.la));
            ind1[i] = alpha * e1[i] + (1 - alpha) * a.social_prev;
            indt[i] = alpha * etau[i] + (1 - alpha) * a.social_tau_prev;
            a.expert_prev = e1[i];
            a.social_mixed_prev = a.social_prev;
            a.ind1 = ind1[i];
        }
        std::vector<Vec2> social(n);
        tau_out.assign(n, {});
        for (std::size_t i = 0; i < n; ++i) {
            double top = -1e300;
            for (std::size_t j : lambda[i]) {
                top = std::max(top, agents[j].lw);
            }
            double z = 0;
            for (std::size_t j : lambda[i]) {
                z += std::exp(agents[j].lw - top);
            }
            for (std::size_t j : lambda[i]) {
                const double w = std::exp(agents[j].lw - top) / z;
                social[i] += w * ind1[j];
                tau_out[i] += w * indt[j];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            agents[i].social_prev = social[i];
            agents[i].social_tau_prev = tau_out[i];
        }
        return social;
    }
};

}  // namespace

TEST_CASE("network matches the log-domain oracle on random inputs") {
    LearningConfig cfg;
    cfg.reset_period = 50;
    const std::size_t n = 5;
    const comm::BaseGraph base = comm::BaseGraph::ring(n);
    Network net(n, cfg);
    Oracle oracle(n, cfg);
    Rng rng(4, 4);
    for (int t = 0; t <= 180; ++t) {
        const Vec2 y{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        std::vector<Vec2> e1(n), et(n);
        for (std::size_t i = 0; i < n; ++i) {
            e1[i] = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
            et[i] = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
        }
        const comm::CommSnapshot snap = comm::sample_graph(base, 0.3, t, rng);
        std::vector<std::vector<std::size_t>> lambda(n);
        for (std::size_t i = 0; i < n; ++i) {
            lambda[i] = snap.closed_neighborhood(i);
        }
        std::vector<Vec2> tau;
        const std::vector<Vec2> expect = oracle.step(t, e1, et, y, lambda, tau);
        const auto rec = net.step(t, e1, et, t > 0 ? std::optional<Vec2>(y) : std::nullopt, snap);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(distance(rec[i].social.one_step, expect[i]) < 1e-9);
            CHECK(distance(rec[i].social.tau_step, tau[i]) < 1e-9);
            CHECK(rec[i].neighborhood == lambda[i]);
            double sum = 0;
            for (const auto& [j, w] : rec[i].social.weights) {
                CHECK(w >= 0.0);
                sum += w;
            }
            CHECK(sum == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("hand trace of two agents over two steps") {
    LearningConfig cfg;
    cfg.eta_alpha = 1.0;
    cfg.eta_w = 1.0;
    cfg.loss_scale = 10.0;
    const comm::BaseGraph base = comm::BaseGraph::path(2);
    const comm::CommSnapshot snap = comm::CommSnapshot::intact(base);
    Network net(2, cfg);
    // t = 0: alpha 0.5, previous social initialised to the expert, so the
    // individual equals the expert; equal weights average them.
    const std::vector<Vec2> e0{{0, 0}, {10, 0}};
    auto r0 = net.step(0, e0, e0, std::nullopt, snap);
    CHECK(r0[0].social.one_step == Vec2{5, 0});
    CHECK(r0[1].social.one_step == Vec2{5, 0});
    // t = 1, y = (0, 0): agent 0 losses: expert 0, persistence l((0,0)) = 0,
    // individual 0. Agent 1: expert 1, persistence 1, individual 1.
    const std::vector<Vec2> e1{{2, 0}, {4, 0}};
    auto r1 = net.step(1, e1, e1, Vec2{0, 0}, snap);
    CHECK(r1[0].losses->expert == 0.0);
    CHECK(r1[1].losses->individual == 1.0);
    CHECK(r1[0].alpha == doctest::Approx(0.5));
    // w_11 = e^-1, w_00 = 1.
    const double w0 = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(r1[0].social.weights[0].second == doctest::Approx(w0));
    // Agent 0 individual: 0.5 * (2,0) + 0.5 * (5,0) = (3.5,0); agent 1:
    // 0.5 * (4,0) + 0.5 * (5,0) = (4.5,0).
    CHECK(r1[0].individual_1.x == doctest::Approx(3.5));
    CHECK(r1[1].individual_1.x == doctest::Approx(4.5));
    CHECK(r1[0].social.one_step.x == doctest::Approx(w0 * 3.5 + (1 - w0) * 4.5));
    // Agent 0's persistence loss at t=2 uses f^_0 = (5,0).
    auto r2 = net.step(2, e1, e1, Vec2{5, 0}, snap);
    CHECK(r2[0].losses->persistence == 0.0);
    CHECK(r2[0].losses->expert == doctest::Approx(0.3));
}

TEST_CASE("self weight has the closed form exp(-eta * cumulative loss)") {
    LearningConfig cfg;
    cfg.reset_period = 0;
    cfg.delta = 0.0;
    Network net(3, cfg);
    const comm::CommSnapshot snap = comm::CommSnapshot::intact(comm::BaseGraph::complete(3));
    Rng rng(8, 0);
    std::vector<double> cum(3, 0.0);
    for (int t = 0; t <= 200; ++t) {
        std::vector<Vec2> e(3);
        for (auto& v : e) {
            v = {rng.uniform(-30, 30), rng.uniform(-30, 30)};
        }
        const auto r = net.step(t, e, e, t > 0 ? std::optional<Vec2>(Vec2{}) : std::nullopt, snap);
        for (std::size_t i = 0; i < 3; ++i) {
            if (r[i].losses) {
                cum[i] += r[i].losses->individual;
            }
            CHECK(r[i].weights.w_hat_self == doctest::Approx(std::exp(-cfg.eta_w * cum[i])).epsilon(1e-9));
        }
    }
}

TEST_CASE("periodic reset and normalization") {
    AgentWeights w;
    w.alpha_hat = 0.1;
    w.nrmcnt = 3;
    CHECK(periodic_reset(w, 200, 200) == AgentWeights{});
    CHECK(periodic_reset(w, 0, 200) == w);
    CHECK(periodic_reset(w, 199, 200) == w);
    CHECK(periodic_reset(w, 400, 0) == w);

    AgentWeights small;
    small.w_hat_self = 1e-5;
    small.alpha_hat_prime = 1e-4;
    const NormalizeResult r = normalize_weights(small, 1e-4);
    CHECK(r.rescaled);
    CHECK(r.weights.w_hat_self == doctest::Approx(0.1));
    CHECK(r.weights.nrmcnt == 1);
    CHECK(r.weights.alpha_hat_prime == doctest::Approx(1.0));
    CHECK(r.weights.alpha_prime_count == 1);
    CHECK(r.weights.alpha_count == 0);
    CHECK_FALSE(normalize_weights(AgentWeights{}, 1e-4).rescaled);
    CHECK_FALSE(normalize_weights(small, 0.0).rescaled);
}

TEST_CASE("mixing alpha reconciles private counters") {
    AgentWeights w;
    w.alpha_hat = 0.5;
    w.alpha_hat_prime = 0.5;
    w.alpha_count = 1;
    // True alpha_hat = 0.5 * 1e-3, alpha_hat' = 0.5.
    CHECK(mixing_alpha(w, 1e-3) == doctest::Approx(1e-3 / (1 + 1e-3)));
    w.alpha_count = 0;
    w.alpha_prime_count = 1;
    CHECK(mixing_alpha(w, 1e-3) == doctest::Approx(1 / (1 + 1e-3)));
    w.alpha_prime_count = 0;
    w.alpha_count = 5;
    CHECK(mixing_alpha(w, 1e-300) == 0.0);
}

TEST_CASE("counter exclusion and weight collapse") {
    const std::vector<std::int64_t> c{2, 1, 1, 3};
    CHECK(excluded_by_counter(c) == std::vector<bool>{true, false, false, true});
    Message own{0, {0, 0}, {0, 0}, 0.9, 1};
    const std::vector<Message> inbox{{1, {10, 0}, {10, 0}, 0.2, 0}, {2, {20, 0}, {20, 0}, 0.2, 0}};
    const SocialResult r = social_predict(own, inbox);
    CHECK(r.weights[0].second == 0.0);
    CHECK(r.one_step.x == doctest::Approx(15.0));
    CHECK(r.flags == 0);

    Message zero{0, {0, 0}, {0, 0}, 0.0, 0};
    const std::vector<Message> zeros{{1, {4, 0}, {4, 0}, 0.0, 0}};
    const SocialResult c2 = social_predict(zero, zeros);
    CHECK(c2.flags == kFlagWeightCollapse);
    CHECK(c2.one_step.x == doctest::Approx(2.0));
    const std::vector<Message> dup{{0, {4, 0}, {4, 0}, 1.0, 0}};
    CHECK_THROWS_AS((void)social_predict(zero, dup), Error);
}

TEST_CASE("fusion is invariant to inbox order") {
    Message own{2, {1, 1}, {2, 2}, 0.3, 0};
    std::vector<Message> inbox{{0, {5, 0}, {1, 0}, 0.7, 0}, {4, {0, 9}, {0, 3}, 0.1, 0}, {1, {-2, 3}, {1, 1}, 0.5, 0}};
    const SocialResult a = social_predict(own, inbox);
    std::swap(inbox[0], inbox[2]);
    const SocialResult b = social_predict(own, inbox);
    CHECK(a.one_step == b.one_step);
    CHECK(a.tau_step == b.tau_step);
    CHECK(a.weights == b.weights);
}

TEST_CASE("two symmetric agents keep equal weights") {
    Network net(2, LearningConfig{});
    const comm::CommSnapshot snap = comm::CommSnapshot::intact(comm::BaseGraph::path(2));
    for (int t = 0; t <= 100; ++t) {
        const std::vector<Vec2> e{{1, 0}, {-1, 0}};
        const auto r = net.step(t, e, e, t > 0 ? std::optional<Vec2>(Vec2{0, 1}) : std::nullopt, snap);
        CHECK(r[0].social.weights[0].second == doctest::Approx(0.5));
        CHECK(r[1].social.weights[1].second == doctest::Approx(0.5));
    }
}

TEST_CASE("an isolated agent mixes its own expert with its own history") {
    Network net(1, LearningConfig{});
    const comm::CommSnapshot snap = comm::CommSnapshot::intact(comm::BaseGraph::path(1));
    const auto r0 = net.step(0, std::vector<Vec2>{{3, 3}}, std::vector<Vec2>{{3, 3}}, std::nullopt, snap);
    CHECK(r0[0].social.one_step == Vec2{3, 3});
    CHECK(r0[0].social.weights.size() == 1);
    CHECK(r0[0].social.weights[0].second == 1.0);
}

TEST_CASE("learning config validation") {
    LearningConfig c;
    c.eta_w = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.reset_period = -1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.delta = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(Network(0, LearningConfig{}), Error);
}
