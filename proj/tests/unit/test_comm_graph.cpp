#include <cmath>
#include <vector>

#include "d2eal/comm_graph.hpp"
#include "doctest.h"

using namespace d2eal;
using namespace d2eal::comm;

TEST_CASE("base graph constructors") {
    const BaseGraph p = BaseGraph::path(6);
    CHECK(p.edges().size() == 5);
    CHECK(p.degree(0) == 2);
    CHECK(p.degree(3) == 3);
    const BaseGraph r = BaseGraph::ring(6);
    CHECK(r.edges().size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(r.degree(i) == 3);
    }
    for (const Edge& e : r.edges()) {
        CHECK(e.first < e.second);
    }
    const BaseGraph c = BaseGraph::complete(5);
    CHECK(c.edges().size() == 10);
    CHECK(c.degree(2) == 5);
    CHECK(BaseGraph::path(1).degree(0) == 1);
    CHECK_THROWS_AS((void)p.degree(6), Error);
}

TEST_CASE("base graph validation") {
    CHECK_THROWS_AS(BaseGraph(3, {{0, 0}, {1, 2}}), Error);
    CHECK_THROWS_AS(BaseGraph(3, {{0, 1}, {1, 0}, {1, 2}}), Error);
    CHECK_THROWS_AS(BaseGraph(3, {{0, 3}, {1, 2}}), Error);
    CHECK_THROWS_AS(BaseGraph(4, {{0, 1}, {2, 3}}), Error);
    CHECK_THROWS_AS(BaseGraph(0, {}), Error);
    CHECK_NOTHROW(BaseGraph(3, {{2, 1}, {1, 0}}));
}

TEST_CASE("snapshot neighbourhoods") {
    const CommSnapshot s = CommSnapshot::intact(BaseGraph::path(4), 7);
    CHECK(s.step() == 7);
    CHECK(s.dropped() == 0);
    CHECK(std::vector<std::size_t>(s.neighbors(1).begin(), s.neighbors(1).end()) ==
          std::vector<std::size_t>{0, 2});
    CHECK(s.closed_neighborhood(1) == std::vector<std::size_t>{0, 1, 2});
    CHECK(s.closed_neighborhood(3) == std::vector<std::size_t>{2, 3});
    CHECK(s.connected(2, 3));
    CHECK_FALSE(s.connected(0, 3));
    CHECK(degree(s, 0) == 2);
}

TEST_CASE("link drops at the probability extremes") {
    const BaseGraph base = BaseGraph::complete(5);
    Rng rng(5, 1);
    const CommSnapshot none = sample_graph(base, 0.0, 1, rng);
    CHECK(none.edges().size() == 10);
    CHECK(none.dropped() == 0);
    const CommSnapshot all = sample_graph(base, 1.0, 2, rng);
    CHECK(all.edges().empty());
    CHECK(all.dropped() == 10);
    CHECK(all.closed_neighborhood(3) == std::vector<std::size_t>{3});
    CHECK_THROWS_AS((void)sample_graph(base, 1.1, 0, rng), Error);
}

TEST_CASE("one uniform per edge whatever the drop probability") {
    const BaseGraph base = BaseGraph::path(6);
    Rng a(11, 1);
    Rng b(11, 1);
    (void)sample_graph(base, 0.0, 0, a);
    (void)sample_graph(base, 0.7, 0, b);
    CHECK(a == b);
}

TEST_CASE("dropped link counts follow the binomial law") {
    const BaseGraph base = BaseGraph::path(6);
    Rng rng(21, 1);
    const int steps = 100000;
    std::vector<double> hist(6, 0.0);
    for (int t = 0; t < steps; ++t) {
        const CommSnapshot s = sample_graph(base, 0.1, t, rng);
        CHECK(s.edges().size() + s.dropped() == 5);
        hist[s.dropped()] += 1.0;
    }
    for (int k = 0; k <= 5; ++k) {
        const double pmf = std::tgamma(6.0) / (std::tgamma(k + 1.0) * std::tgamma(6.0 - k)) * std::pow(0.1, k) *
                           std::pow(0.9, 5 - k);
        const double sd = std::sqrt(pmf * (1 - pmf) / steps);
        CHECK(std::abs(hist[k] / steps - pmf) < 5 * sd + 1e-12);
    }
}

TEST_CASE("neighbourhood shrink predicate") {
    const BaseGraph base = BaseGraph::path(3);
    const CommSnapshot full = CommSnapshot::intact(base);
    const CommSnapshot cut(1, 3, {{0, 1}}, 1);
    CHECK(neighborhood_shrank_or_kept(full, cut, 1));
    CHECK(neighborhood_shrank_or_kept(full, full, 1));
    CHECK_FALSE(neighborhood_shrank_or_kept(cut, full, 1));
    CHECK(neighborhood_shrank_or_kept(cut, full, 0));
}
