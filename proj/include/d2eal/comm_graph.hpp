// Time-varying undirected topology: a connected base graph with i.i.d.
// per-step link drops.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "d2eal/geometry.hpp"

namespace d2eal::comm {

using Edge = std::pair<std::size_t, std::size_t>;  ///< stored with first < second

class BaseGraph {
public:
    /// Throws ConfigError on self loops, duplicate or out-of-range edges, or
    /// a disconnected graph.
    BaseGraph(std::size_t nodes, std::vector<Edge> edges);

    [[nodiscard]] static BaseGraph path(std::size_t nodes);
    [[nodiscard]] static BaseGraph ring(std::size_t nodes);
    [[nodiscard]] static BaseGraph complete(std::size_t nodes);

    [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    /// |Lambda_i| with every base edge present.
    [[nodiscard]] std::size_t degree(std::size_t i) const;

private:
    std::size_t nodes_;
    std::vector<Edge> edges_;
};

class CommSnapshot {
public:
    CommSnapshot(int step, std::size_t nodes, std::vector<Edge> edges, std::size_t dropped);

    /// Snapshot with every base edge intact.
    [[nodiscard]] static CommSnapshot intact(const BaseGraph& base, int step = 0);

    [[nodiscard]] int step() const noexcept { return step_; }
    [[nodiscard]] std::size_t nodes() const noexcept { return neighbors_.size(); }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] std::size_t dropped() const noexcept { return dropped_; }
    /// Omega_i, ascending, never containing i.
    [[nodiscard]] std::span<const std::size_t> neighbors(std::size_t i) const { return neighbors_.at(i); }
    /// Lambda_i = Omega_i u {i}, ascending.
    [[nodiscard]] std::vector<std::size_t> closed_neighborhood(std::size_t i) const;
    [[nodiscard]] bool connected(std::size_t i, std::size_t j) const;

private:
    int step_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::size_t dropped_;
};

/// Every base edge survives independently with probability 1 - drop_prob.
/// One uniform is drawn per base edge regardless of drop_prob.
[[nodiscard]] CommSnapshot sample_graph(const BaseGraph& base, double drop_prob, int step, Rng& rng);

/// |Lambda_i(t)|: the node itself counts.
[[nodiscard]] std::size_t degree(const CommSnapshot& snapshot, std::size_t i);

/// Omega_i(now) is contained in Omega_i(before).
[[nodiscard]] bool neighborhood_shrank_or_kept(const CommSnapshot& before, const CommSnapshot& now, std::size_t i);

}  // namespace d2eal::comm
