#include "d2eal/comm_graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace d2eal::comm {

namespace {

Edge normalized(Edge e) {
    if (e.first > e.second) {
        std::swap(e.first, e.second);
    }
    return e;
}

std::vector<std::vector<std::size_t>> adjacency(std::size_t nodes, const std::vector<Edge>& edges) {
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
    }
    return adj;
}

}  // namespace

BaseGraph::BaseGraph(std::size_t nodes, std::vector<Edge> edges) : nodes_(nodes), edges_(std::move(edges)) {
    if (nodes_ == 0) {
        throw Error(ErrorCode::ConfigError, "graph needs at least one node");
    }
    for (Edge& e : edges_) {
        e = normalized(e);
        if (e.first == e.second || e.second >= nodes_) {
            throw Error(ErrorCode::ConfigError,
                        "invalid edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")");
        }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw Error(ErrorCode::ConfigError, "duplicate edge in base graph");
    }

    // Connectivity via union-find.
    std::vector<std::size_t> parent(nodes_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t components = nodes_;
    for (const auto& [a, b] : edges_) {
        const std::size_t ra = find(a);
        const std::size_t rb = find(b);
        if (ra != rb) {
            parent[ra] = rb;
            --components;
        }
    }
    if (components != 1) {
        throw Error(ErrorCode::ConfigError, "base graph must be connected");
    }
}

BaseGraph BaseGraph::path(std::size_t nodes) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        edges.emplace_back(i, i + 1);
    }
    return BaseGraph(nodes, std::move(edges));
}

BaseGraph BaseGraph::ring(std::size_t nodes) {
    if (nodes < 3) {
        return path(nodes);
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < nodes; ++i) {
        edges.emplace_back(i, (i + 1) % nodes);
    }
    return BaseGraph(nodes, std::move(edges));
}

BaseGraph BaseGraph::complete(std::size_t nodes) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = i + 1; j < nodes; ++j) {
            edges.emplace_back(i, j);
        }
    }
    return BaseGraph(nodes, std::move(edges));
}

std::size_t BaseGraph::degree(std::size_t i) const {
    if (i >= nodes_) {
        throw Error(ErrorCode::InvalidArgument, "node index out of range");
    }
    std::size_t d = 1;
    for (const auto& [a, b] : edges_) {
        d += (a == i || b == i) ? 1 : 0;
    }
    return d;
}

CommSnapshot::CommSnapshot(int step, std::size_t nodes, std::vector<Edge> edges, std::size_t dropped)
    : step_(step), edges_(std::move(edges)), neighbors_(adjacency(nodes, edges_)), dropped_(dropped) {}

CommSnapshot CommSnapshot::intact(const BaseGraph& base, int step) {
    return CommSnapshot(step, base.nodes(), base.edges(), 0);
}

std::vector<std::size_t> CommSnapshot::closed_neighborhood(std::size_t i) const {
    const auto& omega = neighbors_.at(i);
    std::vector<std::size_t> lambda(omega.begin(), omega.end());
    lambda.insert(std::upper_bound(lambda.begin(), lambda.end(), i), i);
    return lambda;
}

bool CommSnapshot::connected(std::size_t i, std::size_t j) const {
    const auto& omega = neighbors_.at(i);
    return std::binary_search(omega.begin(), omega.end(), j);
}

CommSnapshot sample_graph(const BaseGraph& base, double drop_prob, int step, Rng& rng) {
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "link drop probability must lie in [0, 1]");
    }
    std::vector<Edge> surviving;
    surviving.reserve(base.edges().size());
    std::size_t dropped = 0;
    for (const Edge& e : base.edges()) {
        if (rng.bernoulli(drop_prob)) {
            ++dropped;
        } else {
            surviving.push_back(e);
        }
    }
    return CommSnapshot(step, base.nodes(), std::move(surviving), dropped);
}

std::size_t degree(const CommSnapshot& snapshot, std::size_t i) {
    return snapshot.neighbors(i).size() + 1;
}

bool neighborhood_shrank_or_kept(const CommSnapshot& before, const CommSnapshot& now, std::size_t i) {
    const auto prev = before.neighbors(i);
    const auto cur = now.neighbors(i);
    return std::includes(prev.begin(), prev.end(), cur.begin(), cur.end());
}

}  // namespace d2eal::comm
