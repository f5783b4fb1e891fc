#pragma once

#include <utility>
#include <vector>

#include "ztc/errors.hpp"

namespace ztc {

// Directed acyclic graph over node ids 0..n-1, stored as per-node parent
// sets. Acyclicity is checked on every mutation; no operation can leave the
// graph cyclic.
class Dag {
public:
    Dag() = default;
    explicit Dag(int node_count);

    int node_count() const { return static_cast<int>(parents_.size()); }
    const std::vector<int>& parents(int v) const { return parents_.at(v); }
    bool has_edge(int from, int to) const;
    std::size_t edge_count() const;

    // Edges sorted by (from, to).
    std::vector<std::pair<int, int>> edges() const;

    // True when adding from->to would close a cycle (i.e. to reaches from).
    bool would_create_cycle(int from, int to) const;

    void add_edge(int from, int to);    // CycleError when it would close a cycle
    void remove_edge(int from, int to); // Error when the edge is absent
    void reverse_edge(int from, int to);

    bool operator==(const Dag&) const = default;

private:
    void check_node(int v) const;
    std::vector<std::vector<int>> parents_; // each sorted ascending
};

// Deterministic topological order: every node after all its parents, ties
// broken by smallest node id. Throws CycleError naming one cycle.
std::vector<int> topological_order(const Dag& dag);

} // namespace ztc
