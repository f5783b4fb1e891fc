#include "ztc/dag.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace ztc {

Dag::Dag(int node_count) {
    if (node_count < 0) {
        throw ConfigError("dag node count must be >= 0");
    }
    parents_.resize(static_cast<std::size_t>(node_count));
}

void Dag::check_node(int v) const {
    if (v < 0 || v >= node_count()) {
        throw ConfigError("node id " + std::to_string(v) + " out of range");
    }
}

bool Dag::has_edge(int from, int to) const {
    check_node(from);
    check_node(to);
    const auto& ps = parents_[static_cast<std::size_t>(to)];
    return std::binary_search(ps.begin(), ps.end(), from);
}

std::size_t Dag::edge_count() const {
    std::size_t n = 0;
    for (const auto& ps : parents_) n += ps.size();
    return n;
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> es;
    es.reserve(edge_count());
    for (int v = 0; v < node_count(); ++v) {
        for (int p : parents_[static_cast<std::size_t>(v)]) {
            es.emplace_back(p, v);
        }
    }
    std::sort(es.begin(), es.end());
    return es;
}

bool Dag::would_create_cycle(int from, int to) const {
    check_node(from);
    check_node(to);
    if (from == to) return true;
    // A cycle closes iff `from` is reachable from `to` along child->...
    // equivalently iff `to` is an ancestor chain start: walk ancestors of
    // `from` looking for `to`... we store parents, so walk ancestors of
    // `from`; from->to closes a cycle iff to reaches from, i.e. to is an
    // ancestor of from.
    std::vector<char> seen(static_cast<std::size_t>(node_count()), 0);
    std::queue<int> q;
    q.push(from);
    seen[static_cast<std::size_t>(from)] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        if (v == to) return true;
        for (int p : parents_[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(p)]) {
                seen[static_cast<std::size_t>(p)] = 1;
                q.push(p);
            }
        }
    }
    return false;
}

void Dag::add_edge(int from, int to) {
    check_node(from);
    check_node(to);
    if (from == to) {
        throw CycleError("cycle: " + std::to_string(from) + " -> " + std::to_string(to));
    }
    auto& ps = parents_[static_cast<std::size_t>(to)];
    if (std::binary_search(ps.begin(), ps.end(), from)) {
        throw Error("duplicate edge " + std::to_string(from) + " -> " + std::to_string(to));
    }
    if (would_create_cycle(from, to)) {
        // Name one cycle: from -> to -> ... -> from via the ancestor chain.
        std::string msg = "cycle: " + std::to_string(from) + " -> " + std::to_string(to);
        // Recover a parent path to..from by DFS over ancestors of `from`.
        std::vector<int> stack{from};
        std::vector<int> prev(static_cast<std::size_t>(node_count()), -1);
        std::vector<char> seen(static_cast<std::size_t>(node_count()), 0);
        seen[static_cast<std::size_t>(from)] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (v == to) break;
            for (int p : parents_[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(p)]) {
                    seen[static_cast<std::size_t>(p)] = 1;
                    prev[static_cast<std::size_t>(p)] = v;
                    stack.push_back(p);
                }
            }
        }
        for (int v = prev[static_cast<std::size_t>(to)]; v != -1;
             v = prev[static_cast<std::size_t>(v)]) {
            msg += " -> " + std::to_string(v);
        }
        throw CycleError(msg);
    }
    ps.insert(std::lower_bound(ps.begin(), ps.end(), from), from);
}

void Dag::remove_edge(int from, int to) {
    check_node(from);
    check_node(to);
    auto& ps = parents_[static_cast<std::size_t>(to)];
    auto it = std::lower_bound(ps.begin(), ps.end(), from);
    if (it == ps.end() || *it != from) {
        throw Error("edge " + std::to_string(from) + " -> " + std::to_string(to) +
                    " does not exist");
    }
    ps.erase(it);
}

void Dag::reverse_edge(int from, int to) {
    remove_edge(from, to);
    try {
        add_edge(to, from);
    } catch (...) {
        add_edge(from, to); // restore
        throw;
    }
}

std::vector<int> topological_order(const Dag& dag) {
    int n = dag.node_count();
    std::vector<int> remaining_parents(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        remaining_parents[static_cast<std::size_t>(v)] =
            static_cast<int>(dag.parents(v).size());
        for (int p : dag.parents(v)) {
            children[static_cast<std::size_t>(p)].push_back(v);
        }
    }

    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < n; ++v) {
        if (remaining_parents[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int c : children[static_cast<std::size_t>(v)]) {
            if (--remaining_parents[static_cast<std::size_t>(c)] == 0) ready.push(c);
        }
    }

    if (static_cast<int>(order.size()) != n) {
        // Find one cycle among the leftover nodes by walking parents.
        std::vector<char> in_order(static_cast<std::size_t>(n), 0);
        for (int v : order) in_order[static_cast<std::size_t>(v)] = 1;
        int start = 0;
        while (in_order[static_cast<std::size_t>(start)]) ++start;
        std::vector<int> path;
        std::vector<int> pos(static_cast<std::size_t>(n), -1);
        int v = start;
        while (pos[static_cast<std::size_t>(v)] < 0) {
            pos[static_cast<std::size_t>(v)] = static_cast<int>(path.size());
            path.push_back(v);
            for (int p : dag.parents(v)) {
                if (!in_order[static_cast<std::size_t>(p)]) {
                    v = p;
                    break;
                }
            }
        }
        std::string msg = "cycle:";
        for (std::size_t i = static_cast<std::size_t>(pos[static_cast<std::size_t>(v)]);
             i < path.size(); ++i) {
            msg += " " + std::to_string(path[i]) + " ->";
        }
        msg += " " + std::to_string(v);
        throw CycleError(msg);
    }
    return order;
}

} // namespace ztc
