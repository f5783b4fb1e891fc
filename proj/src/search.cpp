#include "ztc/search.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ztc/rng.hpp"

namespace ztc {

namespace {

using nlohmann::json;

// Memoizes per-family (ll, k) pairs; family scores only depend on
// (child, parent set), so moves rescore at most two families.
class FamilyScoreCache {
public:
    explicit FamilyScoreCache(const Dataset& dataset) : dataset_(dataset) {}

    std::pair<double, long long> get(int var, const std::vector<int>& parents) {
        auto key = std::make_pair(var, parents);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::pair<double, long long> value{
            family_loglikelihood(dataset_, var, parents),
            family_parameter_count(dataset_.schema, var, parents)};
        cache_.emplace(std::move(key), value);
        return value;
    }

    double bic_component(int var, const std::vector<int>& parents) {
        auto [ll, k] = get(var, parents);
        return static_cast<double>(k) * log_n() - 2.0 * ll;
    }

    double log_n() const { return std::log(static_cast<double>(dataset_.rows())); }

private:
    const Dataset& dataset_;
    std::map<std::pair<int, std::vector<int>>, std::pair<double, long long>> cache_;
};

std::vector<int> with_parent(const std::vector<int>& parents, int p) {
    std::vector<int> out = parents;
    out.insert(std::lower_bound(out.begin(), out.end(), p), p);
    return out;
}

std::vector<int> without_parent(const std::vector<int>& parents, int p) {
    std::vector<int> out = parents;
    out.erase(std::find(out.begin(), out.end(), p));
    return out;
}

struct Move {
    MoveOp op;
    int src;
    int dst;

    // Tie-break tuple: (src, dst, op).
    bool tie_before(const Move& rhs) const {
        return std::make_tuple(src, dst, static_cast<int>(op)) <
               std::make_tuple(rhs.src, rhs.dst, static_cast<int>(rhs.op));
    }
};

bool contains_edge(const std::vector<std::pair<int, int>>& edges, int u, int v) {
    return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
}

struct Climber {
    const Dataset& dataset;
    const SearchConfig& config;
    FamilyScoreCache& cache;

    bool add_legal(const Dag& dag, int u, int v) const {
        if (u == v || dag.has_edge(u, v) || dag.has_edge(v, u)) return false;
        if (contains_edge(config.forbidden, u, v)) return false;
        if (static_cast<int>(dag.parents(v).size()) >= config.max_parents) return false;
        return !dag.would_create_cycle(u, v);
    }

    bool del_legal(const Dag& dag, int u, int v) const {
        return dag.has_edge(u, v) && !contains_edge(config.required, u, v);
    }

    bool rev_legal(Dag& dag, int u, int v) const {
        if (!dag.has_edge(u, v)) return false;
        if (contains_edge(config.required, u, v)) return false;
        if (contains_edge(config.forbidden, v, u)) return false;
        if (static_cast<int>(dag.parents(u).size()) >= config.max_parents) return false;
        dag.remove_edge(u, v);
        bool ok = !dag.would_create_cycle(v, u);
        dag.add_edge(u, v);
        return ok;
    }

    // Score delta of a move given the current per-family components.
    double delta(const Dag& dag, const Move& m) {
        switch (m.op) {
        case MoveOp::add:
            return cache.bic_component(m.dst, with_parent(dag.parents(m.dst), m.src)) -
                   cache.bic_component(m.dst, dag.parents(m.dst));
        case MoveOp::del:
            return cache.bic_component(m.dst, without_parent(dag.parents(m.dst), m.src)) -
                   cache.bic_component(m.dst, dag.parents(m.dst));
        case MoveOp::rev:
            return cache.bic_component(m.dst, without_parent(dag.parents(m.dst), m.src)) +
                   cache.bic_component(m.src, with_parent(dag.parents(m.src), m.dst)) -
                   cache.bic_component(m.dst, dag.parents(m.dst)) -
                   cache.bic_component(m.src, dag.parents(m.src));
        }
        return 0.0;
    }

    void apply(Dag& dag, const Move& m) const {
        switch (m.op) {
        case MoveOp::add:
            dag.add_edge(m.src, m.dst);
            break;
        case MoveOp::del:
            dag.remove_edge(m.src, m.dst);
            break;
        case MoveOp::rev:
            dag.reverse_edge(m.src, m.dst);
            break;
        }
    }

    double total_bic(const Dag& dag) {
        double bic = 0.0;
        for (int v = 0; v < dag.node_count(); ++v) {
            bic += cache.bic_component(v, dag.parents(v));
        }
        return bic;
    }

    // Greedy descent from `dag`; returns the final BIC and appends accepted
    // moves to `trace`.
    double climb(Dag& dag, std::vector<TraceEntry>& trace) {
        int n = dag.node_count();
        double bic = total_bic(dag);
        for (int iter = 0; iter < config.max_iterations; ++iter) {
            bool have_best = false;
            Move best{MoveOp::add, 0, 0};
            double best_delta = 0.0;
            for (int u = 0; u < n; ++u) {
                for (int v = 0; v < n; ++v) {
                    if (u == v) continue;
                    for (MoveOp op : {MoveOp::add, MoveOp::del, MoveOp::rev}) {
                        Move m{op, u, v};
                        bool legal = op == MoveOp::add   ? add_legal(dag, u, v)
                                     : op == MoveOp::del ? del_legal(dag, u, v)
                                                         : rev_legal(dag, u, v);
                        if (!legal) continue;
                        double d = delta(dag, m);
                        if (d >= 0.0) continue; // strict improvement only
                        if (!have_best || d < best_delta ||
                            (d == best_delta && m.tie_before(best))) {
                            have_best = true;
                            best = m;
                            best_delta = d;
                        }
                    }
                }
            }
            if (!have_best) break;
            apply(dag, best);
            trace.push_back(TraceEntry{iter, best.op, best.src, best.dst, bic, bic + best_delta});
            bic += best_delta;
        }
        return bic;
    }
};

BayesianNetwork assemble_net(const Dataset& dataset, const Dag& dag, const ScoreReport& report,
                             double alpha, const std::string& search_name, int model_version) {
    ModelMetadata meta;
    meta.model_version = model_version;
    meta.trained_rows = report.n;
    meta.alpha = alpha;
    meta.loglikelihood = report.loglikelihood;
    meta.k = report.k;
    meta.bic = report.bic;
    meta.search = search_name;
    return BayesianNetwork(dataset.schema, dag, fit_cpts(dag, dataset, alpha),
                           edge_weights(dag, dataset), std::move(meta));
}

} // namespace

const char* to_string(MoveOp op) {
    switch (op) {
    case MoveOp::add:
        return "add";
    case MoveOp::del:
        return "delete";
    case MoveOp::rev:
        return "reverse";
    }
    return "?";
}

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace) {
    std::string out;
    for (const TraceEntry& e : trace) {
        json line{
            {"iter", e.iter},
            {"op", to_string(e.op)},
            {"edge", json::array({e.src, e.dst})},
            {"bic_before", e.bic_before},
            {"bic_after", e.bic_after},
        };
        out += line.dump();
        out += '\n';
    }
    return out;
}

SearchResult hill_climb(const Dataset& dataset, const SearchConfig& config) {
    if (dataset.rows() < 1) {
        throw ConfigError("cannot learn from an empty dataset");
    }
    if (config.max_parents < 0 || config.alpha < 0.0 || config.max_iterations < 0 ||
        config.random_restarts < 0) {
        throw ConfigError("invalid search configuration");
    }

    int n = static_cast<int>(dataset.schema.size());
    Dag base(n);
    for (const auto& [u, v] : config.required) {
        if (contains_edge(config.forbidden, u, v)) {
            throw ConfigError("edge required and forbidden at once");
        }
        try {
            base.add_edge(u, v);
        } catch (const CycleError&) {
            throw ConfigError("required edges form a cycle");
        }
        if (static_cast<int>(base.parents(v).size()) > config.max_parents) {
            throw ConfigError("required edges exceed max_parents");
        }
    }

    FamilyScoreCache cache(dataset);
    Climber climber{dataset, config, cache};

    bool have_best = false;
    Dag best_dag;
    double best_bic = 0.0;
    std::vector<TraceEntry> best_trace;

    Rng rng = Rng::derive(config.seed, 0xC11Bu);
    constexpr int kPerturbMoves = 4;

    for (int restart = 0; restart <= config.random_restarts; ++restart) {
        Dag dag = base;
        if (restart > 0) {
            // Seeded random legal additions away from the base graph.
            for (int i = 0; i < kPerturbMoves; ++i) {
                std::vector<std::pair<int, int>> candidates;
                for (int u = 0; u < n; ++u) {
                    for (int v = 0; v < n; ++v) {
                        if (u != v && climber.add_legal(dag, u, v)) {
                            candidates.emplace_back(u, v);
                        }
                    }
                }
                if (candidates.empty()) break;
                auto [u, v] =
                    candidates[rng.uniform(static_cast<std::uint32_t>(candidates.size()))];
                dag.add_edge(u, v);
            }
        }
        std::vector<TraceEntry> trace;
        double bic = climber.climb(dag, trace);
        if (!have_best || bic < best_bic) {
            have_best = true;
            best_dag = dag;
            best_bic = bic;
            best_trace = std::move(trace);
        }
    }

    ScoreReport report = bic_score(best_dag, dataset);
    SearchResult result;
    result.report = report;
    result.trace = std::move(best_trace);
    result.net = assemble_net(dataset, best_dag, report, config.alpha, "hill_climb", 1);
    return result;
}

SearchResult exhaustive_search(const Dataset& dataset, double alpha) {
    int n = static_cast<int>(dataset.schema.size());
    if (n > 4) {
        throw ConfigError("exhaustive search is limited to 4 variables, got " +
                          std::to_string(n));
    }
    if (dataset.rows() < 1) {
        throw ConfigError("cannot learn from an empty dataset");
    }

    // Ordered node pairs, one bit each.
    std::vector<std::pair<int, int>> slots;
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (u != v) slots.emplace_back(u, v);
        }
    }

    FamilyScoreCache cache(dataset);
    bool have_best = false;
    double best_bic = 0.0;
    Dag best_dag;
    std::vector<std::pair<int, int>> best_edges;

    std::size_t m = slots.size();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        Dag dag(n);
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            auto [u, v] = slots[i];
            if (dag.has_edge(v, u) || dag.would_create_cycle(u, v)) {
                ok = false;
            } else {
                dag.add_edge(u, v);
            }
        }
        if (!ok) continue;
        double bic = 0.0;
        for (int v = 0; v < n; ++v) {
            bic += cache.bic_component(v, dag.parents(v));
        }
        auto edges = dag.edges();
        if (!have_best || bic < best_bic || (bic == best_bic && edges < best_edges)) {
            have_best = true;
            best_bic = bic;
            best_dag = dag;
            best_edges = std::move(edges);
        }
    }

    ScoreReport report = bic_score(best_dag, dataset);
    SearchResult result;
    result.report = report;
    result.net = assemble_net(dataset, best_dag, report, alpha, "exhaustive", 1);
    return result;
}

std::map<std::pair<int, int>, double> edge_weights(const Dag& dag, const Dataset& dataset) {
    std::map<std::pair<int, int>, double> weights;
    for (const auto& [u, v] : dag.edges()) {
        weights[{u, v}] = pairwise_mutual_information(dataset, u, v);
    }
    return weights;
}

SearchResult train_deployment_model(const Dataset& dataset, const SearchConfig& config,
                                    bool reserve_other, int model_version) {
    SearchResult result = hill_climb(dataset, config);
    if (reserve_other) {
        Dataset extended = dataset.with_other_schema();
        ModelMetadata meta = result.net.metadata();
        meta.model_version = model_version;
        result.net = BayesianNetwork(extended.schema, result.net.dag(),
                                     fit_cpts(result.net.dag(), extended, config.alpha),
                                     result.net.edge_weights(), std::move(meta));
    } else if (model_version != 1) {
        ModelMetadata meta = result.net.metadata();
        meta.model_version = model_version;
        result.net = BayesianNetwork(result.net.schema(), result.net.dag(), result.net.cpts(),
                                     result.net.edge_weights(), std::move(meta));
    }
    return result;
}

} // namespace ztc
