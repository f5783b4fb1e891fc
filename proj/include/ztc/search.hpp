#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ztc/scoring.hpp"

namespace ztc {

struct SearchConfig {
    int max_parents = 3;
    int max_iterations = 200; // accepted moves per climb
    int random_restarts = 0;
    std::uint64_t seed = 0;
    double alpha = 1.0; // smoothing for the shipped CPTs; scoring always uses MLE
    std::vector<std::pair<int, int>> forbidden;
    std::vector<std::pair<int, int>> required;
};

// Tie-break order for equal-scoring moves: (src, dst, op) with add < del < rev.
enum class MoveOp { add = 0, del = 1, rev = 2 };

const char* to_string(MoveOp op);

struct TraceEntry {
    int iter = 0;
    MoveOp op = MoveOp::add;
    int src = 0;
    int dst = 0;
    double bic_before = 0.0;
    double bic_after = 0.0;
};

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace);

struct SearchResult {
    BayesianNetwork net;
    ScoreReport report;
    std::vector<TraceEntry> trace;
};

// Greedy BIC hill climbing over {add, delete, reverse} from the empty graph
// (plus required edges). Each step applies the single legal move that most
// lowers the BIC; deterministic for a fixed seed. Restarts perturb the start
// graph with seeded random legal additions and keep the best final score.
SearchResult hill_climb(const Dataset& dataset, const SearchConfig& config);

// Scores every DAG over the schema (<= 4 variables, 543 DAGs on 4 nodes)
// and returns the minimum-BIC one; ties go to the lexicographically
// smallest edge set. Test oracle for hill_climb.
SearchResult exhaustive_search(const Dataset& dataset, double alpha = 1.0);

// Pairwise mutual information per dag edge.
std::map<std::pair<int, int>, double> edge_weights(const Dag& dag, const Dataset& dataset);

// hill_climb, then refit the shipped CPTs over a schema extended with the
// reserved other category so the model can score never-seen values.
// Structure search and the reported score always use the observed schema.
SearchResult train_deployment_model(const Dataset& dataset, const SearchConfig& config,
                                    bool reserve_other = true, int model_version = 1);

} // namespace ztc
