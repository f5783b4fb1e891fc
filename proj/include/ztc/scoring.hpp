#pragma once

#include "ztc/bayesnet.hpp"
#include "ztc/dataset.hpp"

namespace ztc {

// Penalized-likelihood score, bic = k*ln(N) - 2*loglikelihood, lower is
// better. This is the unique standard convention consistent with reporting
// an integer parameter count for published (LL, BIC, N) triples.
struct ScoreReport {
    double loglikelihood = 0.0; // nats
    long long k = 0;            // independent parameters
    long long n = 0;            // rows
    double bic = 0.0;

    bool operator==(const ScoreReport&) const = default;
};

ScoreReport make_score_report(double loglikelihood, long long k, long long n);

// Smoothed maximum-likelihood CPT estimation:
//   entry = (count(x, cfg) + alpha) / (count(cfg) + alpha * |X|).
// alpha = 0 with an unobserved parent configuration is an error (the row
// would be 0/0); use alpha > 0 or prune the structure.
std::vector<Cpt> fit_cpts(const Dag& dag, const Dataset& dataset, double alpha);
Cpt fit_cpt(const Dataset& dataset, int var, const std::vector<int>& parents, double alpha);

// Per-family MLE log-likelihood over observed parent configurations.
double family_loglikelihood(const Dataset& dataset, int var, const std::vector<int>& parents);

// Decomposable total: sum of per-family MLE log-likelihoods. Always <= 0.
double loglikelihood(const Dag& dag, const Dataset& dataset);

// Independent route for the same quantity: fit MLE CPTs, then sum
// ln(joint) over rows. A zero-probability row yields -infinity explicitly.
double loglikelihood_rowwise(const Dag& dag, const Dataset& dataset);

long long family_parameter_count(const Schema& schema, int var, const std::vector<int>& parents);
long long count_parameters(const Dag& dag, const Schema& schema);

// One family's contribution to the BIC: k_f*ln(N) - 2*ll_f.
double family_bic_component(const Dataset& dataset, int var, const std::vector<int>& parents);

ScoreReport bic_score(const Dag& dag, const Dataset& dataset);

// Empirical pairwise mutual information I(a; b) in nats, >= 0.
double pairwise_mutual_information(const Dataset& dataset, int a, int b);

} // namespace ztc
