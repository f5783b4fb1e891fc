#include "ztc/scoring.hpp"

#include <cmath>
#include <limits>

namespace ztc {

namespace {

// Cap on the dense count table for one family; max_parents and the small
// schemas used here keep real sizes far below this.
constexpr std::size_t kMaxFamilyCells = 50'000'000;

struct FamilyCounts {
    std::size_t configs = 1;
    std::size_t width = 0;
    std::vector<long long> cells;  // configs x width
    std::vector<long long> totals; // per config
};

FamilyCounts count_family(const Dataset& dataset, int var, const std::vector<int>& parents) {
    const Schema& schema = dataset.schema;
    FamilyCounts fc;
    fc.width = schema.cardinality(var);
    for (int p : parents) {
        fc.configs *= schema.cardinality(p);
    }
    if (fc.configs * fc.width > kMaxFamilyCells) {
        throw ConfigError("family of '" + schema.name(var) + "' is too large to count");
    }
    fc.cells.assign(fc.configs * fc.width, 0);
    fc.totals.assign(fc.configs, 0);
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        std::size_t cfg = 0;
        for (int p : parents) {
            cfg = cfg * schema.cardinality(p) + dataset.at(r, static_cast<std::size_t>(p));
        }
        ++fc.cells[cfg * fc.width + dataset.at(r, static_cast<std::size_t>(var))];
        ++fc.totals[cfg];
    }
    return fc;
}

} // namespace

ScoreReport make_score_report(double loglikelihood, long long k, long long n) {
    ScoreReport report;
    report.loglikelihood = loglikelihood;
    report.k = k;
    report.n = n;
    report.bic = static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglikelihood;
    return report;
}

Cpt fit_cpt(const Dataset& dataset, int var, const std::vector<int>& parents, double alpha) {
    if (alpha < 0.0) {
        throw ConfigError("smoothing alpha must be >= 0");
    }
    FamilyCounts fc = count_family(dataset, var, parents);
    Cpt cpt;
    cpt.var = var;
    cpt.parents = parents;
    cpt.width = fc.width;
    cpt.table.resize(fc.configs * fc.width);
    for (std::size_t cfg = 0; cfg < fc.configs; ++cfg) {
        double denom = static_cast<double>(fc.totals[cfg]) + alpha * static_cast<double>(fc.width);
        if (denom == 0.0) {
            throw ConfigError("alpha=0 with unobserved parent configuration " +
                              std::to_string(cfg) + " of variable '" +
                              dataset.schema.name(var) + "'");
        }
        for (std::uint32_t x = 0; x < fc.width; ++x) {
            cpt.table[cfg * fc.width + x] =
                (static_cast<double>(fc.cells[cfg * fc.width + x]) + alpha) / denom;
        }
    }
    return cpt;
}

std::vector<Cpt> fit_cpts(const Dag& dag, const Dataset& dataset, double alpha) {
    if (dataset.rows() < 1) {
        throw ConfigError("cannot fit CPTs on an empty dataset");
    }
    if (static_cast<std::size_t>(dag.node_count()) != dataset.schema.size()) {
        throw ConfigError("dag does not match the dataset schema");
    }
    std::vector<Cpt> cpts;
    cpts.reserve(dataset.schema.size());
    for (int v = 0; v < dag.node_count(); ++v) {
        cpts.push_back(fit_cpt(dataset, v, dag.parents(v), alpha));
    }
    return cpts;
}

double family_loglikelihood(const Dataset& dataset, int var, const std::vector<int>& parents) {
    FamilyCounts fc = count_family(dataset, var, parents);
    double ll = 0.0;
    for (std::size_t cfg = 0; cfg < fc.configs; ++cfg) {
        if (fc.totals[cfg] == 0) continue;
        double total = static_cast<double>(fc.totals[cfg]);
        for (std::uint32_t x = 0; x < fc.width; ++x) {
            long long n = fc.cells[cfg * fc.width + x];
            if (n > 0) {
                ll += static_cast<double>(n) * std::log(static_cast<double>(n) / total);
            }
        }
    }
    return ll;
}

double loglikelihood(const Dag& dag, const Dataset& dataset) {
    if (dataset.rows() < 1) {
        throw ConfigError("cannot score an empty dataset");
    }
    double ll = 0.0;
    for (int v = 0; v < dag.node_count(); ++v) {
        ll += family_loglikelihood(dataset, v, dag.parents(v));
    }
    return ll;
}

double loglikelihood_rowwise(const Dag& dag, const Dataset& dataset) {
    std::vector<Cpt> cpts = fit_cpts(dag, dataset, 0.0);
    BayesianNetwork net(dataset.schema, dag, std::move(cpts));
    double ll = 0.0;
    std::vector<std::uint32_t> assignment(dataset.cols());
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        for (std::size_t c = 0; c < dataset.cols(); ++c) {
            assignment[c] = dataset.at(r, c);
        }
        double p = net.joint_probability(assignment);
        if (p <= 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        ll += std::log(p);
    }
    return ll;
}

long long family_parameter_count(const Schema& schema, int var,
                                 const std::vector<int>& parents) {
    long long k = static_cast<long long>(schema.cardinality(var)) - 1;
    for (int p : parents) {
        k *= static_cast<long long>(schema.cardinality(p));
    }
    return k;
}

long long count_parameters(const Dag& dag, const Schema& schema) {
    long long k = 0;
    for (int v = 0; v < dag.node_count(); ++v) {
        k += family_parameter_count(schema, v, dag.parents(v));
    }
    return k;
}

double family_bic_component(const Dataset& dataset, int var, const std::vector<int>& parents) {
    double ll = family_loglikelihood(dataset, var, parents);
    long long k = family_parameter_count(dataset.schema, var, parents);
    return static_cast<double>(k) * std::log(static_cast<double>(dataset.rows())) - 2.0 * ll;
}

ScoreReport bic_score(const Dag& dag, const Dataset& dataset) {
    double ll = loglikelihood(dag, dataset);
    long long k = count_parameters(dag, dataset.schema);
    return make_score_report(ll, k, static_cast<long long>(dataset.rows()));
}

double pairwise_mutual_information(const Dataset& dataset, int a, int b) {
    const Schema& schema = dataset.schema;
    std::size_t ca = schema.cardinality(a);
    std::size_t cb = schema.cardinality(b);
    std::vector<long long> joint(ca * cb, 0);
    std::vector<long long> ma(ca, 0);
    std::vector<long long> mb(cb, 0);
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        std::uint32_t va = dataset.at(r, static_cast<std::size_t>(a));
        std::uint32_t vb = dataset.at(r, static_cast<std::size_t>(b));
        ++joint[va * cb + vb];
        ++ma[va];
        ++mb[vb];
    }
    double n = static_cast<double>(dataset.rows());
    double mi = 0.0;
    for (std::size_t i = 0; i < ca; ++i) {
        for (std::size_t j = 0; j < cb; ++j) {
            long long nij = joint[i * cb + j];
            if (nij == 0) continue;
            double pij = static_cast<double>(nij) / n;
            double pi = static_cast<double>(ma[i]) / n;
            double pj = static_cast<double>(mb[j]) / n;
            mi += pij * std::log(pij / (pi * pj));
        }
    }
    return mi;
}

} // namespace ztc
