#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/dag.hpp"
#include "ztc/schema.hpp"

namespace ztc {

// Mixed-radix index with the first digit most significant.
std::size_t mixed_radix_index(const std::vector<std::uint32_t>& digits,
                              const std::vector<std::size_t>& radixes);

// Conditional probability table for one variable. Rows are indexed by the
// parent configuration (first-listed parent most significant), columns by
// the variable's category.
struct Cpt {
    int var = -1;
    std::vector<int> parents; // ascending variable ids
    std::size_t width = 0;    // cardinality of var
    std::vector<double> table;

    std::size_t rows() const { return width ? table.size() / width : 0; }
    double at(std::size_t row, std::uint32_t value) const { return table[row * width + value]; }

    bool operator==(const Cpt&) const = default;
};

struct ModelMetadata {
    int format = 1;
    int model_version = 1;
    long long trained_rows = 0;
    double alpha = 1.0;
    double loglikelihood = 0.0; // MLE log-likelihood at fit time, nats
    long long k = 0;            // independent parameter count used for scoring
    double bic = 0.0;
    std::string search;         // "hill_climb", "exhaustive", or "manual"
    std::string weight_kind = "pairwise_mutual_information_nats";

    bool operator==(const ModelMetadata&) const = default;
};

// Immutable after construction; concurrent read-only use needs no locking.
class BayesianNetwork {
public:
    BayesianNetwork() = default;
    BayesianNetwork(Schema schema, Dag dag, std::vector<Cpt> cpts,
                    std::map<std::pair<int, int>, double> edge_weights = {},
                    ModelMetadata metadata = {});

    const Schema& schema() const { return schema_; }
    const Dag& dag() const { return dag_; }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    const Cpt& cpt(int var) const { return cpts_.at(static_cast<std::size_t>(var)); }
    const std::map<std::pair<int, int>, double>& edge_weights() const { return weights_; }
    const ModelMetadata& metadata() const { return meta_; }

    std::size_t var_count() const { return schema_.size(); }
    int action_var() const;      // SchemaError when the schema has no action variable
    std::uint32_t allowed_index() const;

    // CPT row of `var` under a full assignment of its parents.
    std::size_t parent_config(int var, const std::vector<std::uint32_t>& assignment) const;

    // Product over variables of the CPT entry given the assigned parents.
    double joint_probability(const std::vector<std::uint32_t>& assignment) const;

    nlohmann::json to_json() const;
    std::string serialize() const; // canonical bytes: equal nets serialize identically
    static BayesianNetwork from_json(const nlohmann::json& doc);
    static BayesianNetwork deserialize(const std::string& text);

    bool operator==(const BayesianNetwork&) const = default;

private:
    void validate() const;

    Schema schema_;
    Dag dag_;
    std::vector<Cpt> cpts_;
    std::map<std::pair<int, int>, double> weights_;
    ModelMetadata meta_;
};

void save_model(const BayesianNetwork& net, const std::string& path);
BayesianNetwork load_model(const std::string& path);

} // namespace ztc
