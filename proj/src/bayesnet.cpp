#include "ztc/bayesnet.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ztc {

using nlohmann::json;

namespace {
constexpr double kRowSumTolerance = 1e-9;
} // namespace

std::size_t mixed_radix_index(const std::vector<std::uint32_t>& digits,
                              const std::vector<std::size_t>& radixes) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        idx = idx * radixes[i] + digits[i];
    }
    return idx;
}

BayesianNetwork::BayesianNetwork(Schema schema, Dag dag, std::vector<Cpt> cpts,
                                 std::map<std::pair<int, int>, double> edge_weights,
                                 ModelMetadata metadata)
    : schema_(std::move(schema)),
      dag_(std::move(dag)),
      cpts_(std::move(cpts)),
      weights_(std::move(edge_weights)),
      meta_(std::move(metadata)) {
    validate();
}

void BayesianNetwork::validate() const {
    std::size_t n = schema_.size();
    if (static_cast<std::size_t>(dag_.node_count()) != n) {
        throw ValidationError("dag node count does not match schema size");
    }
    if (cpts_.size() != n) {
        throw ValidationError("expected exactly one cpt per variable");
    }
    topological_order(dag_); // acyclicity

    for (std::size_t v = 0; v < n; ++v) {
        const Cpt& cpt = cpts_[v];
        const std::string& name = schema_.name(static_cast<int>(v));
        if (cpt.var != static_cast<int>(v)) {
            throw ValidationError("cpt " + std::to_string(v) + " is for variable " +
                                  std::to_string(cpt.var));
        }
        if (cpt.parents != dag_.parents(static_cast<int>(v))) {
            throw ValidationError("cpt parents of '" + name + "' do not match the dag");
        }
        if (cpt.width != schema_.cardinality(static_cast<int>(v))) {
            throw ValidationError("cpt width of '" + name + "' does not match its cardinality");
        }
        std::size_t expect_rows = 1;
        for (int p : cpt.parents) {
            expect_rows *= schema_.cardinality(p);
        }
        if (cpt.rows() != expect_rows || cpt.table.size() != expect_rows * cpt.width) {
            throw ValidationError("cpt of '" + name + "' has the wrong shape");
        }
        for (std::size_t r = 0; r < expect_rows; ++r) {
            double sum = 0.0;
            for (std::uint32_t x = 0; x < cpt.width; ++x) {
                double p = cpt.at(r, x);
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw ValidationError("cpt of '" + name + "': entry out of [0,1] in row " +
                                          std::to_string(r));
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream os;
                os << "cpt of '" << name << "': row " << r << " sums to " << sum;
                throw ValidationError(os.str());
            }
        }
    }

    for (const auto& [edge, w] : weights_) {
        if (!dag_.has_edge(edge.first, edge.second)) {
            throw ValidationError("edge weight for nonexistent edge " +
                                  std::to_string(edge.first) + " -> " +
                                  std::to_string(edge.second));
        }
        (void)w;
    }
}

int BayesianNetwork::action_var() const {
    for (std::size_t v = 0; v < schema_.size(); ++v) {
        if (is_action_name(schema_.name(static_cast<int>(v)))) {
            return static_cast<int>(v);
        }
    }
    throw SchemaError("model schema has no action variable");
}

std::uint32_t BayesianNetwork::allowed_index() const {
    int av = action_var();
    int idx = schema_.encode(av, kAllowedLabel);
    if (idx < 0) {
        throw SchemaError("action variable has no 'allowed' category");
    }
    return static_cast<std::uint32_t>(idx);
}

std::size_t BayesianNetwork::parent_config(int var,
                                           const std::vector<std::uint32_t>& assignment) const {
    const Cpt& cpt = cpts_.at(static_cast<std::size_t>(var));
    std::size_t idx = 0;
    for (int p : cpt.parents) {
        idx = idx * schema_.cardinality(p) + assignment[static_cast<std::size_t>(p)];
    }
    return idx;
}

double BayesianNetwork::joint_probability(const std::vector<std::uint32_t>& assignment) const {
    if (assignment.size() != var_count()) {
        throw ConfigError("assignment covers " + std::to_string(assignment.size()) +
                          " variables, expected " + std::to_string(var_count()));
    }
    for (std::size_t v = 0; v < var_count(); ++v) {
        if (assignment[v] >= schema_.cardinality(static_cast<int>(v))) {
            throw ConfigError("assignment value out of range for variable '" +
                              schema_.name(static_cast<int>(v)) + "'");
        }
    }
    double p = 1.0;
    for (std::size_t v = 0; v < var_count(); ++v) {
        p *= cpts_[v].at(parent_config(static_cast<int>(v), assignment), assignment[v]);
    }
    return p;
}

json BayesianNetwork::to_json() const {
    json doc;
    json schema = json::array();
    for (const auto& var : schema_.variables()) {
        schema.push_back(json{{"name", var.name}, {"categories", var.labels}});
    }
    doc["schema"] = std::move(schema);

    json edges = json::array();
    for (const auto& [u, v] : dag_.edges()) {
        edges.push_back(json::array({u, v}));
    }
    doc["edges"] = std::move(edges);

    json cpts = json::array();
    for (const Cpt& cpt : cpts_) {
        json rows = json::array();
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            json row = json::array();
            for (std::uint32_t x = 0; x < cpt.width; ++x) {
                row.push_back(cpt.at(r, x));
            }
            rows.push_back(std::move(row));
        }
        cpts.push_back(json{{"var", cpt.var}, {"parents", cpt.parents}, {"table", std::move(rows)}});
    }
    doc["cpts"] = std::move(cpts);

    json weights = json::array();
    for (const auto& [edge, w] : weights_) {
        weights.push_back(json::array({edge.first, edge.second, w}));
    }
    doc["edge_weights"] = std::move(weights);

    doc["metadata"] = json{
        {"format", meta_.format},
        {"model_version", meta_.model_version},
        {"trained_rows", meta_.trained_rows},
        {"alpha", meta_.alpha},
        {"loglikelihood", meta_.loglikelihood},
        {"k", meta_.k},
        {"bic", meta_.bic},
        {"search", meta_.search},
        {"weight_kind", meta_.weight_kind},
    };
    return doc;
}

std::string BayesianNetwork::serialize() const {
    // nlohmann keeps object keys sorted and emits shortest round-trip decimal
    // numbers, so equal nets produce identical bytes and probabilities
    // survive the round trip bit-exactly.
    return to_json().dump(2) + "\n";
}

BayesianNetwork BayesianNetwork::from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("model document must be a JSON object");
    }
    for (const char* key : {"schema", "edges", "cpts", "metadata"}) {
        if (!doc.contains(key)) {
            throw ValidationError(std::string("model document missing '") + key + "'");
        }
    }

    std::vector<Variable> vars;
    for (const auto& v : doc.at("schema")) {
        Variable var;
        var.name = v.at("name").get<std::string>();
        var.labels = v.at("categories").get<std::vector<std::string>>();
        vars.push_back(std::move(var));
    }
    Schema schema;
    try {
        schema = Schema(std::move(vars));
    } catch (const SchemaError& e) {
        throw ValidationError(e.what());
    }

    Dag dag(static_cast<int>(schema.size()));
    for (const auto& e : doc.at("edges")) {
        dag.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    }

    std::vector<Cpt> cpts;
    for (const auto& c : doc.at("cpts")) {
        Cpt cpt;
        cpt.var = c.at("var").get<int>();
        cpt.parents = c.at("parents").get<std::vector<int>>();
        if (cpt.var < 0 || cpt.var >= static_cast<int>(schema.size())) {
            throw ValidationError("cpt variable id out of range");
        }
        cpt.width = schema.cardinality(cpt.var);
        for (const auto& row : c.at("table")) {
            if (row.size() != cpt.width) {
                throw ValidationError("cpt of '" + schema.name(cpt.var) +
                                      "' has a row of the wrong width");
            }
            for (const auto& p : row) {
                cpt.table.push_back(p.get<double>());
            }
        }
        cpts.push_back(std::move(cpt));
    }

    std::map<std::pair<int, int>, double> weights;
    if (doc.contains("edge_weights")) {
        for (const auto& w : doc.at("edge_weights")) {
            weights[{w.at(0).get<int>(), w.at(1).get<int>()}] = w.at(2).get<double>();
        }
    }

    const auto& m = doc.at("metadata");
    ModelMetadata meta;
    meta.format = m.value("format", 1);
    meta.model_version = m.value("model_version", 1);
    meta.trained_rows = m.value("trained_rows", 0LL);
    meta.alpha = m.value("alpha", 1.0);
    meta.loglikelihood = m.value("loglikelihood", 0.0);
    meta.k = m.value("k", 0LL);
    meta.bic = m.value("bic", 0.0);
    meta.search = m.value("search", std::string{});
    meta.weight_kind = m.value("weight_kind", std::string{});

    return BayesianNetwork(std::move(schema), std::move(dag), std::move(cpts),
                           std::move(weights), std::move(meta));
}

BayesianNetwork BayesianNetwork::deserialize(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ValidationError("model document is not valid JSON");
    }
    return from_json(doc);
}

void save_model(const BayesianNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write file '" + path + "'");
    }
    out << net.serialize();
}

BayesianNetwork load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return BayesianNetwork::deserialize(buf.str());
}

} // namespace ztc
