#include "ztc/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace ztc {

namespace {

using nlohmann::json;

// Dense factor over a sorted set of variables, row-major with the last
// variable fastest.
struct Factor {
    std::vector<int> vars;          // ascending ids
    std::vector<std::size_t> cards; // aligned with vars
    std::vector<double> values;

    bool mentions(int v) const {
        return std::binary_search(vars.begin(), vars.end(), v);
    }
};

std::size_t space(const std::vector<std::size_t>& cards) {
    std::size_t s = 1;
    for (std::size_t c : cards) s *= c;
    return s;
}

// Iterate the assignments of `vars` in row-major order, exposing a digit
// vector. `fn(digits)` is called once per cell, in order.
template <typename Fn>
void for_each_cell(const std::vector<std::size_t>& cards, Fn&& fn) {
    std::vector<std::uint32_t> digits(cards.size(), 0);
    std::size_t total = space(cards);
    for (std::size_t i = 0; i < total; ++i) {
        fn(digits);
        for (std::size_t d = cards.size(); d-- > 0;) {
            if (++digits[d] < cards[d]) break;
            digits[d] = 0;
        }
    }
}

// Index of a sub-factor cell given digits of an enclosing variable set.
// stride[i] is the position of enclosing var i inside the sub-factor, or -1.
std::size_t project(const Factor& f, const std::vector<int>& positions,
                    const std::vector<std::uint32_t>& digits) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        idx = idx * f.cards[i] + digits[static_cast<std::size_t>(positions[i])];
    }
    return idx;
}

std::vector<int> positions_in(const std::vector<int>& sub, const std::vector<int>& super) {
    std::vector<int> pos(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        auto it = std::lower_bound(super.begin(), super.end(), sub[i]);
        pos[i] = static_cast<int>(it - super.begin());
    }
    return pos;
}

Factor multiply(const Factor& a, const Factor& b, const Schema& schema) {
    Factor out;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                   std::back_inserter(out.vars));
    out.cards.reserve(out.vars.size());
    for (int v : out.vars) out.cards.push_back(schema.cardinality(v));
    out.values.resize(space(out.cards));

    auto pa = positions_in(a.vars, out.vars);
    auto pb = positions_in(b.vars, out.vars);
    std::size_t i = 0;
    for_each_cell(out.cards, [&](const std::vector<std::uint32_t>& digits) {
        out.values[i++] = a.values[project(a, pa, digits)] * b.values[project(b, pb, digits)];
    });
    return out;
}

Factor sum_out(const Factor& f, int var, const Schema& schema) {
    Factor out;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        if (f.vars[i] != var) {
            out.vars.push_back(f.vars[i]);
            out.cards.push_back(f.cards[i]);
        }
    }
    out.values.assign(space(out.cards), 0.0);
    (void)schema;

    auto pos = positions_in(out.vars, f.vars);
    // Walk the source cells; accumulate into the cell with `var` removed.
    std::size_t i = 0;
    for_each_cell(f.cards, [&](const std::vector<std::uint32_t>& digits) {
        std::size_t idx = 0;
        for (std::size_t d = 0; d < out.vars.size(); ++d) {
            idx = idx * out.cards[d] + digits[static_cast<std::size_t>(pos[d])];
        }
        out.values[idx] += f.values[i++];
    });
    return out;
}

Factor reduce(const Factor& f, int var, std::uint32_t value) {
    Factor out;
    std::size_t vpos = 0;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        if (f.vars[i] == var) {
            vpos = i;
        } else {
            out.vars.push_back(f.vars[i]);
            out.cards.push_back(f.cards[i]);
        }
    }
    out.values.reserve(space(out.cards));
    std::size_t i = 0;
    for_each_cell(f.cards, [&](const std::vector<std::uint32_t>& digits) {
        if (digits[vpos] == value) {
            out.values.push_back(f.values[i]);
        }
        ++i;
    });
    return out;
}

// CPT as a factor over sorted(parents + var).
Factor cpt_factor(const BayesianNetwork& net, int var) {
    const Cpt& cpt = net.cpt(var);
    const Schema& schema = net.schema();
    Factor f;
    f.vars = cpt.parents;
    f.vars.insert(std::lower_bound(f.vars.begin(), f.vars.end(), var), var);
    for (int v : f.vars) f.cards.push_back(schema.cardinality(v));
    f.values.resize(space(f.cards));

    // Positions of the CPT's own axes inside the sorted factor axes.
    std::vector<int> ppos = positions_in(cpt.parents, f.vars);
    auto vit = std::lower_bound(f.vars.begin(), f.vars.end(), var);
    std::size_t vpos = static_cast<std::size_t>(vit - f.vars.begin());

    std::size_t i = 0;
    for_each_cell(f.cards, [&](const std::vector<std::uint32_t>& digits) {
        std::size_t row = 0;
        for (std::size_t p = 0; p < cpt.parents.size(); ++p) {
            row = row * schema.cardinality(cpt.parents[p]) +
                  digits[static_cast<std::size_t>(ppos[p])];
        }
        f.values[i++] = cpt.at(row, digits[vpos]);
    });
    return f;
}

void check_query_args(const BayesianNetwork& net, int target, const Evidence& evidence) {
    if (target < 0 || static_cast<std::size_t>(target) >= net.var_count()) {
        throw SchemaError("query target variable id out of range");
    }
    for (const auto& [v, value] : evidence) {
        if (v < 0 || static_cast<std::size_t>(v) >= net.var_count()) {
            throw SchemaError("evidence variable id out of range");
        }
        if (value >= net.schema().cardinality(v)) {
            throw SchemaError("evidence value out of range for variable '" +
                              net.schema().name(v) + "'");
        }
        if (v == target) {
            throw ConfigError("query target '" + net.schema().name(v) +
                              "' appears in its own evidence");
        }
    }
}

// Eliminate every variable outside `keep` from `factors` (min-degree order,
// ties by id), then multiply what remains into a distribution over `target`.
std::vector<double> eliminate_to_target(std::vector<Factor> factors, int target,
                                        const std::set<int>& keep,
                                        const BayesianNetwork& net) {
    const Schema& schema = net.schema();
    std::set<int> hidden;
    for (std::size_t v = 0; v < net.var_count(); ++v) {
        if (!keep.count(static_cast<int>(v))) hidden.insert(static_cast<int>(v));
    }

    while (!hidden.empty()) {
        // Min-degree: smallest neighbor set over the factors mentioning it.
        int pick = -1;
        std::size_t pick_degree = 0;
        for (int h : hidden) {
            std::set<int> neighbors;
            for (const Factor& f : factors) {
                if (f.mentions(h)) neighbors.insert(f.vars.begin(), f.vars.end());
            }
            std::size_t degree = neighbors.empty() ? 0 : neighbors.size() - 1;
            if (pick < 0 || degree < pick_degree) {
                pick = h;
                pick_degree = degree;
            }
        }

        std::vector<Factor> touching;
        std::vector<Factor> rest;
        for (Factor& f : factors) {
            (f.mentions(pick) ? touching : rest).push_back(std::move(f));
        }
        if (!touching.empty()) {
            Factor prod = std::move(touching[0]);
            for (std::size_t i = 1; i < touching.size(); ++i) {
                prod = multiply(prod, touching[i], schema);
            }
            rest.push_back(sum_out(prod, pick, schema));
        }
        factors = std::move(rest);
        hidden.erase(pick);
    }

    // Everything left ranges over {target} or is scalar.
    std::vector<double> dist(schema.cardinality(target), 1.0);
    for (const Factor& f : factors) {
        if (f.vars.empty()) {
            for (double& d : dist) d *= f.values[0];
        } else {
            for (std::size_t x = 0; x < dist.size(); ++x) {
                dist[x] *= f.values[x];
            }
        }
    }
    return dist;
}

std::vector<double> normalize_or_throw(std::vector<double> dist) {
    double total = 0.0;
    for (double d : dist) total += d;
    if (!(total > 0.0)) {
        throw ZeroEvidenceError("evidence has probability zero under the model");
    }
    for (double& d : dist) d /= total;
    return dist;
}

} // namespace

Evidence resolve_evidence(const Schema& schema,
                          const std::map<std::string, std::string>& attributes) {
    Evidence evidence;
    for (const auto& [name, value] : attributes) {
        int v = schema.require_var(name);
        evidence[v] = schema.encode_or_other(v, value);
    }
    return evidence;
}

std::vector<double> query(const BayesianNetwork& net, int target, const Evidence& evidence) {
    check_query_args(net, target, evidence);

    std::vector<Factor> factors;
    factors.reserve(net.var_count());
    for (std::size_t v = 0; v < net.var_count(); ++v) {
        Factor f = cpt_factor(net, static_cast<int>(v));
        for (const auto& [ev, value] : evidence) {
            if (f.mentions(ev)) f = reduce(f, ev, value);
        }
        factors.push_back(std::move(f));
    }

    std::set<int> keep{target};
    std::vector<double> dist = eliminate_to_target(std::move(factors), target, keep, net);
    return normalize_or_throw(std::move(dist));
}

std::vector<double> enumerate_query(const BayesianNetwork& net, int target,
                                    const Evidence& evidence) {
    check_query_args(net, target, evidence);

    const Schema& schema = net.schema();
    std::size_t joint = 1;
    for (std::size_t v = 0; v < net.var_count(); ++v) {
        joint *= schema.cardinality(static_cast<int>(v));
        if (joint > 1'000'000) {
            throw ConfigError("joint space too large for enumeration");
        }
    }

    std::vector<double> dist(schema.cardinality(target), 0.0);
    std::vector<std::uint32_t> assignment(net.var_count(), 0);
    for (std::size_t i = 0; i < joint; ++i) {
        bool consistent = true;
        for (const auto& [v, value] : evidence) {
            if (assignment[static_cast<std::size_t>(v)] != value) {
                consistent = false;
                break;
            }
        }
        if (consistent) {
            dist[assignment[static_cast<std::size_t>(target)]] +=
                net.joint_probability(assignment);
        }
        for (std::size_t d = assignment.size(); d-- > 0;) {
            if (++assignment[d] < schema.cardinality(static_cast<int>(d))) break;
            assignment[d] = 0;
        }
    }
    return normalize_or_throw(std::move(dist));
}

double p_allowed(const BayesianNetwork& net, const Evidence& evidence) {
    return query(net, net.action_var(), evidence)[net.allowed_index()];
}

const char* to_string(EffectMode mode) {
    return mode == EffectMode::conditional ? "conditional" : "interventional";
}

double do_effect(const BayesianNetwork& net, int attribute, std::uint32_t value) {
    int action = net.action_var();
    if (attribute == action) {
        throw ConfigError("cannot intervene on the action variable");
    }
    if (attribute < 0 || static_cast<std::size_t>(attribute) >= net.var_count()) {
        throw SchemaError("attribute id out of range");
    }
    if (value >= net.schema().cardinality(attribute)) {
        throw SchemaError("value out of range for variable '" + net.schema().name(attribute) +
                          "'");
    }

    // Truncated factorization: the intervened variable keeps no CPT.
    std::vector<Factor> factors;
    for (std::size_t v = 0; v < net.var_count(); ++v) {
        if (static_cast<int>(v) == attribute) continue;
        Factor f = cpt_factor(net, static_cast<int>(v));
        if (f.mentions(attribute)) f = reduce(f, attribute, value);
        factors.push_back(std::move(f));
    }

    std::set<int> keep{action, attribute};
    std::vector<double> dist = eliminate_to_target(std::move(factors), action, keep, net);
    dist = normalize_or_throw(std::move(dist));
    return dist[net.allowed_index()];
}

EffectTable causal_effect(const BayesianNetwork& net, int attribute, EffectMode mode) {
    int action = net.action_var();
    if (attribute == action) {
        throw ConfigError("effect attribute must differ from the action variable");
    }
    const Schema& schema = net.schema();
    EffectTable table;
    table.attribute = schema.name(attribute);
    table.mode = mode;
    std::uint32_t allowed = net.allowed_index();
    for (std::uint32_t v = 0; v < schema.cardinality(attribute); ++v) {
        EffectEntry entry;
        entry.value = schema.label(attribute, v);
        try {
            if (mode == EffectMode::conditional) {
                entry.p_allowed = query(net, action, Evidence{{attribute, v}})[allowed];
            } else {
                entry.p_allowed = do_effect(net, attribute, v);
            }
        } catch (const ZeroEvidenceError&) {
            entry.defined = false;
        }
        table.entries.push_back(std::move(entry));
    }
    return table;
}

std::string effect_tables_to_csv(std::span<const EffectTable> tables) {
    std::string out = "attribute,value,p_allowed,mode\n";
    for (const EffectTable& t : tables) {
        for (const EffectEntry& e : t.entries) {
            out += t.attribute;
            out += ',';
            out += e.value;
            out += ',';
            if (e.defined) {
                char buf[32];
                auto res = std::to_chars(buf, buf + sizeof buf, e.p_allowed);
                out.append(buf, res.ptr);
            }
            out += ',';
            out += to_string(t.mode);
            out += '\n';
        }
    }
    return out;
}

nlohmann::json effect_tables_to_json(std::span<const EffectTable> tables) {
    json doc = json::array();
    for (const EffectTable& t : tables) {
        json entries = json::array();
        for (const EffectEntry& e : t.entries) {
            json entry{{"value", e.value}, {"defined", e.defined}};
            if (e.defined) {
                entry["p_allowed"] = e.p_allowed;
            }
            entries.push_back(std::move(entry));
        }
        doc.push_back(json{{"attribute", t.attribute},
                           {"mode", to_string(t.mode)},
                           {"entries", std::move(entries)}});
    }
    return doc;
}

} // namespace ztc
