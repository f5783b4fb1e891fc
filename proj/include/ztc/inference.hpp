#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/bayesnet.hpp"

namespace ztc {

// Partial assignment: variable id -> category index. A query target must
// not appear in its own evidence.
using Evidence = std::map<int, std::uint32_t>;

// Resolve name->value evidence against a schema. Unknown variable names are
// a SchemaError; unknown values map to the reserved other category (or are a
// SchemaError when the variable has none).
Evidence resolve_evidence(const Schema& schema,
                          const std::map<std::string, std::string>& attributes);

// Exact posterior over the target's categories by variable elimination
// (min-degree ordering, ties by variable id). Sums to 1 within 1e-9.
// Evidence with probability zero under the model is a ZeroEvidenceError.
std::vector<double> query(const BayesianNetwork& net, int target, const Evidence& evidence);

// Same posterior by direct summation of the joint over all full assignments
// consistent with the evidence. Test oracle, independent of the variable
// elimination path. Refuses joint spaces over 10^6 assignments.
std::vector<double> enumerate_query(const BayesianNetwork& net, int target,
                                    const Evidence& evidence);

// P(action=allowed | evidence).
double p_allowed(const BayesianNetwork& net, const Evidence& evidence);

enum class EffectMode { conditional, interventional };

const char* to_string(EffectMode mode);

struct EffectEntry {
    std::string value;
    bool defined = true; // false when the conditioning evidence has zero mass
    double p_allowed = 0.0;
};

// Per-category effect of one attribute on the allow probability.
struct EffectTable {
    std::string attribute;
    EffectMode mode = EffectMode::conditional;
    std::vector<EffectEntry> entries; // in category order
};

// conditional: P(action=allowed | attribute=v) for every category v.
// interventional: P(action=allowed | do(attribute=v)) via truncated
// factorization. A zero-mass value is reported undefined, not a failure.
EffectTable causal_effect(const BayesianNetwork& net, int attribute,
                          EffectMode mode = EffectMode::conditional);

// Truncated factorization: drop the attribute's CPT, clamp attribute=value,
// marginalize the rest. Equals the conditional query when the attribute has
// no parents.
double do_effect(const BayesianNetwork& net, int attribute, std::uint32_t value);

// Plot-data emission: `attribute,value,p_allowed,mode` (empty p for
// undefined entries).
std::string effect_tables_to_csv(std::span<const EffectTable> tables);
nlohmann::json effect_tables_to_json(std::span<const EffectTable> tables);

} // namespace ztc
