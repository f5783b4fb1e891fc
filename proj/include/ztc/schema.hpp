#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ztc/errors.hpp"

namespace ztc {

// Reserved per-variable category for values never seen in training data.
// Input data must not contain this label; Schema::with_other appends it and
// it always occupies the last index of a variable.
inline constexpr const char* kOtherLabel = "__other__";

// The decision-target variable. Its category order is pinned to
// {blocked=0, allowed=1} instead of the lexicographic rule, and it never
// receives the reserved other category: its domain is closed.
inline constexpr const char* kActionVar = "action";
inline constexpr const char* kBlockedLabel = "blocked"; // action index 0
inline constexpr const char* kAllowedLabel = "allowed"; // action index 1

std::string to_lower(std::string s);
bool is_action_name(const std::string& name);

struct Variable {
    std::string name;
    std::vector<std::string> labels;

    bool operator==(const Variable&) const = default;
};

// Ordered table of categorical variables. Observed labels are sorted
// lexicographically so index encodings are reproducible, with two pinned
// exceptions: the action variable is always {blocked, allowed}, and the
// reserved other label, when present, is always last.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Variable> vars);

    std::size_t size() const { return vars_.size(); }
    const std::string& name(int v) const { return vars_.at(v).name; }
    const std::vector<std::string>& labels(int v) const { return vars_.at(v).labels; }
    std::size_t cardinality(int v) const { return vars_.at(v).labels.size(); }
    const std::string& label(int v, std::uint32_t idx) const;
    const std::vector<Variable>& variables() const { return vars_; }

    int var_index(const std::string& name) const;   // -1 when absent
    int require_var(const std::string& name) const; // SchemaError when absent

    int encode(int v, const std::string& label) const; // -1 when unknown

    // Unknown values map to the reserved other index; SchemaError when this
    // variable has no other category.
    std::uint32_t encode_or_other(int v, const std::string& label) const;

    bool has_other(int v) const;
    std::uint32_t other_index(int v) const;

    // Copy of this schema with the reserved other category appended to every
    // variable except action.
    Schema with_other() const;

    bool operator==(const Schema& rhs) const { return vars_ == rhs.vars_; }

private:
    void validate_and_index();

    std::vector<Variable> vars_;
    std::unordered_map<std::string, int> by_name_;
    std::vector<std::unordered_map<std::string, int>> label_index_;
};

} // namespace ztc
