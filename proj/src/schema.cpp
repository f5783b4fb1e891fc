#include "ztc/schema.hpp"

#include <algorithm>
#include <cctype>

namespace ztc {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_action_name(const std::string& name) {
    return to_lower(name) == kActionVar;
}

Schema::Schema(std::vector<Variable> vars) : vars_(std::move(vars)) {
    validate_and_index();
}

void Schema::validate_and_index() {
    by_name_.clear();
    label_index_.clear();
    label_index_.resize(vars_.size());

    for (std::size_t v = 0; v < vars_.size(); ++v) {
        const Variable& var = vars_[v];
        if (var.name.empty()) {
            throw SchemaError("schema variable " + std::to_string(v) + " has an empty name");
        }
        if (!by_name_.emplace(var.name, static_cast<int>(v)).second) {
            throw SchemaError("duplicate schema variable '" + var.name + "'");
        }
        if (var.labels.empty()) {
            throw SchemaError("variable '" + var.name + "' has no categories");
        }

        auto& idx = label_index_[v];
        for (std::size_t i = 0; i < var.labels.size(); ++i) {
            if (!idx.emplace(var.labels[i], static_cast<int>(i)).second) {
                throw SchemaError("variable '" + var.name + "' has duplicate category '" +
                                  var.labels[i] + "'");
            }
        }

        if (is_action_name(var.name)) {
            if (var.labels != std::vector<std::string>{kBlockedLabel, kAllowedLabel}) {
                throw SchemaError("action variable must have categories {blocked, allowed}");
            }
            continue;
        }

        // Lexicographic order over the observed labels; the reserved other
        // label is only legal at the last index.
        std::size_t observed = var.labels.size();
        for (std::size_t i = 0; i < var.labels.size(); ++i) {
            if (var.labels[i] == kOtherLabel) {
                if (i + 1 != var.labels.size()) {
                    throw SchemaError("variable '" + var.name +
                                      "': reserved category must be last");
                }
                observed = i;
            }
        }
        for (std::size_t i = 1; i < observed; ++i) {
            if (!(var.labels[i - 1] < var.labels[i])) {
                throw SchemaError("variable '" + var.name +
                                  "': categories are not in lexicographic order");
            }
        }
    }
}

const std::string& Schema::label(int v, std::uint32_t idx) const {
    const auto& ls = vars_.at(v).labels;
    if (idx >= ls.size()) {
        throw SchemaError("variable '" + vars_.at(v).name + "' has no category index " +
                          std::to_string(idx));
    }
    return ls[idx];
}

int Schema::var_index(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
}

int Schema::require_var(const std::string& name) const {
    int v = var_index(name);
    if (v < 0) {
        throw SchemaError("unknown variable '" + name + "'");
    }
    return v;
}

int Schema::encode(int v, const std::string& label) const {
    const auto& idx = label_index_.at(v);
    auto it = idx.find(label);
    return it == idx.end() ? -1 : it->second;
}

std::uint32_t Schema::encode_or_other(int v, const std::string& label) const {
    int i = encode(v, label);
    if (i >= 0) {
        return static_cast<std::uint32_t>(i);
    }
    if (!has_other(v)) {
        throw SchemaError("variable '" + vars_.at(v).name + "' has no category '" + label +
                          "' and no reserved other category");
    }
    return other_index(v);
}

bool Schema::has_other(int v) const {
    const auto& ls = vars_.at(v).labels;
    return !ls.empty() && ls.back() == kOtherLabel;
}

std::uint32_t Schema::other_index(int v) const {
    if (!has_other(v)) {
        throw SchemaError("variable '" + vars_.at(v).name + "' has no reserved other category");
    }
    return static_cast<std::uint32_t>(vars_.at(v).labels.size() - 1);
}

Schema Schema::with_other() const {
    std::vector<Variable> vars = vars_;
    for (auto& var : vars) {
        if (is_action_name(var.name) || (!var.labels.empty() && var.labels.back() == kOtherLabel)) {
            continue;
        }
        var.labels.push_back(kOtherLabel);
    }
    return Schema(std::move(vars));
}

} // namespace ztc
