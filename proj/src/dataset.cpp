#include "ztc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ztc/rng.hpp"

namespace ztc {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == delimiter) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(std::string s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && is_space(s[i])) ++i;
    return s.substr(i);
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

int parse_action(const std::string& raw, std::size_t line_no) {
    std::string v = to_lower(trim(raw));
    if (v == kAllowedLabel) return 1;
    if (v == kBlockedLabel) return 0;
    throw ParseError("line " + std::to_string(line_no) + ": unparsable action value '" + raw +
                     "' (expected allowed or blocked)");
}

void reject_reserved(const std::string& value, std::size_t line_no) {
    if (value == kOtherLabel) {
        throw ParseError("line " + std::to_string(line_no) + ": value '" + value +
                         "' collides with the reserved category label");
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open file '" + path + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Map observed header names (case-insensitive) onto canonical columns.
// Returns canonical-index -> file-column.
std::vector<int> resolve_header(const std::vector<std::string>& header) {
    const auto& canonical = log_attribute_names();
    std::vector<int> file_col(canonical.size(), -1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string name = to_lower(trim(header[c]));
        auto it = std::find(canonical.begin(), canonical.end(), name);
        if (it == canonical.end()) {
            throw SchemaError("unexpected column '" + header[c] + "'");
        }
        std::size_t k = static_cast<std::size_t>(it - canonical.begin());
        if (file_col[k] >= 0) {
            throw SchemaError("duplicate column '" + canonical[k] + "'");
        }
        file_col[k] = static_cast<int>(c);
    }
    for (std::size_t k = 0; k < canonical.size(); ++k) {
        if (file_col[k] < 0) {
            throw SchemaError("missing column '" + canonical[k] + "'");
        }
    }
    return file_col;
}

Dataset dataset_from_records(const std::vector<std::vector<std::string>>& records) {
    if (records.empty()) {
        throw SchemaError("dataset has no rows");
    }
    return dataset_from_table(log_attribute_names(), records);
}

} // namespace

const std::vector<std::string>& log_attribute_names() {
    static const std::vector<std::string> names = {
        "timestamp", "source_ip", "dest_ip",  "source_port", "dest_port",
        "protocol",  "user_id",   "application", "action",
    };
    return names;
}

std::vector<std::vector<std::string>> Dataset::to_table() const {
    std::vector<std::vector<std::string>> table(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        table[r].reserve(cols());
        for (std::size_t c = 0; c < cols(); ++c) {
            table[r].push_back(label_at(r, c));
        }
    }
    return table;
}

Dataset Dataset::with_other_schema() const {
    return Dataset{schema.with_other(), cells};
}

Schema build_schema(const std::vector<std::string>& column_names,
                    const std::vector<std::vector<std::string>>& rows) {
    if (column_names.empty() || rows.empty()) {
        throw SchemaError("cannot build a schema from an empty table");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != column_names.size()) {
            throw SchemaError("row " + std::to_string(r) + " has " +
                              std::to_string(rows[r].size()) + " fields, expected " +
                              std::to_string(column_names.size()));
        }
    }
    std::vector<Variable> vars;
    vars.reserve(column_names.size());
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        const std::string& name = column_names[c];
        if (is_action_name(name)) {
            // Closed domain, pinned order.
            for (const auto& row : rows) {
                if (row[c] != kBlockedLabel && row[c] != kAllowedLabel) {
                    throw SchemaError("action column may only contain allowed/blocked, got '" +
                                      row[c] + "'");
                }
            }
            vars.push_back(Variable{name, {kBlockedLabel, kAllowedLabel}});
            continue;
        }
        std::set<std::string> distinct;
        for (const auto& row : rows) {
            distinct.insert(row[c]);
        }
        vars.push_back(Variable{name, {distinct.begin(), distinct.end()}});
    }
    return Schema(std::move(vars));
}

Dataset dataset_from_table(const std::vector<std::string>& column_names,
                           const std::vector<std::vector<std::string>>& rows) {
    Dataset d;
    d.schema = build_schema(column_names, rows);
    d.cells.reserve(rows.size() * column_names.size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < column_names.size(); ++c) {
            int idx = d.schema.encode(static_cast<int>(c), row[c]);
            if (idx < 0) {
                throw SchemaError("value '" + row[c] + "' missing from derived schema");
            }
            d.cells.push_back(static_cast<std::uint32_t>(idx));
        }
    }
    return d;
}

Dataset load_csv(const std::string& path, const LoadOptions& options) {
    auto lines = read_lines(path);
    // Drop trailing blank lines.
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) {
        throw SchemaError("file '" + path + "' is empty");
    }

    const auto& canonical = log_attribute_names();
    std::vector<int> file_col;
    std::size_t first_data = 0;
    if (options.header) {
        file_col = resolve_header(split_line(lines[0], options.delimiter));
        first_data = 1;
    } else {
        file_col.resize(canonical.size());
        for (std::size_t k = 0; k < canonical.size(); ++k) file_col[k] = static_cast<int>(k);
    }

    std::vector<std::vector<std::string>> records;
    for (std::size_t i = first_data; i < lines.size(); ++i) {
        std::size_t line_no = i + 1;
        auto fields = split_line(lines[i], options.delimiter);
        if (fields.size() != canonical.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(canonical.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        std::vector<std::string> rec(canonical.size());
        for (std::size_t k = 0; k < canonical.size(); ++k) {
            rec[k] = trim(fields[static_cast<std::size_t>(file_col[k])]);
            reject_reserved(rec[k], line_no);
        }
        std::int64_t ts = 0;
        if (!parse_int64(rec[0], ts)) {
            throw ParseError("line " + std::to_string(line_no) + ": unparsable timestamp '" +
                             rec[0] + "'");
        }
        rec[canonical.size() - 1] = parse_action(rec.back(), line_no) ? kAllowedLabel
                                                                      : kBlockedLabel;
        records.push_back(std::move(rec));
    }
    return dataset_from_records(records);
}

Dataset load_jsonl(const std::string& path) {
    auto lines = read_lines(path);
    const auto& canonical = log_attribute_names();
    std::vector<std::vector<std::string>> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        json obj = json::parse(lines[i], nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw ParseError("line " + std::to_string(line_no) + ": not a JSON object");
        }
        std::vector<std::string> rec(canonical.size());
        for (std::size_t k = 0; k < canonical.size(); ++k) {
            auto it = obj.find(canonical[k]);
            if (it == obj.end()) {
                throw SchemaError("missing column '" + canonical[k] + "'");
            }
            if (k == 0) {
                if (!it->is_number_integer()) {
                    throw ParseError("line " + std::to_string(line_no) +
                                     ": timestamp must be an integer");
                }
                rec[k] = std::to_string(it->get<std::int64_t>());
            } else if (it->is_string()) {
                rec[k] = it->get<std::string>();
            } else if (it->is_number_integer()) {
                rec[k] = std::to_string(it->get<std::int64_t>());
            } else {
                throw ParseError("line " + std::to_string(line_no) + ": field '" + canonical[k] +
                                 "' must be a string or integer");
            }
            reject_reserved(rec[k], line_no);
        }
        rec[canonical.size() - 1] =
            parse_action(rec.back(), line_no) ? kAllowedLabel : kBlockedLabel;
        records.push_back(std::move(rec));
    }
    return dataset_from_records(records);
}

Dataset load_csv_generic(const std::string& path, char delimiter) {
    auto lines = read_lines(path);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.size() < 2) {
        throw SchemaError("file '" + path + "' has no data rows");
    }
    std::vector<std::string> names;
    for (const std::string& raw : split_line(lines[0], delimiter)) {
        names.push_back(trim(raw));
    }
    std::vector<std::vector<std::string>> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::size_t line_no = i + 1;
        auto fields = split_line(lines[i], delimiter);
        if (fields.size() != names.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        std::vector<std::string> rec;
        rec.reserve(fields.size());
        for (std::size_t k = 0; k < fields.size(); ++k) {
            rec.push_back(trim(fields[k]));
            reject_reserved(rec.back(), line_no);
            if (is_action_name(names[k])) {
                rec.back() = parse_action(rec.back(), line_no) ? kAllowedLabel : kBlockedLabel;
            }
        }
        records.push_back(std::move(rec));
    }
    return dataset_from_table(names, records);
}

void write_csv(const Dataset& dataset, const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write file '" + path + "'");
    }
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        if (c) out << delimiter;
        out << dataset.schema.name(static_cast<int>(c));
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        for (std::size_t c = 0; c < dataset.cols(); ++c) {
            const std::string& v = dataset.label_at(r, c);
            if (v.find(delimiter) != std::string::npos || v.find('\n') != std::string::npos) {
                throw ParseError("value '" + v + "' contains the delimiter; refusing to write");
            }
            if (c) out << delimiter;
            out << v;
        }
        out << '\n';
    }
}

void write_jsonl(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write file '" + path + "'");
    }
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        json obj;
        for (std::size_t c = 0; c < dataset.cols(); ++c) {
            const std::string& name = dataset.schema.name(static_cast<int>(c));
            const std::string& v = dataset.label_at(r, c);
            std::int64_t ts = 0;
            if (name == "timestamp" && parse_int64(v, ts)) {
                obj[name] = ts;
            } else {
                obj[name] = v;
            }
        }
        out << obj.dump() << '\n';
    }
}

Dataset apply_timestamp_policy(const Dataset& dataset, TimestampPolicy policy,
                               const std::vector<std::int64_t>& edges) {
    int ts = dataset.schema.require_var("timestamp");
    auto table = dataset.to_table();
    std::vector<std::string> names;
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        names.push_back(dataset.schema.name(static_cast<int>(c)));
    }

    if (policy == TimestampPolicy::drop) {
        names.erase(names.begin() + ts);
        for (auto& row : table) {
            row.erase(row.begin() + ts);
        }
        return dataset_from_table(names, table);
    }

    if (policy == TimestampPolicy::custom) {
        if (edges.empty()) {
            throw ConfigError("custom timestamp policy requires bucket edges");
        }
        for (std::size_t i = 1; i < edges.size(); ++i) {
            if (edges[i] <= edges[i - 1]) {
                throw ConfigError("bucket edges must be strictly increasing");
            }
        }
    }

    for (auto& row : table) {
        std::int64_t value = 0;
        if (!parse_int64(row[ts], value)) {
            throw ParseError("timestamp '" + row[ts] + "' is not an integer");
        }
        if (policy == TimestampPolicy::hour_of_day) {
            std::int64_t sec = ((value % 86400) + 86400) % 86400;
            char buf[8];
            std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(sec / 3600));
            row[ts] = buf;
        } else {
            if (value < edges.front()) {
                row[ts] = "<" + std::to_string(edges.front());
            } else if (value >= edges.back()) {
                row[ts] = ">=" + std::to_string(edges.back());
            } else {
                std::size_t i = 0;
                while (value >= edges[i + 1]) ++i;
                row[ts] = "[" + std::to_string(edges[i]) + "," + std::to_string(edges[i + 1]) + ")";
            }
        }
    }
    return dataset_from_table(names, table);
}

SyntheticConfig paper_cardinalities() {
    SyntheticConfig config;
    config.cardinalities = {
        {"source_ip", 3}, {"dest_ip", 2},  {"source_port", 5}, {"dest_port", 3},
        {"protocol", 2},  {"user_id", 8},  {"application", 3},
    };
    return config;
}

std::string synthetic_label(const std::string& attribute, int index) {
    static const std::map<std::string, std::vector<std::string>> pools = {
        {"source_ip", {}},
        {"dest_ip", {}},
        {"source_port", {"443", "56025", "52415", "8080", "60001"}},
        {"dest_port", {"443", "22", "8080"}},
        {"protocol", {"HTTPS", "SSH"}},
        {"user_id", {}},
        {"application", {"web_browser", "ssh_client", "database"}},
    };
    if (attribute == "source_ip") return "192.168.1." + std::to_string(10 + index);
    if (attribute == "dest_ip") return "10.0.0." + std::to_string(1 + index);
    if (attribute == "user_id") return "user" + std::to_string(1 + index);
    auto it = pools.find(attribute);
    if (it != pools.end() && static_cast<std::size_t>(index) < it->second.size()) {
        return it->second[static_cast<std::size_t>(index)];
    }
    return attribute + "_" + std::to_string(index);
}

SyntheticData generate_synthetic(std::uint64_t seed, const SyntheticConfig& config) {
    if (config.rows < 1) {
        throw ConfigError("synthetic row count must be >= 1");
    }
    if (config.cardinalities.empty()) {
        throw ConfigError("synthetic config has no attributes");
    }
    for (const auto& [name, card] : config.cardinalities) {
        if (card < 1) {
            throw ConfigError("cardinality of '" + name + "' must be >= 1");
        }
        if (is_action_name(name) || name == "timestamp") {
            throw ConfigError("synthetic cardinalities must not name '" + name + "'");
        }
    }

    // Validate the pattern against the configured attribute pools.
    std::vector<std::pair<std::size_t, std::string>> pattern_cols;
    for (const auto& [attr, value] : config.pattern.match) {
        auto it = std::find_if(config.cardinalities.begin(), config.cardinalities.end(),
                               [&](const auto& p) { return p.first == attr; });
        if (it == config.cardinalities.end()) {
            throw ConfigError("fraud pattern references unknown attribute '" + attr + "'");
        }
        bool found = false;
        for (int i = 0; i < it->second; ++i) {
            if (synthetic_label(attr, i) == value) found = true;
        }
        if (!found) {
            throw ConfigError("fraud pattern references unknown value '" + value + "' of '" +
                              attr + "'");
        }
        pattern_cols.emplace_back(
            static_cast<std::size_t>(it - config.cardinalities.begin()), value);
    }

    std::size_t coverage = 0;
    for (const auto& [name, card] : config.cardinalities) {
        coverage = std::max(coverage, static_cast<std::size_t>(card));
    }

    Rng rng = Rng::derive(seed, 0);
    std::vector<std::string> names = {"timestamp"};
    for (const auto& [name, card] : config.cardinalities) names.push_back(name);
    names.push_back(kActionVar);

    std::vector<std::vector<std::string>> table;
    std::vector<std::uint8_t> labels;
    table.reserve(config.rows);
    labels.reserve(config.rows);

    for (std::size_t r = 0; r < config.rows; ++r) {
        std::vector<std::string> row;
        row.reserve(names.size());
        row.push_back(std::to_string(config.timestamp_base +
                                     static_cast<std::int64_t>(r) * config.timestamp_step));

        bool forced = rng.bernoulli(config.fraud_fraction);
        std::vector<std::string> values;
        for (const auto& [name, card] : config.cardinalities) {
            int idx = r < static_cast<std::size_t>(card)
                          ? static_cast<int>(r)
                          : static_cast<int>(rng.uniform(static_cast<std::uint32_t>(card)));
            values.push_back(synthetic_label(name, idx));
        }
        // The first rows cycle through every category; forcing the pattern
        // there could leave a configured category unobserved.
        if (forced && r >= coverage) {
            for (const auto& [col, value] : pattern_cols) {
                values[col] = value;
            }
        }

        bool matches = !config.pattern.empty();
        for (const auto& [col, value] : pattern_cols) {
            if (values[col] != value) matches = false;
        }
        double block_p = matches ? config.pattern.strength : config.base_block_rate;
        bool blocked = rng.bernoulli(block_p);

        for (auto& v : values) row.push_back(std::move(v));
        row.push_back(blocked ? kBlockedLabel : kAllowedLabel);
        table.push_back(std::move(row));
        labels.push_back(matches ? 1 : 0);
    }

    return SyntheticData{dataset_from_table(names, table), std::move(labels)};
}

void write_labels_csv(const std::vector<std::uint8_t>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write file '" + path + "'");
    }
    out << "row,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << (labels[i] ? "fraudulent" : "benign") << '\n';
    }
}

} // namespace ztc
