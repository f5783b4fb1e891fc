#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ztc/schema.hpp"

namespace ztc {

// Canonical activity-log attributes, in canonical column order.
const std::vector<std::string>& log_attribute_names();

// One raw activity-log row. Ports are kept as strings: they are opaque
// categories, not ordered integers.
struct LogRecord {
    std::int64_t timestamp = 0;
    std::string source_ip;
    std::string dest_ip;
    std::string source_port;
    std::string dest_port;
    std::string protocol;
    std::string user_id;
    std::string application;
    int action = 0; // blocked=0, allowed=1
};

// Index-encoded categorical table.
struct Dataset {
    Schema schema;
    std::vector<std::uint32_t> cells; // row-major, rows() x schema.size()

    std::size_t rows() const { return schema.size() ? cells.size() / schema.size() : 0; }
    std::size_t cols() const { return schema.size(); }
    std::uint32_t at(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
    const std::string& label_at(std::size_t r, std::size_t c) const {
        return schema.label(static_cast<int>(c), at(r, c));
    }

    std::vector<std::vector<std::string>> to_table() const;

    // Same rows over a schema extended with the reserved other category
    // (deployment models must be able to score never-seen values).
    Dataset with_other_schema() const;

    bool operator==(const Dataset&) const = default;
};

// Derives a schema from a raw string table: one categorical variable per
// column, categories sorted lexicographically (action pinned, see Schema).
Schema build_schema(const std::vector<std::string>& column_names,
                    const std::vector<std::vector<std::string>>& rows);

// build_schema + row encoding in one step.
Dataset dataset_from_table(const std::vector<std::string>& column_names,
                           const std::vector<std::vector<std::string>>& rows);

struct LoadOptions {
    char delimiter = ',';
    bool header = true; // headerless files are assumed to be in canonical column order
};

// Activity-log ingestion. The header must carry exactly the nine canonical
// attribute names (case-insensitive, any order); columns are reordered to
// canonical order.
Dataset load_csv(const std::string& path, const LoadOptions& options = {});
Dataset load_jsonl(const std::string& path);

// Arbitrary categorical table: any header, every column categorical. An
// action column, when present, is validated and pinned as usual.
Dataset load_csv_generic(const std::string& path, char delimiter = ',');

void write_csv(const Dataset& dataset, const std::string& path, char delimiter = ',');
void write_jsonl(const Dataset& dataset, const std::string& path);

enum class TimestampPolicy {
    drop,        // remove the timestamp column
    hour_of_day, // bucket into "00".."23" (UTC)
    custom,      // explicit bucket edges
};

// Timestamp treatment before learning. Custom edges must be strictly
// increasing; values below the first edge go to "<e0", values at or above
// the last to ">=eN".
Dataset apply_timestamp_policy(const Dataset& dataset, TimestampPolicy policy,
                               const std::vector<std::int64_t>& edges = {});

// Attribute-value conjunction coupled to blocked outcomes.
struct FraudPattern {
    std::vector<std::pair<std::string, std::string>> match;
    double strength = 1.0; // P(action=blocked | row matches)

    bool empty() const { return match.empty(); }
};

struct SyntheticConfig {
    // Non-action attributes with their cardinalities, in canonical order.
    std::vector<std::pair<std::string, int>> cardinalities;
    std::size_t rows = 33;
    FraudPattern pattern;
    double fraud_fraction = 0.3;    // probability a generated row is forced onto the pattern
    double base_block_rate = 0.05;  // P(blocked) for rows not matching the pattern
    std::int64_t timestamp_base = 1700000000;
    std::int64_t timestamp_step = 60;
};

// The illustration setup: 8 users, 3 source IPs, 2 destination IPs,
// 5 source ports, 3 destination ports, 2 protocols, 3 applications.
SyntheticConfig paper_cardinalities();

struct SyntheticData {
    Dataset dataset;
    std::vector<std::uint8_t> fraudulent; // per row: 1 when the row matches the pattern
};

// Deterministic in (seed, config). The first max-cardinality rows cycle
// through every category so the generated schema always reports the
// configured cardinalities (given rows >= max cardinality).
SyntheticData generate_synthetic(std::uint64_t seed, const SyntheticConfig& config);

// Deterministic label pool for a synthetic attribute ("user_id", 3) -> "user4" etc.
std::string synthetic_label(const std::string& attribute, int index);

void write_labels_csv(const std::vector<std::uint8_t>& labels, const std::string& path);

} // namespace ztc
