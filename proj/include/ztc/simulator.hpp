#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/dataset.hpp"
#include "ztc/decision.hpp"
#include "ztc/search.hpp"

namespace ztc {

enum class Tier { edge, fog, cloud };

const char* to_string(Tier t);
Tier tier_from_string(const std::string& s);

struct SimNode {
    std::string id;
    Tier tier = Tier::edge;
};

struct Outage {
    double start_ms = 0.0;
    double end_ms = 0.0; // half-open [start, end)
};

struct SimLink {
    std::string a;
    std::string b;
    double latency_ms = 1.0;
    std::vector<Outage> outages;

    bool up_at(double t) const;
};

// Continuum graph. Exactly one cloud node hosts the PDP, the PA and
// resource management; every edge and fog node hosts a PEP.
struct Topology {
    std::vector<SimNode> nodes;
    std::vector<SimLink> links;

    void validate() const;
    const SimNode& cloud_node() const;
    std::vector<std::string> edge_node_ids() const;
    std::vector<std::string> pep_node_ids() const; // edge + fog

    // Shortest up-path latency from `from` to the cloud at time t;
    // negative when no path exists.
    double path_latency_to_cloud(const std::string& from, double t) const;
};

enum class DeploymentMode { cloud, hybrid };

const char* to_string(DeploymentMode m);
DeploymentMode mode_from_string(const std::string& s);

struct WorkloadSpec {
    double rate_per_edge_ms = 0.5;   // arrival rate per edge node, requests per sim ms
    long long total_requests = 0;    // > 0: generate exactly this many
    double fraud_fraction = 0.3;
    std::vector<std::string> evidence_vars; // attributes revealed in requests
};

struct MessageSizes {
    long long request = 512;
    long long verdict = 128;
    // model push size = serialized model bytes
};

struct SimConfig {
    std::uint64_t seed = 42;
    double duration_ms = 0.0; // arrival horizon when total_requests == 0
    DeploymentMode mode = DeploymentMode::hybrid;
    Thresholds thresholds;
    double sync_interval_ms = 1000.0;
    double retrain_interval_ms = 2500.0;
    long long min_retrain_rows = 200; // new log rows needed before a retrain
    double alpha = 1.0;
    SearchConfig search;
    SyntheticConfig bootstrap;   // pre-sim training history (pattern lives here)
    WorkloadSpec workload;
    MessageSizes bytes;
    PolicySet policies;
    double pep_latency_ms = 1.0;
    double pdp_latency_ms = 1.0;

    void validate() const;
};

struct Scenario {
    Topology topology;
    SimConfig config;
};

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario default_scenario(); // 3 edge + 1 fog + 1 cloud, 10^4 requests

struct ConfusionMatrix {
    long long tp = 0; // fraudulent and blocked by the learning gate
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
    double recall() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }
};

struct Metrics {
    long long requests = 0;
    std::map<std::string, long long> verdict_counts; // terminal verdicts only
    long long pdp_query_count = 0;
    long long blocked_local_count = 0;
    long long anomalous_count = 0;
    long long autonomous_count = 0;            // decided without the PDP
    long long connectivity_blocked_count = 0;  // blocked for lack of a path
    long long sessions_established = 0;
    long long audit_pending = 0;
    long long retrain_count = 0;
    long long sync_count = 0;
    long long bytes_on_wire = 0;
    double latency_mean_ms = 0.0;
    double latency_p50_ms = 0.0;
    double latency_p95_ms = 0.0;
    double latency_p99_ms = 0.0;
    ConfusionMatrix confusion;
    std::map<int, long long> staleness_histogram; // per (sync x PEP) sample

    nlohmann::json to_json() const;
    bool operator==(const Metrics& rhs) const;
};

struct SimResult {
    Metrics metrics;
    std::string trace_jsonl;
};

// One workload arrival; `attributes` is the full generated row, `fraudulent`
// marks rows matching the configured pattern.
struct TimedRequest {
    double t = 0.0;
    std::string node;
    std::map<std::string, std::string> attributes;
    bool fraudulent = false;
};

// Merged per-edge-node Poisson streams; pure function of (topology spec,
// config, seed). Nodes with rate 0 are excluded.
std::vector<TimedRequest> generate_workload(const Topology& topology, const SimConfig& config);

// One model-distribution round: PEPs reachable from the cloud at time t
// adopt `cloud_version`; unreachable PEPs keep theirs. Returns per-PEP
// staleness (cloud_version - held version) after the round and the list of
// PEPs that adopted a new version.
struct SyncReport {
    std::map<std::string, int> staleness;
    std::vector<std::string> pushed;
};

SyncReport model_sync(const Topology& topology, double t, int cloud_version,
                      std::map<std::string, int>& pep_versions);

// Deterministic discrete-event run. Replayable: the returned trace feeds
// replay_metrics, which reproduces the metrics exactly.
SimResult run_sim(const Topology& topology, const SimConfig& config);

Metrics replay_metrics(const std::string& trace_jsonl);

// Plot-data emission from a trace.
std::string pdp_load_csv(const std::string& trace_jsonl, double bucket_ms = 1000.0);
std::string staleness_histogram_csv(const Metrics& metrics);
std::string confusion_matrix_csv(const Metrics& metrics);

} // namespace ztc
