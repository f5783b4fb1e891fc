#include "ztc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "ztc/rng.hpp"

namespace ztc {

using nlohmann::json;

const char* to_string(Tier t) {
    switch (t) {
    case Tier::edge:
        return "edge";
    case Tier::fog:
        return "fog";
    case Tier::cloud:
        return "cloud";
    }
    return "?";
}

Tier tier_from_string(const std::string& s) {
    if (s == "edge") return Tier::edge;
    if (s == "fog") return Tier::fog;
    if (s == "cloud") return Tier::cloud;
    throw ConfigError("unknown tier '" + s + "'");
}

const char* to_string(DeploymentMode m) {
    return m == DeploymentMode::cloud ? "cloud" : "hybrid";
}

DeploymentMode mode_from_string(const std::string& s) {
    if (s == "cloud") return DeploymentMode::cloud;
    if (s == "hybrid") return DeploymentMode::hybrid;
    throw ConfigError("unknown deployment mode '" + s + "'");
}

bool SimLink::up_at(double t) const {
    for (const Outage& o : outages) {
        if (t >= o.start_ms && t < o.end_ms) return false;
    }
    return true;
}

void Topology::validate() const {
    if (nodes.empty()) {
        throw ConfigError("topology has no nodes");
    }
    std::set<std::string> ids;
    int clouds = 0;
    for (const SimNode& n : nodes) {
        if (!ids.insert(n.id).second) {
            throw ConfigError("duplicate node id '" + n.id + "'");
        }
        if (n.tier == Tier::cloud) ++clouds;
    }
    if (clouds != 1) {
        throw ConfigError("topology must have exactly one cloud node (hosts PDP, PA and "
                          "resource management)");
    }
    for (const SimLink& l : links) {
        if (!ids.count(l.a) || !ids.count(l.b)) {
            throw ConfigError("link references unknown node '" + l.a + "'/'" + l.b + "'");
        }
        if (l.latency_ms < 0.0) {
            throw ConfigError("link latency must be >= 0");
        }
        for (const Outage& o : l.outages) {
            if (o.end_ms < o.start_ms) {
                throw ConfigError("outage interval end before start");
            }
        }
    }
    // Connected when all links are up.
    std::set<std::string> seen{nodes.front().id};
    std::queue<std::string> q;
    q.push(nodes.front().id);
    while (!q.empty()) {
        std::string v = q.front();
        q.pop();
        for (const SimLink& l : links) {
            for (const std::string& next : {l.a == v ? l.b : std::string{},
                                            l.b == v ? l.a : std::string{}}) {
                if (!next.empty() && seen.insert(next).second) q.push(next);
            }
        }
    }
    if (seen.size() != nodes.size()) {
        throw ConfigError("topology is not connected even with all links up");
    }
}

const SimNode& Topology::cloud_node() const {
    for (const SimNode& n : nodes) {
        if (n.tier == Tier::cloud) return n;
    }
    throw ConfigError("topology has no cloud node");
}

std::vector<std::string> Topology::edge_node_ids() const {
    std::vector<std::string> out;
    for (const SimNode& n : nodes) {
        if (n.tier == Tier::edge) out.push_back(n.id);
    }
    return out;
}

std::vector<std::string> Topology::pep_node_ids() const {
    std::vector<std::string> out;
    for (const SimNode& n : nodes) {
        if (n.tier != Tier::cloud) out.push_back(n.id);
    }
    return out;
}

double Topology::path_latency_to_cloud(const std::string& from, double t) const {
    const std::string& goal = cloud_node().id;
    std::map<std::string, double> dist;
    dist[from] = 0.0;
    using Item = std::pair<double, std::string>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, from});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        if (v == goal) return d;
        for (const SimLink& l : links) {
            if (!l.up_at(t)) continue;
            std::string next;
            if (l.a == v) next = l.b;
            else if (l.b == v) next = l.a;
            else continue;
            double nd = d + l.latency_ms;
            auto it = dist.find(next);
            if (it == dist.end() || nd < it->second) {
                dist[next] = nd;
                heap.push({nd, next});
            }
        }
    }
    return -1.0;
}

void SimConfig::validate() const {
    thresholds.validate();
    if (sync_interval_ms <= 0.0 || retrain_interval_ms <= 0.0) {
        throw ConfigError("sync and retrain intervals must be > 0");
    }
    if (workload.rate_per_edge_ms < 0.0) {
        throw ConfigError("workload rate must be >= 0");
    }
    if (workload.total_requests < 0 || duration_ms < 0.0) {
        throw ConfigError("workload horizon must be >= 0");
    }
    if (workload.fraud_fraction < 0.0 || workload.fraud_fraction > 1.0) {
        throw ConfigError("fraud fraction must lie in [0, 1]");
    }
    if (alpha < 0.0 || pep_latency_ms < 0.0 || pdp_latency_ms < 0.0 || bytes.request < 0 ||
        bytes.verdict < 0 || min_retrain_rows < 0) {
        throw ConfigError("invalid simulation configuration");
    }
    for (const std::string& name : workload.evidence_vars) {
        bool known = false;
        for (const auto& [attr, card] : bootstrap.cardinalities) {
            if (attr == name) known = true;
        }
        if (!known) {
            throw ConfigError("evidence variable '" + name + "' is not a workload attribute");
        }
    }
    for (const auto& [attr, value] : bootstrap.pattern.match) {
        bool known = false;
        for (const auto& [name, card] : bootstrap.cardinalities) {
            if (name != attr) continue;
            for (int i = 0; i < card; ++i) {
                if (synthetic_label(attr, i) == value) known = true;
            }
        }
        if (!known) {
            throw ConfigError("fraud pattern references unknown value '" + value + "' of '" +
                              attr + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario files

Scenario scenario_from_json(const json& doc) {
    Scenario s;
    const json& topo = doc.at("topology");
    for (const auto& n : topo.at("nodes")) {
        s.topology.nodes.push_back(
            SimNode{n.at("id").get<std::string>(), tier_from_string(n.at("tier"))});
    }
    for (const auto& l : topo.value("links", json::array())) {
        SimLink link;
        link.a = l.at("a").get<std::string>();
        link.b = l.at("b").get<std::string>();
        link.latency_ms = l.value("latency_ms", 1.0);
        for (const auto& o : l.value("outages", json::array())) {
            link.outages.push_back(Outage{o.at(0).get<double>(), o.at(1).get<double>()});
        }
        s.topology.links.push_back(std::move(link));
    }

    const json& c = doc.at("config");
    SimConfig& cfg = s.config;
    cfg.seed = c.value("seed", 42ULL);
    cfg.duration_ms = c.value("duration_ms", 0.0);
    cfg.mode = mode_from_string(c.value("mode", "hybrid"));
    if (c.contains("thresholds")) {
        cfg.thresholds.theta_block = c.at("thresholds").value("theta_block", 0.5);
        cfg.thresholds.theta_auto = c.at("thresholds").value("theta_auto", 0.9);
    }
    cfg.sync_interval_ms = c.value("sync_interval_ms", 1000.0);
    cfg.retrain_interval_ms = c.value("retrain_interval_ms", 2500.0);
    cfg.min_retrain_rows = c.value("min_retrain_rows", 200LL);
    cfg.alpha = c.value("alpha", 1.0);
    if (c.contains("search")) {
        const json& sc = c.at("search");
        cfg.search.max_parents = sc.value("max_parents", 3);
        cfg.search.max_iterations = sc.value("max_iterations", 200);
        cfg.search.random_restarts = sc.value("random_restarts", 0);
        cfg.search.seed = sc.value("seed", 0ULL);
    }
    cfg.search.alpha = cfg.alpha;

    if (c.contains("bootstrap")) {
        const json& b = c.at("bootstrap");
        cfg.bootstrap.rows = b.value("rows", std::size_t{500});
        cfg.bootstrap.fraud_fraction = b.value("fraud_fraction", 0.3);
        cfg.bootstrap.base_block_rate = b.value("base_block_rate", 0.05);
        if (b.contains("cardinalities")) {
            cfg.bootstrap.cardinalities.clear();
            for (const std::string& name : log_attribute_names()) {
                if (name == "timestamp" || is_action_name(name)) continue;
                if (b.at("cardinalities").contains(name)) {
                    cfg.bootstrap.cardinalities.emplace_back(
                        name, b.at("cardinalities").at(name).get<int>());
                }
            }
        } else {
            cfg.bootstrap.cardinalities = paper_cardinalities().cardinalities;
        }
        if (b.contains("pattern")) {
            cfg.bootstrap.pattern.match.clear();
            for (const auto& [attr, value] : b.at("pattern").at("match").items()) {
                cfg.bootstrap.pattern.match.emplace_back(attr, value.get<std::string>());
            }
            cfg.bootstrap.pattern.strength = b.at("pattern").value("strength", 1.0);
        }
    } else {
        cfg.bootstrap.cardinalities = paper_cardinalities().cardinalities;
        cfg.bootstrap.rows = 500;
    }

    if (c.contains("workload")) {
        const json& w = c.at("workload");
        cfg.workload.rate_per_edge_ms = w.value("rate_per_edge_ms", 0.5);
        cfg.workload.total_requests = w.value("total_requests", 0LL);
        cfg.workload.fraud_fraction = w.value("fraud_fraction", 0.3);
        if (w.contains("evidence")) {
            cfg.workload.evidence_vars = w.at("evidence").get<std::vector<std::string>>();
        }
    }
    if (cfg.workload.evidence_vars.empty()) {
        for (const auto& [attr, card] : cfg.bootstrap.cardinalities) {
            cfg.workload.evidence_vars.push_back(attr);
        }
    }

    if (c.contains("bytes")) {
        cfg.bytes.request = c.at("bytes").value("request", 512LL);
        cfg.bytes.verdict = c.at("bytes").value("verdict", 128LL);
    }
    cfg.pep_latency_ms = c.value("pep_latency_ms", 1.0);
    cfg.pdp_latency_ms = c.value("pdp_latency_ms", 1.0);
    if (c.contains("policies")) {
        cfg.policies = policyset_from_json(c.at("policies"));
    }

    s.topology.validate();
    cfg.validate();
    return s;
}

json scenario_to_json(const Scenario& scenario) {
    json nodes = json::array();
    for (const SimNode& n : scenario.topology.nodes) {
        nodes.push_back(json{{"id", n.id}, {"tier", to_string(n.tier)}});
    }
    json links = json::array();
    for (const SimLink& l : scenario.topology.links) {
        json outages = json::array();
        for (const Outage& o : l.outages) {
            outages.push_back(json::array({o.start_ms, o.end_ms}));
        }
        links.push_back(json{{"a", l.a},
                             {"b", l.b},
                             {"latency_ms", l.latency_ms},
                             {"outages", std::move(outages)}});
    }

    const SimConfig& cfg = scenario.config;
    json cards = json::object();
    for (const auto& [attr, card] : cfg.bootstrap.cardinalities) {
        cards[attr] = card;
    }
    json pattern_match = json::object();
    for (const auto& [attr, value] : cfg.bootstrap.pattern.match) {
        pattern_match[attr] = value;
    }

    json config{
        {"seed", cfg.seed},
        {"duration_ms", cfg.duration_ms},
        {"mode", to_string(cfg.mode)},
        {"thresholds",
         json{{"theta_block", cfg.thresholds.theta_block},
              {"theta_auto", cfg.thresholds.theta_auto}}},
        {"sync_interval_ms", cfg.sync_interval_ms},
        {"retrain_interval_ms", cfg.retrain_interval_ms},
        {"min_retrain_rows", cfg.min_retrain_rows},
        {"alpha", cfg.alpha},
        {"search",
         json{{"max_parents", cfg.search.max_parents},
              {"max_iterations", cfg.search.max_iterations},
              {"random_restarts", cfg.search.random_restarts},
              {"seed", cfg.search.seed}}},
        {"bootstrap",
         json{{"rows", cfg.bootstrap.rows},
              {"fraud_fraction", cfg.bootstrap.fraud_fraction},
              {"base_block_rate", cfg.bootstrap.base_block_rate},
              {"cardinalities", std::move(cards)},
              {"pattern",
               json{{"match", std::move(pattern_match)},
                    {"strength", cfg.bootstrap.pattern.strength}}}}},
        {"workload",
         json{{"rate_per_edge_ms", cfg.workload.rate_per_edge_ms},
              {"total_requests", cfg.workload.total_requests},
              {"fraud_fraction", cfg.workload.fraud_fraction},
              {"evidence", cfg.workload.evidence_vars}}},
        {"bytes", json{{"request", cfg.bytes.request}, {"verdict", cfg.bytes.verdict}}},
        {"pep_latency_ms", cfg.pep_latency_ms},
        {"pdp_latency_ms", cfg.pdp_latency_ms},
        {"policies", policyset_to_json(cfg.policies)},
    };
    return json{{"topology", json{{"nodes", std::move(nodes)}, {"links", std::move(links)}}},
                {"config", std::move(config)}};
}

Scenario default_scenario() {
    Scenario s;
    s.topology.nodes = {
        SimNode{"edge1", Tier::edge}, SimNode{"edge2", Tier::edge},
        SimNode{"edge3", Tier::edge}, SimNode{"fog1", Tier::fog},
        SimNode{"cloud1", Tier::cloud},
    };
    s.topology.links = {
        SimLink{"edge1", "fog1", 5.0, {}},
        SimLink{"edge2", "fog1", 5.0, {}},
        SimLink{"edge3", "fog1", 5.0, {}},
        SimLink{"fog1", "cloud1", 20.0, {}},
    };

    SimConfig& cfg = s.config;
    cfg.seed = 42;
    cfg.mode = DeploymentMode::hybrid;
    cfg.sync_interval_ms = 1000.0;
    cfg.retrain_interval_ms = 2500.0;
    cfg.min_retrain_rows = 500;
    cfg.alpha = 1.0;
    cfg.search.alpha = 1.0;
    cfg.bootstrap = paper_cardinalities();
    cfg.bootstrap.rows = 500;
    cfg.bootstrap.fraud_fraction = 0.3;
    cfg.bootstrap.base_block_rate = 0.05;
    cfg.bootstrap.pattern.match = {{"protocol", "SSH"}, {"source_port", "56025"}};
    cfg.bootstrap.pattern.strength = 1.0;
    cfg.workload.rate_per_edge_ms = 0.5;
    cfg.workload.total_requests = 10000;
    cfg.workload.fraud_fraction = 0.3;
    for (const auto& [attr, card] : cfg.bootstrap.cardinalities) {
        cfg.workload.evidence_vars.push_back(attr);
    }
    cfg.policies.rules = {
        PolicyRule{{{"protocol", "SSH"}, {"source_port", "56025"}}, false},
        PolicyRule{{}, true},
    };
    return s;
}

// ---------------------------------------------------------------------------
// Metrics

json Metrics::to_json() const {
    json verdicts = json::object();
    for (const auto& [name, count] : verdict_counts) {
        verdicts[name] = count;
    }
    json hist = json::object();
    for (const auto& [gap, count] : staleness_histogram) {
        hist[std::to_string(gap)] = count;
    }
    return json{
        {"requests", requests},
        {"verdict_counts", std::move(verdicts)},
        {"pdp_query_count", pdp_query_count},
        {"blocked_local_count", blocked_local_count},
        {"anomalous_count", anomalous_count},
        {"autonomous_count", autonomous_count},
        {"connectivity_blocked_count", connectivity_blocked_count},
        {"sessions_established", sessions_established},
        {"audit_pending", audit_pending},
        {"retrain_count", retrain_count},
        {"sync_count", sync_count},
        {"bytes_on_wire", bytes_on_wire},
        {"latency_ms",
         json{{"mean", latency_mean_ms},
              {"p50", latency_p50_ms},
              {"p95", latency_p95_ms},
              {"p99", latency_p99_ms}}},
        {"confusion",
         json{{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn},
              {"fn", confusion.fn}}},
        {"staleness_histogram", std::move(hist)},
    };
}

bool Metrics::operator==(const Metrics& rhs) const {
    return to_json() == rhs.to_json();
}

namespace {

// Builds Metrics from trace records. run_sim and replay_metrics share this
// consumer, so replaying a trace reproduces the metrics exactly.
class MetricsBuilder {
public:
    void consume(const json& record) {
        const std::string type = record.at("type").get<std::string>();
        if (type == "decision") {
            ++metrics_.requests;
            const std::string verdict = record.at("verdict").get<std::string>();
            ++metrics_.verdict_counts[verdict];
            bool p_null = record.at("p_allow").is_null();
            if (verdict == "blocked_local") ++metrics_.blocked_local_count;
            if (verdict == "blocked_anomalous") ++metrics_.anomalous_count;
            if (verdict == "pdp_allowed" || verdict == "pdp_denied") ++metrics_.pdp_query_count;
            if (verdict == "allowed_autonomous" || verdict == "blocked_autonomous") {
                ++metrics_.autonomous_count;
            }
            if (verdict == "blocked_autonomous" && p_null) {
                ++metrics_.connectivity_blocked_count;
            }
            if (verdict == "pdp_allowed" || verdict == "allowed_autonomous") {
                ++metrics_.sessions_established;
            }
            if (verdict == "allowed_autonomous") ++metrics_.audit_pending;
            metrics_.bytes_on_wire += record.at("bytes").get<long long>();
            latencies_.push_back(record.at("latency_ms").get<double>());

            bool fraud = record.at("label").get<std::string>() == "fraudulent";
            bool gate_block = verdict == "blocked_local" || verdict == "blocked_anomalous";
            if (fraud && gate_block) ++metrics_.confusion.tp;
            if (!fraud && gate_block) ++metrics_.confusion.fp;
            if (fraud && !gate_block) ++metrics_.confusion.fn;
            if (!fraud && !gate_block) ++metrics_.confusion.tn;
        } else if (type == "sync") {
            ++metrics_.sync_count;
            metrics_.bytes_on_wire += record.at("bytes").get<long long>();
            for (const auto& [node, gap] : record.at("staleness").items()) {
                (void)node;
                ++metrics_.staleness_histogram[gap.get<int>()];
            }
        } else if (type == "retrain") {
            ++metrics_.retrain_count;
        } else {
            throw ParseError("unknown trace record type '" + type + "'");
        }
    }

    Metrics finalize() {
        if (!latencies_.empty()) {
            double sum = 0.0;
            for (double l : latencies_) sum += l;
            metrics_.latency_mean_ms = sum / static_cast<double>(latencies_.size());
            std::vector<double> sorted = latencies_;
            std::sort(sorted.begin(), sorted.end());
            auto rank = [&](double q) {
                std::size_t idx = static_cast<std::size_t>(
                    std::ceil(q * static_cast<double>(sorted.size())));
                return sorted[idx ? idx - 1 : 0];
            };
            metrics_.latency_p50_ms = rank(0.50);
            metrics_.latency_p95_ms = rank(0.95);
            metrics_.latency_p99_ms = rank(0.99);
        }
        return metrics_;
    }

private:
    Metrics metrics_;
    std::vector<double> latencies_;
};

std::map<std::string, std::string> pick_evidence(const std::map<std::string, std::string>& all,
                                                 const std::vector<std::string>& vars) {
    std::map<std::string, std::string> out;
    for (const std::string& v : vars) {
        auto it = all.find(v);
        if (it != all.end()) out.emplace(*it);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Workload

std::vector<TimedRequest> generate_workload(const Topology& topology, const SimConfig& config) {
    const WorkloadSpec& spec = config.workload;
    std::vector<std::string> edges = topology.edge_node_ids();
    std::vector<TimedRequest> out;
    if (edges.empty() || spec.rate_per_edge_ms <= 0.0 ||
        (spec.total_requests == 0 && config.duration_ms <= 0.0)) {
        return out;
    }

    const auto& cards = config.bootstrap.cardinalities;
    // Pattern columns resolved against the attribute pools.
    std::vector<std::pair<std::string, std::string>> pattern = config.bootstrap.pattern.match;

    std::vector<Rng> node_rng;
    std::vector<double> next_t;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        node_rng.push_back(Rng::derive(config.seed, 1000 + i));
        next_t.push_back(node_rng.back().exponential(spec.rate_per_edge_ms));
    }
    Rng attr_rng = Rng::derive(config.seed, 3000);

    while (true) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < edges.size(); ++i) {
            if (next_t[i] < next_t[pick]) pick = i;
        }
        double t = next_t[pick];
        if (spec.total_requests > 0) {
            if (static_cast<long long>(out.size()) >= spec.total_requests) break;
        } else if (t > config.duration_ms) {
            break;
        }
        next_t[pick] += node_rng[pick].exponential(spec.rate_per_edge_ms);

        TimedRequest req;
        req.t = t;
        req.node = edges[pick];
        for (const auto& [name, card] : cards) {
            req.attributes[name] =
                synthetic_label(name, static_cast<int>(attr_rng.uniform(
                                          static_cast<std::uint32_t>(card))));
        }
        bool forced = attr_rng.bernoulli(spec.fraud_fraction);
        if (forced) {
            for (const auto& [attr, value] : pattern) {
                req.attributes[attr] = value;
            }
        }
        req.fraudulent = !pattern.empty();
        for (const auto& [attr, value] : pattern) {
            if (req.attributes.at(attr) != value) req.fraudulent = false;
        }
        out.push_back(std::move(req));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model distribution

SyncReport model_sync(const Topology& topology, double t, int cloud_version,
                      std::map<std::string, int>& pep_versions) {
    SyncReport report;
    for (auto& [node, version] : pep_versions) {
        bool reachable = topology.path_latency_to_cloud(node, t) >= 0.0;
        if (reachable && version < cloud_version) {
            version = cloud_version;
            report.pushed.push_back(node);
        }
        report.staleness[node] = cloud_version - version;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Event loop

namespace {

struct Event {
    double t;
    int kind; // 0 retrain, 1 sync, 2 request; coincident events run in this order
    long long seq;

    bool operator<(const Event& rhs) const {
        return std::tie(t, kind, seq) < std::tie(rhs.t, rhs.kind, rhs.seq);
    }
};

std::vector<std::vector<std::string>> drop_timestamp_table(const Dataset& dataset) {
    Dataset dropped = apply_timestamp_policy(dataset, TimestampPolicy::drop);
    return dropped.to_table();
}

// Columns of the training corpus: the configured attributes plus action.
std::vector<std::string> training_names(const SimConfig& config) {
    std::vector<std::string> names;
    for (const auto& [attr, card] : config.bootstrap.cardinalities) {
        (void)card;
        names.push_back(attr);
    }
    names.push_back(kActionVar);
    return names;
}

} // namespace

SimResult run_sim(const Topology& topology, const SimConfig& config) {
    topology.validate();
    config.validate();

    const bool hybrid = config.mode == DeploymentMode::hybrid;

    // Training corpus: the bootstrap history plus runtime decision logs that
    // reached the cloud. Timestamps never enter the learned model.
    std::vector<std::string> names = training_names(config);
    std::vector<std::vector<std::string>> corpus;
    std::vector<BayesianNetwork> models;
    std::vector<long long> model_sizes;
    int cloud_version = 0;

    auto retrain = [&]() {
        Dataset data = dataset_from_table(names, corpus);
        SearchConfig search = config.search;
        search.alpha = config.alpha;
        search.seed = config.search.seed + static_cast<std::uint64_t>(cloud_version);
        SearchResult fit = train_deployment_model(data, search, true, cloud_version + 1);
        models.push_back(std::move(fit.net));
        model_sizes.push_back(static_cast<long long>(models.back().serialize().size()));
        ++cloud_version;
    };

    if (hybrid) {
        SyntheticData bootstrap = generate_synthetic(Rng::derive(config.seed, 1).next_u64(),
                                                     config.bootstrap);
        corpus = drop_timestamp_table(bootstrap.dataset);
        retrain(); // version 1
    }

    std::vector<TimedRequest> workload = generate_workload(topology, config);

    // PEPs are provisioned with the initial model before the run starts;
    // later versions arrive only through sync events over up links.
    std::map<std::string, int> pep_versions;
    for (const std::string& node : topology.pep_node_ids()) {
        pep_versions[node] = cloud_version;
    }

    double horizon = workload.empty() ? config.duration_ms : workload.back().t;
    std::vector<Event> events;
    events.reserve(workload.size() + 64);
    for (std::size_t i = 0; i < workload.size(); ++i) {
        events.push_back(Event{workload[i].t, 2, static_cast<long long>(i)});
    }
    if (hybrid) {
        for (long long k = 1; static_cast<double>(k) * config.retrain_interval_ms <= horizon;
             ++k) {
            events.push_back(Event{static_cast<double>(k) * config.retrain_interval_ms, 0, k});
        }
        for (long long k = 1; static_cast<double>(k) * config.sync_interval_ms <= horizon; ++k) {
            events.push_back(Event{static_cast<double>(k) * config.sync_interval_ms, 1, k});
        }
    }
    std::sort(events.begin(), events.end());

    MetricsBuilder builder;
    std::string trace;
    SessionLedger ledger;
    long long rows_since_retrain = 0;

    auto emit = [&](const json& record) {
        builder.consume(record);
        trace += record.dump();
        trace += '\n';
    };

    for (const Event& ev : events) {
        if (ev.kind == 0) { // retrain
            if (rows_since_retrain < config.min_retrain_rows) continue;
            retrain();
            rows_since_retrain = 0;
            emit(json{{"type", "retrain"},
                      {"t", ev.t},
                      {"version", cloud_version},
                      {"rows", static_cast<long long>(corpus.size())}});
            continue;
        }
        if (ev.kind == 1) { // sync
            SyncReport report = model_sync(topology, ev.t, cloud_version, pep_versions);
            long long bytes = 0;
            for (const std::string& node : report.pushed) {
                (void)node;
                bytes += model_sizes.back();
            }
            json staleness = json::object();
            for (const auto& [node, gap] : report.staleness) {
                staleness[node] = gap;
            }
            emit(json{{"type", "sync"},
                      {"t", ev.t},
                      {"version", cloud_version},
                      {"staleness", std::move(staleness)},
                      {"pushed", report.pushed},
                      {"bytes", bytes}});
            continue;
        }

        const TimedRequest& tr = workload[static_cast<std::size_t>(ev.seq)];
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "r%06lld", ev.seq);
        AccessRequest request;
        request.id = idbuf;
        request.node = tr.node;
        request.time_ms = tr.t;
        request.attributes = pick_evidence(tr.attributes, config.workload.evidence_vars);

        double path = topology.path_latency_to_cloud(tr.node, tr.t);
        bool reachable = path >= 0.0;

        Verdict terminal;
        json p_allow = nullptr;
        json model_version = nullptr;
        double latency = config.pep_latency_ms;
        long long bytes = 0;

        if (hybrid) {
            const BayesianNetwork& model =
                models[static_cast<std::size_t>(pep_versions.at(tr.node)) - 1];
            Decision d = pep_evaluate(request, model, config.thresholds, reachable);
            terminal = d.verdict;
            if (d.p_defined) p_allow = d.p_allow;
            model_version = d.model_version;
            if (d.verdict == Verdict::ForwardedToPdp) {
                terminal = pdp_decide(request, config.policies);
                latency += 2.0 * path + config.pdp_latency_ms;
                bytes = config.bytes.request + config.bytes.verdict;
            }
        } else {
            if (reachable) {
                terminal = pdp_decide(request, config.policies);
                latency += 2.0 * path + config.pdp_latency_ms;
                bytes = config.bytes.request + config.bytes.verdict;
            } else {
                terminal = Verdict::BlockedAutonomous; // fail closed, no path
            }
        }

        if (terminal == Verdict::PdpAllowed || terminal == Verdict::AllowedAutonomous) {
            auto subject = tr.attributes.find("user_id");
            auto resource = tr.attributes.find("application");
            ledger.establish(subject != tr.attributes.end() ? subject->second : request.id,
                             resource != tr.attributes.end() ? resource->second : "resource",
                             tr.t + latency, terminal);
        }

        if (hybrid && reachable) {
            bool allowed =
                terminal == Verdict::PdpAllowed || terminal == Verdict::AllowedAutonomous;
            std::vector<std::string> row;
            row.reserve(names.size());
            for (const std::string& name : names) {
                if (is_action_name(name)) {
                    row.push_back(allowed ? kAllowedLabel : kBlockedLabel);
                } else {
                    row.push_back(tr.attributes.at(name));
                }
            }
            corpus.push_back(std::move(row));
            ++rows_since_retrain;
        }

        emit(json{{"type", "decision"},
                  {"seq", ev.seq},
                  {"t", tr.t},
                  {"node", tr.node},
                  {"request_id", request.id},
                  {"verdict", to_string(terminal)},
                  {"p_allow", p_allow},
                  {"model_version", model_version},
                  {"label", tr.fraudulent ? "fraudulent" : "benign"},
                  {"latency_ms", latency},
                  {"bytes", bytes}});
    }

    SimResult result;
    result.metrics = builder.finalize();
    result.trace_jsonl = std::move(trace);

    // Conservation and verdict accounting are structural; check them anyway.
    long long total = 0;
    for (const auto& [name, count] : result.metrics.verdict_counts) {
        (void)name;
        total += count;
    }
    if (total != result.metrics.requests ||
        result.metrics.requests != static_cast<long long>(workload.size())) {
        throw Error("simulation lost or duplicated requests");
    }
    if (result.metrics.sessions_established !=
        static_cast<long long>(ledger.records().size())) {
        throw Error("session ledger disagrees with the decision log");
    }
    return result;
}

Metrics replay_metrics(const std::string& trace_jsonl) {
    MetricsBuilder builder;
    std::istringstream in(trace_jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        builder.consume(json::parse(line));
    }
    return builder.finalize();
}

std::string pdp_load_csv(const std::string& trace_jsonl, double bucket_ms) {
    std::map<long long, long long> buckets;
    std::istringstream in(trace_jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record = json::parse(line);
        if (record.at("type") != "decision") continue;
        const std::string verdict = record.at("verdict").get<std::string>();
        if (verdict != "pdp_allowed" && verdict != "pdp_denied") continue;
        long long bucket =
            static_cast<long long>(std::floor(record.at("t").get<double>() / bucket_ms));
        ++buckets[bucket];
    }
    std::string out = "bucket_start_ms,pdp_queries\n";
    for (const auto& [bucket, count] : buckets) {
        out += std::to_string(static_cast<long long>(static_cast<double>(bucket) * bucket_ms));
        out += ',';
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

std::string staleness_histogram_csv(const Metrics& metrics) {
    std::string out = "staleness,count\n";
    for (const auto& [gap, count] : metrics.staleness_histogram) {
        out += std::to_string(gap);
        out += ',';
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

std::string confusion_matrix_csv(const Metrics& metrics) {
    std::string out = "tp,fp,tn,fn\n";
    out += std::to_string(metrics.confusion.tp) + ',' + std::to_string(metrics.confusion.fp) +
           ',' + std::to_string(metrics.confusion.tn) + ',' +
           std::to_string(metrics.confusion.fn) + '\n';
    return out;
}

} // namespace ztc
