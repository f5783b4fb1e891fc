#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/inference.hpp"

namespace ztc {

enum class Verdict {
    BlockedLocal,       // learning gate: p_allow < theta_block
    ForwardedToPdp,     // gate passed, PDP reachable (not terminal)
    AllowedAutonomous,  // PDP unreachable, p_allow >= theta_auto
    BlockedAutonomous,  // PDP unreachable, fail closed
    PdpAllowed,         // policy engine verdict
    PdpDenied,
    BlockedAnomalous,   // zero-probability evidence; never allowed
};

const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct Thresholds {
    double theta_block = 0.5;
    double theta_auto = 0.9;

    void validate() const;
};

struct AccessRequest {
    std::string id;
    std::string node;     // origin node id
    double time_ms = 0.0; // arrival time
    std::map<std::string, std::string> attributes; // partial evidence, never action
};

struct Decision {
    Verdict verdict = Verdict::BlockedAnomalous;
    double p_allow = 0.0;  // 0 for anomalous blocks
    bool p_defined = true; // false when no model probability applies
    int model_version = 0;
    std::string rationale;
};

// Learning-gate decision at a Policy Enforcement Point:
//   zero-probability evidence      -> BlockedAnomalous
//   p < theta_block                -> BlockedLocal (the PDP is never involved)
//   PDP reachable                  -> ForwardedToPdp
//   p >= theta_auto                -> AllowedAutonomous
//   otherwise                      -> BlockedAutonomous (fail closed)
Decision pep_evaluate(const AccessRequest& request, const BayesianNetwork& net,
                      const Thresholds& thresholds, bool pdp_reachable);

// One decision as a JSONL line: request_id, verdict, p_allow, model_version,
// node, time.
std::string decision_log_line(const AccessRequest& request, const Decision& decision);

// Attribute=value conjunction; "*" matches any present value. An empty
// conjunction matches every request.
struct PolicyRule {
    std::map<std::string, std::string> match;
    bool allow = false;
};

// Ordered first-match rules; unmatched requests get the default verdict,
// which is always deny.
struct PolicySet {
    std::vector<PolicyRule> rules;
};

Verdict pdp_decide(const AccessRequest& request, const PolicySet& policies);

PolicySet policyset_from_json(const nlohmann::json& doc);
nlohmann::json policyset_to_json(const PolicySet& policies);

struct SessionRecord {
    long long id = 0;
    std::string subject;
    std::string resource;
    double start_ms = 0.0;
    bool open = true;
    double end_ms = 0.0;
    std::string close_reason;
    bool audit_pending = false; // autonomous allows await retroactive PDP audit
};

// Policy Administrator bookkeeping: append-only session ledger with
// serialized appends.
class SessionLedger {
public:
    // Only PdpAllowed or AllowedAutonomous verdicts may open a session.
    long long establish(const std::string& subject, const std::string& resource,
                        double time_ms, Verdict verdict);
    void teardown(long long id, double time_ms, const std::string& reason = "closed");
    void revoke(long long id, double time_ms);

    std::vector<SessionRecord> records() const;
    std::size_t open_count() const;
    std::size_t audit_pending_count() const;

private:
    mutable std::mutex mutex_;
    std::vector<SessionRecord> records_;
    long long next_id_ = 1;
};

} // namespace ztc
