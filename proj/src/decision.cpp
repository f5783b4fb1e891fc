#include "ztc/decision.hpp"

#include <algorithm>
#include <cstdio>

namespace ztc {

using nlohmann::json;

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::BlockedLocal:
        return "blocked_local";
    case Verdict::ForwardedToPdp:
        return "forwarded_to_pdp";
    case Verdict::AllowedAutonomous:
        return "allowed_autonomous";
    case Verdict::BlockedAutonomous:
        return "blocked_autonomous";
    case Verdict::PdpAllowed:
        return "pdp_allowed";
    case Verdict::PdpDenied:
        return "pdp_denied";
    case Verdict::BlockedAnomalous:
        return "blocked_anomalous";
    }
    return "?";
}

Verdict verdict_from_string(const std::string& s) {
    for (Verdict v : {Verdict::BlockedLocal, Verdict::ForwardedToPdp, Verdict::AllowedAutonomous,
                      Verdict::BlockedAutonomous, Verdict::PdpAllowed, Verdict::PdpDenied,
                      Verdict::BlockedAnomalous}) {
        if (s == to_string(v)) return v;
    }
    throw ConfigError("unknown verdict '" + s + "'");
}

void Thresholds::validate() const {
    if (!(theta_block >= 0.0 && theta_block <= 1.0) ||
        !(theta_auto >= 0.0 && theta_auto <= 1.0)) {
        throw ConfigError("thresholds must lie in [0, 1]");
    }
    if (theta_block > theta_auto) {
        throw ConfigError("theta_block must be <= theta_auto");
    }
}

namespace {

std::string format_p(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

} // namespace

Decision pep_evaluate(const AccessRequest& request, const BayesianNetwork& net,
                      const Thresholds& thresholds, bool pdp_reachable) {
    thresholds.validate();
    for (const auto& [name, value] : request.attributes) {
        if (is_action_name(name)) {
            throw ConfigError("request evidence must not contain the action variable");
        }
        (void)value;
    }

    Decision decision;
    decision.model_version = net.metadata().model_version;

    Evidence evidence;
    try {
        evidence = resolve_evidence(net.schema(), request.attributes);
    } catch (const SchemaError& e) {
        throw ConfigError(std::string("schema mismatch: ") + e.what());
    }

    double p = 0.0;
    try {
        p = p_allowed(net, evidence);
    } catch (const ZeroEvidenceError&) {
        decision.verdict = Verdict::BlockedAnomalous;
        decision.p_allow = 0.0;
        decision.p_defined = false;
        decision.rationale = "evidence has zero probability under model v" +
                             std::to_string(decision.model_version) +
                             "; never-seen combination blocked";
        return decision;
    }

    decision.p_allow = p;
    if (p < thresholds.theta_block) {
        decision.verdict = Verdict::BlockedLocal;
        decision.rationale = "p_allow=" + format_p(p) + " < theta_block=" +
                             format_p(thresholds.theta_block) +
                             "; blocked locally without involving the policy engine";
    } else if (pdp_reachable) {
        decision.verdict = Verdict::ForwardedToPdp;
        decision.rationale = "p_allow=" + format_p(p) + " >= theta_block=" +
                             format_p(thresholds.theta_block) +
                             "; recommended to the policy engine";
    } else if (p >= thresholds.theta_auto) {
        decision.verdict = Verdict::AllowedAutonomous;
        decision.rationale = "pdp unreachable; p_allow=" + format_p(p) +
                             " >= theta_auto=" + format_p(thresholds.theta_auto) +
                             "; allowed autonomously, pending audit";
    } else {
        decision.verdict = Verdict::BlockedAutonomous;
        decision.rationale = "pdp unreachable; p_allow=" + format_p(p) + " < theta_auto=" +
                             format_p(thresholds.theta_auto) + "; fail closed";
    }
    return decision;
}

std::string decision_log_line(const AccessRequest& request, const Decision& decision) {
    json line{
        {"request_id", request.id},
        {"verdict", to_string(decision.verdict)},
        {"model_version", decision.model_version},
        {"node", request.node},
        {"time", request.time_ms},
    };
    if (decision.p_defined) {
        line["p_allow"] = decision.p_allow;
    } else {
        line["p_allow"] = nullptr;
    }
    return line.dump();
}

Verdict pdp_decide(const AccessRequest& request, const PolicySet& policies) {
    for (const PolicyRule& rule : policies.rules) {
        bool matches = true;
        for (const auto& [attr, want] : rule.match) {
            auto it = request.attributes.find(attr);
            if (it == request.attributes.end()) {
                matches = false; // absent attribute never matches, fail closed
                break;
            }
            if (want != "*" && it->second != want) {
                matches = false;
                break;
            }
        }
        if (matches) {
            return rule.allow ? Verdict::PdpAllowed : Verdict::PdpDenied;
        }
    }
    return Verdict::PdpDenied; // default deny
}

PolicySet policyset_from_json(const json& doc) {
    PolicySet set;
    const json& rules = doc.is_array() ? doc : doc.at("rules");
    for (const auto& r : rules) {
        PolicyRule rule;
        std::string effect = r.at("effect").get<std::string>();
        if (effect == "allow") {
            rule.allow = true;
        } else if (effect == "deny") {
            rule.allow = false;
        } else {
            throw ConfigError("policy rule effect must be allow or deny, got '" + effect + "'");
        }
        if (r.contains("match")) {
            for (const auto& [attr, value] : r.at("match").items()) {
                rule.match[attr] = value.get<std::string>();
            }
        }
        set.rules.push_back(std::move(rule));
    }
    return set;
}

json policyset_to_json(const PolicySet& policies) {
    json rules = json::array();
    for (const PolicyRule& rule : policies.rules) {
        json match = json::object();
        for (const auto& [attr, value] : rule.match) {
            match[attr] = value;
        }
        rules.push_back(json{{"match", std::move(match)}, {"effect", rule.allow ? "allow" : "deny"}});
    }
    return json{{"rules", std::move(rules)}};
}

long long SessionLedger::establish(const std::string& subject, const std::string& resource,
                                   double time_ms, Verdict verdict) {
    if (verdict != Verdict::PdpAllowed && verdict != Verdict::AllowedAutonomous) {
        throw ConfigError("sessions may only be established after an allow verdict");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    SessionRecord rec;
    rec.id = next_id_++;
    rec.subject = subject;
    rec.resource = resource;
    rec.start_ms = time_ms;
    rec.audit_pending = verdict == Verdict::AllowedAutonomous;
    records_.push_back(std::move(rec));
    return records_.back().id;
}

void SessionLedger::teardown(long long id, double time_ms, const std::string& reason) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = std::find_if(records_.begin(), records_.end(),
                           [&](const SessionRecord& r) { return r.id == id; });
    if (it == records_.end()) {
        throw Error("unknown session " + std::to_string(id));
    }
    if (!it->open) {
        throw Error("session " + std::to_string(id) + " is already closed");
    }
    it->open = false;
    it->end_ms = time_ms;
    it->close_reason = reason;
}

void SessionLedger::revoke(long long id, double time_ms) {
    teardown(id, time_ms, "revoked");
}

std::vector<SessionRecord> SessionLedger::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
}

std::size_t SessionLedger::open_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t n = 0;
    for (const auto& r : records_) n += r.open ? 1 : 0;
    return n;
}

std::size_t SessionLedger::audit_pending_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t n = 0;
    for (const auto& r : records_) n += r.audit_pending ? 1 : 0;
    return n;
}

} // namespace ztc
