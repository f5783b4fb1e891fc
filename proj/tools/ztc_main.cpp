// ztc: learn a Bayesian model from zero-trust activity logs, score access
// requests at enforcement points, and simulate cloud vs edge-cloud hybrid
// deployments of the decision pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ztc/dataset.hpp"
#include "ztc/decision.hpp"
#include "ztc/inference.hpp"
#include "ztc/search.hpp"
#include "ztc/simulator.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw ztc::ConfigError("cannot write file '" + path + "'");
    }
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ztc::ConfigError("cannot open file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// "a=b,c=d" -> map. Used for --evidence and --fraud.
std::map<std::string, std::string> parse_pairs(const std::string& text) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ztc::ConfigError("expected name=value, got '" + item + "'");
        }
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

std::vector<std::pair<int, int>> parse_edge_list(const std::vector<std::string>& specs,
                                                 const ztc::Schema& schema) {
    std::vector<std::pair<int, int>> edges;
    for (const std::string& spec : specs) {
        auto arrow = spec.find("->");
        if (arrow == std::string::npos) {
            throw ztc::ConfigError("expected src->dst, got '" + spec + "'");
        }
        edges.emplace_back(schema.require_var(spec.substr(0, arrow)),
                           schema.require_var(spec.substr(arrow + 2)));
    }
    return edges;
}

ztc::Dataset load_dataset(const std::string& path) {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
        return ztc::load_jsonl(path);
    }
    return ztc::load_csv(path);
}

json posterior_json(const ztc::BayesianNetwork& net, const std::string& target,
                    const std::map<std::string, std::string>& evidence_attrs) {
    int target_var = net.schema().require_var(target);
    ztc::Evidence evidence = ztc::resolve_evidence(net.schema(), evidence_attrs);
    std::vector<double> dist = ztc::query(net, target_var, evidence);
    json ev = json::object();
    for (const auto& [k, v] : evidence_attrs) ev[k] = v;
    return json{
        {"target", target},
        {"evidence", std::move(ev)},
        {"categories", net.schema().labels(target_var)},
        {"probabilities", dist},
    };
}

int run(int argc, char** argv) {
    CLI::App app{"learning-driven zero-trust decision engine and continuum simulator"};
    app.require_subcommand(1);

    // --- gen-data ---------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic activity log");
    std::uint64_t gen_seed = 1;
    long long gen_rows = 33;
    std::string gen_out = "activity_log.csv";
    std::string gen_labels_out;
    std::string gen_format = "csv";
    bool gen_paper = false;
    std::vector<std::string> gen_cards;
    std::string gen_fraud;
    double gen_strength = 1.0;
    double gen_fraction = 0.3;
    double gen_base_rate = 0.05;
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--rows", gen_rows, "row count");
    gen->add_option("--out", gen_out, "output dataset path");
    gen->add_option("--labels-out", gen_labels_out, "ground-truth labels CSV path");
    gen->add_option("--format", gen_format, "csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    gen->add_flag("--paper-cardinalities", gen_paper,
                  "use the illustration cardinalities (default)");
    gen->add_option("--card", gen_cards, "attribute cardinality override, name=count");
    gen->add_option("--fraud", gen_fraud, "fraud pattern, attr=value[,attr=value...]");
    gen->add_option("--fraud-strength", gen_strength, "P(blocked | pattern match)");
    gen->add_option("--fraud-fraction", gen_fraction, "fraction of rows forced onto the pattern");
    gen->add_option("--base-block-rate", gen_base_rate, "P(blocked) off the pattern");

    // --- learn ------------------------------------------------------------
    auto* learn = app.add_subcommand("learn", "learn structure and CPTs from an activity log");
    std::string learn_data;
    std::string learn_out = "model.json";
    std::string learn_report_out;
    std::string learn_trace_out;
    std::uint64_t learn_seed = 0;
    double learn_alpha = 1.0;
    int learn_max_parents = 3;
    int learn_max_iterations = 200;
    int learn_restarts = 0;
    int learn_exhaustive_max = 0;
    bool learn_no_other = false;
    bool learn_generic = false;
    std::string learn_ts_policy = "drop";
    std::string learn_edges;
    std::vector<std::string> learn_forbid;
    std::vector<std::string> learn_require;
    learn->add_option("--data", learn_data, "input dataset (csv or jsonl)")->required();
    learn->add_option("--out", learn_out, "model JSON path");
    learn->add_option("--report-out", learn_report_out, "score report JSON path");
    learn->add_option("--trace-out", learn_trace_out, "accepted-move trace JSONL path");
    learn->add_option("--seed", learn_seed, "search seed");
    learn->add_option("--alpha", learn_alpha, "CPT smoothing");
    learn->add_option("--max-parents", learn_max_parents, "parent cap per variable");
    learn->add_option("--max-iterations", learn_max_iterations, "accepted-move cap");
    learn->add_option("--restarts", learn_restarts, "random restarts");
    learn->add_option("--max-vars-exhaustive", learn_exhaustive_max,
                      "use exhaustive search when the schema has at most this many variables");
    learn->add_flag("--no-reserve-other", learn_no_other,
                    "do not add the reserved category for never-seen values");
    learn->add_flag("--generic", learn_generic,
                    "treat the input as an arbitrary categorical table, not an activity log");
    learn->add_option("--timestamp-policy", learn_ts_policy, "drop, hour, keep, or custom")
        ->check(CLI::IsMember({"drop", "hour", "keep", "custom"}));
    learn->add_option("--bucket-edges", learn_edges, "custom bucket edges, e.g. 0,100,200");
    learn->add_option("--forbid", learn_forbid, "forbidden edge src->dst");
    learn->add_option("--require", learn_require, "required edge src->dst");

    // --- query ------------------------------------------------------------
    auto* query_cmd = app.add_subcommand("query", "posterior for a target given evidence");
    std::string query_model;
    std::string query_target = ztc::kActionVar;
    std::string query_evidence;
    std::string query_out;
    query_cmd->add_option("--model", query_model, "model JSON path")->required();
    query_cmd->add_option("--target", query_target, "target variable");
    query_cmd->add_option("--evidence", query_evidence, "evidence, attr=value[,attr=value...]");
    query_cmd->add_option("--out", query_out, "output path (default stdout)");

    // --- effect -----------------------------------------------------------
    auto* effect = app.add_subcommand("effect", "per-attribute effect on the allow probability");
    std::string effect_model;
    std::string effect_attr;
    bool effect_all = false;
    std::string effect_mode = "conditional";
    std::string effect_format = "csv";
    std::string effect_out;
    effect->add_option("--model", effect_model, "model JSON path")->required();
    effect->add_option("--attribute", effect_attr, "one attribute");
    effect->add_flag("--all", effect_all, "every attribute");
    effect->add_option("--mode", effect_mode, "conditional or interventional")
        ->check(CLI::IsMember({"conditional", "interventional"}));
    effect->add_option("--format", effect_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    effect->add_option("--out", effect_out, "output path (default stdout)");

    // --- decide -----------------------------------------------------------
    auto* decide = app.add_subcommand("decide", "evaluate requests at a PEP");
    std::string decide_model;
    std::string decide_requests;
    std::string decide_out;
    double decide_theta_block = 0.5;
    double decide_theta_auto = 0.9;
    bool decide_unreachable = false;
    decide->add_option("--model", decide_model, "model JSON path")->required();
    decide->add_option("--requests", decide_requests, "request JSONL path")->required();
    decide->add_option("--out", decide_out, "decision JSONL path (default stdout)");
    decide->add_option("--theta-block", decide_theta_block, "local block threshold");
    decide->add_option("--theta-auto", decide_theta_auto, "autonomous allow threshold");
    decide->add_flag("--pdp-unreachable", decide_unreachable,
                     "evaluate as if the PDP cannot be reached");

    // --- simulate ---------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "run a continuum scenario");
    std::string sim_scenario;
    std::string sim_mode;
    std::string sim_metrics_out = "metrics.json";
    std::string sim_trace_out;
    std::string sim_plots_dir;
    std::string sim_write_default;
    sim->add_option("--scenario", sim_scenario, "scenario JSON path");
    sim->add_option("--mode", sim_mode, "override deployment mode: cloud or hybrid")
        ->check(CLI::IsMember({"", "cloud", "hybrid"}));
    sim->add_option("--out-metrics", sim_metrics_out, "metrics JSON path");
    sim->add_option("--out-trace", sim_trace_out, "event trace JSONL path");
    sim->add_option("--plots-dir", sim_plots_dir, "directory for plot-data CSVs");
    sim->add_option("--write-default-scenario", sim_write_default,
                    "write the default scenario to this path and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    if (gen->parsed()) {
        ztc::SyntheticConfig config = ztc::paper_cardinalities();
        if (!gen_cards.empty()) {
            for (const std::string& spec : gen_cards) {
                auto kv = parse_pairs(spec);
                for (const auto& [name, count] : kv) {
                    int parsed = 0;
                    try {
                        parsed = std::stoi(count);
                    } catch (const std::exception&) {
                        throw ztc::ConfigError("cardinality '" + count + "' is not an integer");
                    }
                    bool found = false;
                    for (auto& [attr, card] : config.cardinalities) {
                        if (attr == name) {
                            card = parsed;
                            found = true;
                        }
                    }
                    if (!found) {
                        throw ztc::ConfigError("unknown attribute '" + name + "'");
                    }
                }
            }
        }
        if (gen_rows < 1) {
            throw ztc::ConfigError("--rows must be >= 1");
        }
        config.rows = static_cast<std::size_t>(gen_rows);
        config.fraud_fraction = gen_fraction;
        config.base_block_rate = gen_base_rate;
        if (!gen_fraud.empty()) {
            for (const auto& [attr, value] : parse_pairs(gen_fraud)) {
                config.pattern.match.emplace_back(attr, value);
            }
            config.pattern.strength = gen_strength;
        } else {
            config.pattern.match.clear();
        }
        ztc::SyntheticData data = ztc::generate_synthetic(gen_seed, config);
        if (gen_format == "jsonl") {
            ztc::write_jsonl(data.dataset, gen_out);
        } else {
            ztc::write_csv(data.dataset, gen_out);
        }
        if (!gen_labels_out.empty()) {
            ztc::write_labels_csv(data.fraudulent, gen_labels_out);
        }
        return 0;
    }

    if (learn->parsed()) {
        ztc::Dataset dataset =
            learn_generic ? ztc::load_csv_generic(learn_data) : load_dataset(learn_data);
        if (dataset.schema.var_index("timestamp") < 0) {
            // Nothing to bucket or drop.
        } else if (learn_ts_policy == "drop") {
            dataset = ztc::apply_timestamp_policy(dataset, ztc::TimestampPolicy::drop);
        } else if (learn_ts_policy == "hour") {
            dataset = ztc::apply_timestamp_policy(dataset, ztc::TimestampPolicy::hour_of_day);
        } else if (learn_ts_policy == "custom") {
            std::vector<std::int64_t> edges;
            std::istringstream in(learn_edges);
            std::string item;
            while (std::getline(in, item, ',')) {
                try {
                    edges.push_back(std::stoll(item));
                } catch (const std::exception&) {
                    throw ztc::ConfigError("bucket edge '" + item + "' is not an integer");
                }
            }
            dataset = ztc::apply_timestamp_policy(dataset, ztc::TimestampPolicy::custom, edges);
        }

        ztc::SearchConfig config;
        config.seed = learn_seed;
        config.alpha = learn_alpha;
        config.max_parents = learn_max_parents;
        config.max_iterations = learn_max_iterations;
        config.random_restarts = learn_restarts;
        config.forbidden = parse_edge_list(learn_forbid, dataset.schema);
        config.required = parse_edge_list(learn_require, dataset.schema);

        ztc::SearchResult result;
        if (learn_exhaustive_max > 0 &&
            dataset.schema.size() <= static_cast<std::size_t>(learn_exhaustive_max)) {
            result = ztc::exhaustive_search(dataset, learn_alpha);
            if (!learn_no_other) {
                ztc::Dataset extended = dataset.with_other_schema();
                result.net = ztc::BayesianNetwork(
                    extended.schema, result.net.dag(),
                    ztc::fit_cpts(result.net.dag(), extended, learn_alpha),
                    result.net.edge_weights(), result.net.metadata());
            }
        } else {
            result = ztc::train_deployment_model(dataset, config, !learn_no_other);
        }

        ztc::save_model(result.net, learn_out);
        if (!learn_report_out.empty()) {
            json report{
                {"loglikelihood", result.report.loglikelihood},
                {"k", result.report.k},
                {"N", result.report.n},
                {"bic", result.report.bic},
            };
            write_text(learn_report_out, report.dump(2) + "\n");
        }
        if (!learn_trace_out.empty()) {
            write_text(learn_trace_out, ztc::trace_to_jsonl(result.trace));
        }
        return 0;
    }

    if (query_cmd->parsed()) {
        ztc::BayesianNetwork net = ztc::load_model(query_model);
        json doc = posterior_json(net, query_target, parse_pairs(query_evidence));
        std::string text = doc.dump(2) + "\n";
        if (query_out.empty()) {
            std::cout << text;
        } else {
            write_text(query_out, text);
        }
        return 0;
    }

    if (effect->parsed()) {
        ztc::BayesianNetwork net = ztc::load_model(effect_model);
        ztc::EffectMode mode = effect_mode == "conditional" ? ztc::EffectMode::conditional
                                                            : ztc::EffectMode::interventional;
        std::vector<ztc::EffectTable> tables;
        if (effect_all) {
            int action = net.action_var();
            for (std::size_t v = 0; v < net.var_count(); ++v) {
                if (static_cast<int>(v) == action) continue;
                tables.push_back(ztc::causal_effect(net, static_cast<int>(v), mode));
            }
        } else {
            if (effect_attr.empty()) {
                throw ztc::ConfigError("pass --attribute NAME or --all");
            }
            tables.push_back(
                ztc::causal_effect(net, net.schema().require_var(effect_attr), mode));
        }
        std::string text = effect_format == "csv"
                               ? ztc::effect_tables_to_csv(tables)
                               : ztc::effect_tables_to_json(tables).dump(2) + "\n";
        if (effect_out.empty()) {
            std::cout << text;
        } else {
            write_text(effect_out, text);
        }
        return 0;
    }

    if (decide->parsed()) {
        ztc::BayesianNetwork net = ztc::load_model(decide_model);
        ztc::Thresholds thresholds{decide_theta_block, decide_theta_auto};
        std::istringstream in(read_text(decide_requests));
        std::string line;
        std::string out_text;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded()) {
                throw ztc::ParseError("line " + std::to_string(line_no) +
                                      ": not a JSON object");
            }
            ztc::AccessRequest request;
            request.id = obj.value("request_id", "r" + std::to_string(line_no));
            request.node = obj.value("node", "local");
            request.time_ms = obj.value("time", 0.0);
            if (!obj.contains("evidence") || !obj.at("evidence").is_object()) {
                throw ztc::ParseError("line " + std::to_string(line_no) +
                                      ": missing evidence object");
            }
            for (const auto& [k, v] : obj.at("evidence").items()) {
                request.attributes[k] =
                    v.is_string() ? v.get<std::string>() : v.dump();
            }
            ztc::Decision decision =
                ztc::pep_evaluate(request, net, thresholds, !decide_unreachable);
            out_text += ztc::decision_log_line(request, decision);
            out_text += '\n';
        }
        if (decide_out.empty()) {
            std::cout << out_text;
        } else {
            write_text(decide_out, out_text);
        }
        return 0;
    }

    if (sim->parsed()) {
        if (!sim_write_default.empty()) {
            write_text(sim_write_default,
                       ztc::scenario_to_json(ztc::default_scenario()).dump(2) + "\n");
            return 0;
        }
        if (sim_scenario.empty()) {
            throw ztc::ConfigError("pass --scenario FILE or --write-default-scenario FILE");
        }
        json doc = json::parse(read_text(sim_scenario), nullptr, false);
        if (doc.is_discarded()) {
            throw ztc::ParseError("scenario file is not valid JSON");
        }
        ztc::Scenario scenario = ztc::scenario_from_json(doc);
        if (!sim_mode.empty()) {
            scenario.config.mode = ztc::mode_from_string(sim_mode);
        }
        ztc::SimResult result = ztc::run_sim(scenario.topology, scenario.config);
        write_text(sim_metrics_out, result.metrics.to_json().dump(2) + "\n");
        if (!sim_trace_out.empty()) {
            write_text(sim_trace_out, result.trace_jsonl);
        }
        if (!sim_plots_dir.empty()) {
            std::filesystem::create_directories(sim_plots_dir);
            write_text(sim_plots_dir + "/pdp_load.csv", ztc::pdp_load_csv(result.trace_jsonl));
            write_text(sim_plots_dir + "/staleness_histogram.csv",
                       ztc::staleness_histogram_csv(result.metrics));
            write_text(sim_plots_dir + "/confusion_matrix.csv",
                       ztc::confusion_matrix_csv(result.metrics));
        }
        return 0;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ztc::ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const ztc::SchemaError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const ztc::ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
