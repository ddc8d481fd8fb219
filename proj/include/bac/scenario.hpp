#pragma once

// Scenario loading, the end-to-end analysis pipeline, the cross-check
// harness, and CSV/JSON exports. Scenarios are JSON files that either name
// a builder with parameters or spell out explicit agent/environment tables.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bac/agents.hpp"
#include "bac/core.hpp"
#include "bac/distortion.hpp"
#include "bac/envs.hpp"
#include "bac/minimize.hpp"
#include "bac/product.hpp"
#include "bac/random_fixtures.hpp"
#include "bac/value.hpp"

namespace bac {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Thrown when a scenario parses but its agent/environment fail validation.
struct ValidationFailure : std::runtime_error {
    ValidationReport report;
    explicit ValidationFailure(ValidationReport rep)
        : std::runtime_error(rep.issues.empty() ? "validation failed"
                                                : "validation failed: " + rep.issues.front()),
          report(std::move(rep)) {}
};

struct AnalysisOptions {
    int oracle_depth = 6;
    int exact_budget = 64;
    double beta = 0.0;
    double epsilon = 0.0;
    double tolerance = kDistTol;
    int workers = 1;
    int mc_rollouts = 10000;
    int mc_horizon = 256;
    uint64_t seed = 1;
};

struct Scenario {
    Interface iface;
    BoundedAgent agent;
    FiniteEnvironment env;
    PerformanceSpec spec;
    AnalysisOptions options;
    std::string digest;  // FNV-1a over the scenario bytes
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ActionDist parse_dist(const json& j, const std::vector<std::string>& symbols) {
    ActionDist d{std::vector<double>(symbols.size(), 0.0)};
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto pos = std::find(symbols.begin(), symbols.end(), it.key());
        if (pos == symbols.end()) throw InputError("unknown symbol in distribution: " + it.key());
        d.probs[pos - symbols.begin()] = it.value().get<double>();
    }
    return d;
}

inline BoundedAgent parse_explicit_agent(const json& j, const Interface& iface) {
    BoundedAgent a;
    a.state_names = j.at("states").get<std::vector<std::string>>();
    auto state_index = [&](const std::string& name) {
        for (int i = 0; i < a.num_states(); ++i)
            if (a.state_names[i] == name) return i;
        throw InputError("unknown agent state: " + name);
    };
    a.start = state_index(j.at("start").get<std::string>());
    a.policy.assign(a.num_states(), ActionDist{std::vector<double>(iface.num_actions(), 0.0)});
    for (auto it = j.at("policy").begin(); it != j.at("policy").end(); ++it)
        a.policy[state_index(it.key())] = parse_dist(it.value(), iface.actions);
    a.update.assign(a.num_states(),
                    std::vector<std::vector<int>>(iface.num_actions(),
                                                  std::vector<int>(iface.num_observations(), -1)));
    for (auto su = j.at("update").begin(); su != j.at("update").end(); ++su) {
        int s = state_index(su.key());
        for (auto au = su.value().begin(); au != su.value().end(); ++au) {
            int act = iface.action_index(au.key());
            for (auto ou = au.value().begin(); ou != au.value().end(); ++ou)
                a.update[s][act][iface.observation_index(ou.key())] =
                    state_index(ou.value().get<std::string>());
        }
    }
    return a;
}

inline FiniteEnvironment parse_explicit_env(const json& j, const Interface& iface) {
    FiniteEnvironment e;
    e.state_names = j.at("states").get<std::vector<std::string>>();
    auto state_index = [&](const std::string& name) {
        for (int i = 0; i < e.num_states(); ++i)
            if (e.state_names[i] == name) return i;
        throw InputError("unknown env state: " + name);
    };
    e.start = state_index(j.at("start").get<std::string>());
    const int n = e.num_states(), na = iface.num_actions(), no = iface.num_observations();
    e.emission.assign(n, std::vector<std::vector<double>>(na, std::vector<double>(no, 0.0)));
    e.update.assign(n, std::vector<std::vector<int>>(na, std::vector<int>(no, -1)));
    e.reward.assign(n, std::vector<std::vector<double>>(na, std::vector<double>(no, 0.0)));
    for (auto xu = j.at("emission").begin(); xu != j.at("emission").end(); ++xu) {
        int x = state_index(xu.key());
        for (auto au = xu.value().begin(); au != xu.value().end(); ++au)
            e.emission[x][iface.action_index(au.key())] =
                parse_dist(au.value(), iface.observations).probs;
    }
    for (auto xu = j.at("update").begin(); xu != j.at("update").end(); ++xu) {
        int x = state_index(xu.key());
        for (auto au = xu.value().begin(); au != xu.value().end(); ++au) {
            int act = iface.action_index(au.key());
            for (auto ou = au.value().begin(); ou != au.value().end(); ++ou)
                e.update[x][act][iface.observation_index(ou.key())] =
                    state_index(ou.value().get<std::string>());
        }
    }
    if (j.contains("reward"))
        for (auto xu = j.at("reward").begin(); xu != j.at("reward").end(); ++xu) {
            int x = state_index(xu.key());
            for (auto au = xu.value().begin(); au != xu.value().end(); ++au) {
                int act = iface.action_index(au.key());
                for (auto ou = au.value().begin(); ou != au.value().end(); ++ou)
                    e.reward[x][act][iface.observation_index(ou.key())] =
                        ou.value().get<double>();
            }
        }
    return e;
}

}  // namespace detail

inline std::vector<std::string> known_agent_builders() {
    return {"constant", "memoryless", "korder", "switching", "bounded_q", "random", "explicit"};
}
inline std::vector<std::string> known_env_builders() {
    return {"bandit", "mdp", "movestay", "clocked", "random", "random_mdp", "explicit"};
}

inline BoundedAgent build_agent(const json& j, const Interface& iface) {
    if (j.contains("explicit")) return detail::parse_explicit_agent(j.at("explicit"), iface);
    std::string name = j.at("builder").get<std::string>();
    json params = j.value("params", json::object());
    if (name == "constant")
        return constant_agent(detail::parse_dist(params.at("dist"), iface.actions), iface);
    if (name == "memoryless") {
        std::vector<ActionDist> policy(iface.num_observations());
        for (auto it = params.at("policy").begin(); it != params.at("policy").end(); ++it)
            policy[iface.observation_index(it.key())] =
                detail::parse_dist(it.value(), iface.actions);
        int o_init = iface.observation_index(params.value("o_init", iface.observations[0]));
        return memoryless_agent(policy, o_init, iface);
    }
    if (name == "korder") {
        int k = params.at("k").get<int>();
        int no = iface.num_observations();
        int n = 1;
        for (int i = 0; i < k; ++i) n *= no;
        std::vector<ActionDist> policy(n);
        // windows keyed "oA,oB,..." oldest first
        for (auto it = params.at("policy").begin(); it != params.at("policy").end(); ++it) {
            std::istringstream ss(it.key());
            std::string tok;
            int idx = 0, seen = 0;
            while (std::getline(ss, tok, ',')) {
                idx = idx * no + iface.observation_index(tok);
                ++seen;
            }
            if (seen != k) throw InputError("window key has wrong length: " + it.key());
            policy[idx] = detail::parse_dist(it.value(), iface.actions);
        }
        int pad = iface.observation_index(params.value("pad", iface.observations[0]));
        return korder_agent(k, policy, pad, iface);
    }
    if (name == "switching")
        return switching_agent(params.at("n_switch").get<int>(),
                               detail::parse_dist(params.at("dist_a"), iface.actions),
                               detail::parse_dist(params.at("dist_b"), iface.actions),
                               detail::parse_dist(params.at("dist_final"), iface.actions), iface);
    if (name == "bounded_q") {
        QAgentConfig cfg;
        cfg.q_grid = params.at("q_grid").get<std::vector<double>>();
        cfg.alpha = params.at("alpha").get<double>();
        cfg.epsilon = params.at("epsilon").get<double>();
        cfg.obs_aggregation.assign(iface.num_observations(), 0);
        for (auto it = params.at("obs_aggregation").begin();
             it != params.at("obs_aggregation").end(); ++it)
            cfg.obs_aggregation[iface.observation_index(it.key())] = it.value().get<int>();
        int n_cells = 0;
        for (int c : cfg.obs_aggregation) n_cells = std::max(n_cells, c + 1);
        cfg.reward_channel.assign(iface.num_actions(), std::vector<double>(n_cells, 0.0));
        // keyed action -> cell index (as a string) -> reconstructed reward
        for (auto au = params.at("reward_channel").begin();
             au != params.at("reward_channel").end(); ++au) {
            int a = iface.action_index(au.key());
            for (auto cu = au.value().begin(); cu != au.value().end(); ++cu) {
                int cell = std::stoi(cu.key());
                if (cell < 0 || cell >= n_cells)
                    throw InputError("reward_channel cell out of range: " + cu.key());
                cfg.reward_channel[a][cell] = cu.value().get<double>();
            }
        }
        cfg.q_init = params.value("q_init", 0.0);
        cfg.q_gamma = params.value("q_gamma", 0.0);
        cfg.init_cell = params.value("init_cell", 0);
        return bounded_q_agent(cfg, iface);
    }
    if (name == "random")
        return random_agent(params.at("seed").get<uint64_t>(), iface,
                            params.value("max_states", 4));
    throw InputError("unknown agent builder: " + name);
}

inline FiniteEnvironment build_env(const json& j, const Interface& iface) {
    if (j.contains("explicit")) return detail::parse_explicit_env(j.at("explicit"), iface);
    std::string name = j.at("builder").get<std::string>();
    json params = j.value("params", json::object());
    if (name == "bandit") {
        std::vector<double> rewards(iface.num_actions(), 0.0);
        for (auto it = params.at("rewards").begin(); it != params.at("rewards").end(); ++it)
            rewards[iface.action_index(it.key())] = it.value().get<double>();
        return bandit_env(rewards, iface);
    }
    if (name == "mdp") {
        const int nx = iface.num_observations(), na = iface.num_actions();
        std::vector<std::vector<std::vector<double>>> trans(
            nx, std::vector<std::vector<double>>(na, std::vector<double>(nx, 0.0)));
        std::vector<std::vector<std::vector<double>>> rew(
            nx, std::vector<std::vector<double>>(na, std::vector<double>(nx, 0.0)));
        for (auto xu = params.at("transitions").begin(); xu != params.at("transitions").end();
             ++xu) {
            int x = iface.observation_index(xu.key());
            for (auto au = xu.value().begin(); au != xu.value().end(); ++au)
                trans[x][iface.action_index(au.key())] =
                    detail::parse_dist(au.value(), iface.observations).probs;
        }
        if (params.contains("rewards"))
            for (auto xu = params.at("rewards").begin(); xu != params.at("rewards").end(); ++xu) {
                int x = iface.observation_index(xu.key());
                for (auto au = xu.value().begin(); au != xu.value().end(); ++au) {
                    int a = iface.action_index(au.key());
                    for (auto ou = au.value().begin(); ou != au.value().end(); ++ou)
                        rew[x][a][iface.observation_index(ou.key())] = ou.value().get<double>();
                }
            }
        int start = iface.observation_index(params.value("start", iface.observations[0]));
        return mdp_env(trans, rew, start, iface);
    }
    if (name == "movestay") return move_stay_env(iface);
    if (name == "clocked") {
        FiniteEnvironment base = build_env(params.at("base"), iface);
        return clocked_env(base, params.at("switch_time").get<int>(),
                           params.at("reward_before").get<double>(),
                           params.at("reward_after").get<double>(), iface);
    }
    if (name == "random")
        return random_env(params.at("seed").get<uint64_t>(), iface,
                          params.value("max_states", 4));
    if (name == "random_mdp") return random_mdp(params.at("seed").get<uint64_t>(), iface);
    throw InputError("unknown environment builder: " + name);
}

inline Scenario parse_scenario(const json& j, const std::string& raw_bytes) {
    Scenario sc;
    sc.digest = detail::fnv1a_hex(raw_bytes);
    sc.iface.actions = j.at("interface").at("actions").get<std::vector<std::string>>();
    sc.iface.observations = j.at("interface").at("observations").get<std::vector<std::string>>();
    if (sc.iface.actions.empty() || sc.iface.observations.empty())
        throw InputError("interface alphabets must be non-empty");
    sc.agent = build_agent(j.at("agent"), sc.iface);
    sc.env = build_env(j.at("environment"), sc.iface);
    const auto& perf = j.at("performance");
    std::string kind = perf.at("kind").get<std::string>();
    if (kind == "myopic")
        sc.spec = PerformanceSpec::myopic();
    else if (kind == "discounted")
        sc.spec = PerformanceSpec::discounted(perf.at("gamma").get<double>());
    else if (kind == "average")
        sc.spec = PerformanceSpec::average();
    else
        throw InputError("unknown performance kind: " + kind);
    if (j.contains("analysis")) {
        const auto& opt = j.at("analysis");
        sc.options.oracle_depth = opt.value("oracle_depth", sc.options.oracle_depth);
        sc.options.exact_budget = opt.value("exact_budget", sc.options.exact_budget);
        sc.options.beta = opt.value("beta", sc.options.beta);
        sc.options.epsilon = opt.value("epsilon", sc.options.epsilon);
        sc.options.tolerance = opt.value("tolerance", sc.options.tolerance);
        sc.options.mc_rollouts = opt.value("mc_rollouts", sc.options.mc_rollouts);
        sc.options.mc_horizon = opt.value("mc_horizon", sc.options.mc_horizon);
    }
    sc.options.seed = j.value("seed", sc.options.seed);
    auto arep = validate_agent(sc.agent, sc.iface);
    auto erep = validate_env(sc.env, sc.iface);
    if (!arep.ok() || !erep.ok()) {
        for (auto& msg : erep.issues) arep.add(msg);
        throw ValidationFailure(std::move(arep));
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("scenario parse error: ") + e.what());
    }
    return parse_scenario(j, buf.str());
}

/// End-to-end analysis result. Sequences run t = 0 .. preperiod + period.
struct AnalysisReport {
    std::string tool_version = kToolVersion;
    std::string scenario_digest;
    int agent_size = 0;
    int nodes = 0, num_edges = 0;
    int preperiod = 0, period = 1;
    SizeSequence size;
    int t_beta = -1;  // -1 when the size sequence is bounds-only
    DistortionSequence distortion;
    int t_eps = 0;
    PerformanceSpec spec;
};

inline AnalysisReport cmd_analyze(const Scenario& sc, int workers = 1) {
    AnalysisReport rep;
    rep.scenario_digest = sc.digest;
    rep.agent_size = sc.agent.num_states();
    rep.spec = sc.spec;
    auto g = build_product(sc.agent, sc.env, sc.iface);
    rep.nodes = g.num_nodes();
    for (const auto& es : g.edges) rep.num_edges += static_cast<int>(es.size());
    auto ls = layer_sequence(g);
    rep.preperiod = ls.preperiod;
    rep.period = ls.period;
    rep.size = size_sequence(g, ls, sc.iface, sc.options.exact_budget, workers,
                             sc.options.tolerance);
    if (rep.size.exact) rep.t_beta = convergence_time_beta(rep.size, sc.options.beta);
    auto vt = exact_value(g, sc.spec);
    rep.distortion = distortion_sequence(g, vt, ls);
    rep.t_eps = convergence_time_eps(rep.distortion, sc.options.epsilon);
    return rep;
}

inline json report_to_json(const AnalysisReport& rep) {
    json j;
    j["tool_version"] = rep.tool_version;
    j["scenario_digest"] = rep.scenario_digest;
    j["agent_size"] = rep.agent_size;
    j["product"] = {{"nodes", rep.nodes},
                    {"edges", rep.num_edges},
                    {"preperiod", rep.preperiod},
                    {"period", rep.period}};
    j["performance"] = {{"kind", to_string(rep.spec.kind)}, {"gamma", rep.spec.gamma}};
    j["size"] = {{"values", rep.size.values},
                 {"limit", rep.size.limit},
                 {"exact", rep.size.exact},
                 {"t_beta", rep.t_beta},
                 {"per_node_sizes", rep.size.per_node_sizes},
                 {"per_node_lower_bounds", rep.size.per_node_lower}};
    j["distortion"] = {{"values", rep.distortion.values},
                       {"limit", rep.distortion.limit},
                       {"t_eps", rep.t_eps}};
    return j;
}

/// CSV export with columns (t, c_t, delta_t); LF line endings.
inline std::string report_to_csv(const AnalysisReport& rep) {
    std::ostringstream os;
    os.precision(17);
    os << "t,c_t,delta_t\n";
    size_t n = std::max(rep.size.values.size(), rep.distortion.values.size());
    for (size_t t = 0; t < n; ++t) {
        os << t << ',';
        if (t < rep.size.values.size()) os << rep.size.values[t];
        os << ',';
        if (t < rep.distortion.values.size()) os << rep.distortion.values[t];
        os << '\n';
    }
    return os.str();
}

inline void cmd_export(const AnalysisReport& rep, const std::string& format,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    if (format == "csv")
        out << report_to_csv(rep);
    else if (format == "json")
        out << report_to_json(rep).dump(2) << '\n';
    else
        throw InputError("unknown export format: " + format);
}

/// One engine-vs-oracle comparison.
struct CrosscheckEntry {
    std::string name;
    double engine = 0, oracle = 0;
    bool match = true;
    std::string note;
};

struct CrosscheckReport {
    std::vector<CrosscheckEntry> entries;
    bool ok() const {
        for (const auto& e : entries)
            if (!e.match) return false;
        return true;
    }
};

/// Run the independent oracles against the engine: brute-force distortion
/// over explicit histories, exhaustive minimal size on tiny machines, and
/// Monte-Carlo value estimation. Oracle budget overruns degrade single
/// entries to notes; they never fail the other checks.
inline CrosscheckReport cmd_crosscheck(const Scenario& sc, int depth) {
    CrosscheckReport rep;
    auto g = build_product(sc.agent, sc.env, sc.iface);
    auto ls = layer_sequence(g);
    auto vt = exact_value(g, sc.spec);

    {
        CrosscheckEntry e;
        e.name = "distortion_t0";
        e.engine = distortion_at(g, vt, reachable_from_time(ls, 0));
        try {
            e.oracle = distortion_oracle(sc.agent, sc.env, sc.iface, sc.spec, depth, 0);
            bool sufficient = depth >= ls.preperiod + ls.period + g.num_nodes();
            if (sufficient) {
                e.match = std::fabs(e.engine - e.oracle) <= 1e-9;
            } else {
                e.match = e.oracle <= e.engine + 1e-9;
                e.note = "lower bound only (depth " + std::to_string(depth) + ")";
            }
        } catch (const ResourceError& err) {
            e.match = true;
            e.note = std::string("oracle skipped: ") + err.what();
        }
        rep.entries.push_back(e);
    }
    {
        CrosscheckEntry e;
        e.name = "size_root";
        auto m = future_machine(g, 0, sc.options.tolerance);
        auto exact = min_closed_cover(m, sc.iface.num_actions(), sc.iface.num_observations(),
                                      sc.options.exact_budget);
        e.engine = exact.size;
        if (m.num_inputs > 4 || !exact.exact) {
            e.match = true;
            e.note = "oracle skipped: instance outside the exhaustive budget";
        } else {
            try {
                int o = size_oracle(m, 3);
                e.oracle = o;
                e.match = exact.size <= 3 ? (o == exact.size) : (o == 4);
            } catch (const ResourceError& err) {
                e.match = true;
                e.note = std::string("oracle skipped: ") + err.what();
            }
        }
        rep.entries.push_back(e);
    }
    if (sc.spec.kind != PerformanceKind::Average) {
        CrosscheckEntry e;
        e.name = "value_mc_start";
        e.engine = vt.values[0];
        auto mc = mc_estimate_value(sc.agent, sc.env, g.nodes[0], sc.spec,
                                    sc.options.mc_rollouts, sc.options.mc_horizon,
                                    sc.options.seed);
        e.oracle = mc.estimate;
        e.match = std::fabs(mc.estimate - vt.values[0]) <= 3 * mc.ci_halfwidth + 1e-9;
        rep.entries.push_back(e);
    }
    return rep;
}

inline json crosscheck_to_json(const CrosscheckReport& rep) {
    json j;
    j["ok"] = rep.ok();
    j["checks"] = json::array();
    for (const auto& e : rep.entries)
        j["checks"].push_back({{"name", e.name},
                               {"engine", e.engine},
                               {"oracle", e.oracle},
                               {"match", e.match},
                               {"note", e.note}});
    return j;
}

}  // namespace bac
