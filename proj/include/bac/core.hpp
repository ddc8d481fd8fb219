#pragma once

// Core domain types: interfaces, action distributions, bounded agents,
// finite environments, performance specs, and histories. All types are
// immutable in practice (built once, then only read) and all operations
// here are pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bac {

// Error categories surfaced by the engine. Validation issues are data
// (see ValidationReport); these are thrown for actual faults.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kDistTol = 1e-12;     // distribution normalization / equality
constexpr double kEdgeSumTol = 1e-9;   // outgoing edge mass per product node

/// Agent-environment interface: ordered action and observation alphabets.
/// The declaration order is fixed and used for tie-breaking everywhere.
struct Interface {
    std::vector<std::string> actions;
    std::vector<std::string> observations;

    int num_actions() const { return static_cast<int>(actions.size()); }
    int num_observations() const { return static_cast<int>(observations.size()); }

    int action_index(const std::string& name) const {
        for (int i = 0; i < num_actions(); ++i)
            if (actions[i] == name) return i;
        throw InputError("unknown action: " + name);
    }
    int observation_index(const std::string& name) const {
        for (int i = 0; i < num_observations(); ++i)
            if (observations[i] == name) return i;
        throw InputError("unknown observation: " + name);
    }
};

/// A probability distribution over action indices. Support is explicit:
/// an action is in the support iff its stored probability is > 0,
/// regardless of magnitude.
struct ActionDist {
    std::vector<double> probs;  // indexed by action

    double mass() const {
        double s = 0;
        for (double p : probs) s += p;
        return s;
    }
    std::vector<int> support() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(probs.size()); ++i)
            if (probs[i] > 0) out.push_back(i);
        return out;
    }
};

/// Componentwise distribution equality at tolerance `tol`. At tol = 0 this
/// is an equivalence relation; at tol > 0 it is reflexive and symmetric.
inline bool dist_equal(const ActionDist& a, const ActionDist& b, double tol = kDistTol) {
    if (a.probs.size() != b.probs.size()) return false;
    for (size_t i = 0; i < a.probs.size(); ++i)
        if (std::fabs(a.probs[i] - b.probs[i]) > tol) return false;
    return true;
}

/// Canonicalize a distribution so that equal-at-tol distributions compare
/// equal by operator== on the rounded representation.
struct CanonicalDist {
    ActionDist dist;
    double tol;
};

inline CanonicalDist canonical_dist(const ActionDist& d, double tol = kDistTol) {
    return CanonicalDist{d, tol};
}

inline bool operator==(const CanonicalDist& a, const CanonicalDist& b) {
    return dist_equal(a.dist, b.dist, std::max(a.tol, b.tol));
}

/// A bounded agent: finite state set, start state, per-state stochastic
/// policy, and a total deterministic state-update u : S x A x O -> S.
struct BoundedAgent {
    std::vector<std::string> state_names;
    int start = 0;
    std::vector<ActionDist> policy;            // [state]
    std::vector<std::vector<std::vector<int>>> update;  // [state][action][obs] -> state

    int num_states() const { return static_cast<int>(state_names.size()); }

    int step(int s, int a, int o) const { return update[s][a][o]; }
};

/// A finite environment: finite env-state set, stochastic observation
/// emission e(o | x, a), a deterministic state update, and a transition
/// reward r(x, a, o).
struct FiniteEnvironment {
    std::vector<std::string> state_names;
    int start = 0;
    std::vector<std::vector<std::vector<double>>> emission;  // [x][a][o] -> prob
    std::vector<std::vector<std::vector<int>>> update;       // [x][a][o] -> x'
    std::vector<std::vector<std::vector<double>>> reward;    // [x][a][o] -> r

    int num_states() const { return static_cast<int>(state_names.size()); }

    std::pair<double, double> reward_bounds() const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& per_x : reward)
            for (const auto& per_a : per_x)
                for (double r : per_a) {
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
        if (!(lo <= hi)) { lo = 0; hi = 0; }
        return {lo, hi};
    }
};

enum class PerformanceKind { Myopic, Discounted, Average };

inline std::string to_string(PerformanceKind k) {
    switch (k) {
        case PerformanceKind::Myopic: return "myopic";
        case PerformanceKind::Discounted: return "discounted";
        case PerformanceKind::Average: return "average";
    }
    return "?";
}

/// Which statistic of future reward defines performance, plus the derived
/// value bounds for a given environment.
struct PerformanceSpec {
    PerformanceKind kind = PerformanceKind::Myopic;
    double gamma = 0.0;  // meaningful for Discounted only

    static PerformanceSpec myopic() { return {PerformanceKind::Myopic, 0.0}; }
    static PerformanceSpec discounted(double gamma) {
        if (!(gamma >= 0.0 && gamma < 1.0))
            throw InputError("discount factor must lie in [0,1)");
        return {PerformanceKind::Discounted, gamma};
    }
    static PerformanceSpec average() { return {PerformanceKind::Average, 0.0}; }

    std::pair<double, double> value_bounds(const FiniteEnvironment& env) const {
        auto [rmin, rmax] = env.reward_bounds();
        switch (kind) {
            case PerformanceKind::Myopic:
            case PerformanceKind::Average:
                return {rmin, rmax};
            case PerformanceKind::Discounted:
                return {rmin / (1.0 - gamma), rmax / (1.0 - gamma)};
        }
        return {rmin, rmax};
    }
};

/// An alternating action/observation sequence, stored as (action, obs)
/// index pairs. The empty history is valid.
struct History {
    std::vector<std::pair<int, int>> steps;

    size_t length() const { return steps.size(); }
};

/// Accumulated well-formedness violations. Violations are data, not faults:
/// an empty report means the object satisfies all its invariants.
struct ValidationReport {
    std::vector<std::string> issues;

    bool ok() const { return issues.empty(); }
    void add(std::string msg) { issues.push_back(std::move(msg)); }
};

inline ValidationReport validate_agent(const BoundedAgent& agent, const Interface& iface) {
    ValidationReport rep;
    const int n = agent.num_states();
    const int na = iface.num_actions();
    const int no = iface.num_observations();
    if (n == 0) {
        rep.add("agent has no states");
        return rep;
    }
    if (agent.start < 0 || agent.start >= n)
        rep.add("start state out of range");
    if (static_cast<int>(agent.policy.size()) != n)
        rep.add("policy not defined for every state");
    for (int s = 0; s < std::min<int>(n, agent.policy.size()); ++s) {
        const auto& d = agent.policy[s];
        if (static_cast<int>(d.probs.size()) != na) {
            rep.add("policy at state " + agent.state_names[s] + " has wrong arity");
            continue;
        }
        bool neg = false;
        for (double p : d.probs)
            if (p < 0) neg = true;
        if (neg) rep.add("policy at state " + agent.state_names[s] + " has negative probability");
        if (std::fabs(d.mass() - 1.0) > kDistTol)
            rep.add("policy at state " + agent.state_names[s] + " does not sum to 1");
        if (d.support().empty())
            rep.add("policy at state " + agent.state_names[s] + " has empty support");
    }
    if (static_cast<int>(agent.update.size()) != n) {
        rep.add("update not defined for every state");
        return rep;
    }
    for (int s = 0; s < n; ++s) {
        if (static_cast<int>(agent.update[s].size()) != na) {
            rep.add("update at state " + agent.state_names[s] + " missing action rows");
            continue;
        }
        for (int a = 0; a < na; ++a) {
            if (static_cast<int>(agent.update[s][a].size()) != no) {
                rep.add("update at (" + agent.state_names[s] + ", " + iface.actions[a] +
                        ") missing observation entries");
                continue;
            }
            for (int o = 0; o < no; ++o) {
                int t = agent.update[s][a][o];
                if (t < 0 || t >= n)
                    rep.add("update at (" + agent.state_names[s] + ", " + iface.actions[a] +
                            ", " + iface.observations[o] + ") targets a dangling state");
            }
        }
    }
    return rep;
}

inline ValidationReport validate_env(const FiniteEnvironment& env, const Interface& iface) {
    ValidationReport rep;
    const int n = env.num_states();
    const int na = iface.num_actions();
    const int no = iface.num_observations();
    if (n == 0) {
        rep.add("environment has no states");
        return rep;
    }
    if (env.start < 0 || env.start >= n)
        rep.add("start state out of range");
    auto arity_ok = [&](const auto& table, const char* what) {
        if (static_cast<int>(table.size()) != n) {
            rep.add(std::string(what) + " not defined for every state");
            return false;
        }
        for (const auto& per_x : table) {
            if (static_cast<int>(per_x.size()) != na) {
                rep.add(std::string(what) + " missing action rows");
                return false;
            }
            for (const auto& per_a : per_x)
                if (static_cast<int>(per_a.size()) != no) {
                    rep.add(std::string(what) + " missing observation entries");
                    return false;
                }
        }
        return true;
    };
    if (!arity_ok(env.emission, "emission") || !arity_ok(env.update, "update") ||
        !arity_ok(env.reward, "reward"))
        return rep;
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < na; ++a) {
            double mass = 0;
            bool has_support = false, neg = false;
            for (int o = 0; o < no; ++o) {
                double p = env.emission[x][a][o];
                if (p < 0) neg = true;
                if (p > 0) has_support = true;
                mass += p;
            }
            if (neg)
                rep.add("emission at (" + env.state_names[x] + ", " + iface.actions[a] +
                        ") has negative probability");
            if (std::fabs(mass - 1.0) > kDistTol)
                rep.add("emission at (" + env.state_names[x] + ", " + iface.actions[a] +
                        ") does not sum to 1");
            if (!has_support)
                rep.add("emission at (" + env.state_names[x] + ", " + iface.actions[a] +
                        ") has empty support");
            for (int o = 0; o < no; ++o) {
                int t = env.update[x][a][o];
                if (t < 0 || t >= n)
                    rep.add("env update at (" + env.state_names[x] + ", " + iface.actions[a] +
                            ", " + iface.observations[o] + ") targets a dangling state");
                if (!std::isfinite(env.reward[x][a][o]))
                    rep.add("reward at (" + env.state_names[x] + ", " + iface.actions[a] +
                            ", " + iface.observations[o] + ") is not finite");
            }
        }
    return rep;
}

/// Fold the state update over a history starting from the start state.
/// The empty history returns the start state.
inline int run_update(const BoundedAgent& agent, const History& h) {
    int s = agent.start;
    for (auto [a, o] : h.steps) {
        if (a < 0 || o < 0 || s >= agent.num_states() ||
            a >= static_cast<int>(agent.update[s].size()) ||
            o >= static_cast<int>(agent.update[s][a].size()))
            throw InputError("history uses symbols outside the agent's interface");
        s = agent.update[s][a][o];
    }
    return s;
}

/// Counterexample for the last-observation condition: two update entries
/// with different observations landing on the same successor.
struct LastObsWitness {
    int s, a, o;
    int s2, a2, o2;
};

/// True iff u(s,a,o) = u(s',a',o') implies o = o'. When false, a witness
/// pair is returned.
inline std::pair<bool, std::optional<LastObsWitness>>
check_last_obs_condition(const BoundedAgent& agent) {
    const int n = agent.num_states();
    // first (s,a,o) seen per successor state, per observation class
    std::vector<std::array<int, 3>> seen(n, {-1, -1, -1});
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < static_cast<int>(agent.update[s].size()); ++a)
            for (int o = 0; o < static_cast<int>(agent.update[s][a].size()); ++o) {
                int t = agent.update[s][a][o];
                if (seen[t][0] == -1) {
                    seen[t] = {s, a, o};
                } else if (seen[t][2] != o) {
                    return {false, LastObsWitness{seen[t][0], seen[t][1], seen[t][2], s, a, o}};
                }
            }
    return {true, std::nullopt};
}

}  // namespace bac
