#pragma once

// Seeded random agents, environments, and incompletely specified machines.
// All draws go through mt19937_64 plus explicit mappings, so fixtures are
// bit-reproducible across platforms and standard libraries.

#include <cstdint>
#include <random>
#include <vector>

#include "bac/core.hpp"
#include "bac/minimize.hpp"

namespace bac {
namespace rnd {

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int below(std::mt19937_64& rng, int n) {
    return static_cast<int>(rng() % static_cast<uint64_t>(n));
}

/// Random distribution over n symbols with a random non-empty support.
/// Probabilities are normalized exactly (last entry absorbs the residual).
inline ActionDist dist(std::mt19937_64& rng, int n) {
    std::vector<int> support;
    for (int i = 0; i < n; ++i)
        if (unit(rng) < 0.6) support.push_back(i);
    if (support.empty()) support.push_back(below(rng, n));
    ActionDist d{std::vector<double>(n, 0.0)};
    double total = 0;
    std::vector<double> raw(support.size());
    for (auto& w : raw) {
        w = 0.05 + unit(rng);
        total += w;
    }
    double acc = 0;
    for (size_t i = 0; i + 1 < support.size(); ++i) {
        d.probs[support[i]] = raw[i] / total;
        acc += d.probs[support[i]];
    }
    d.probs[support.back()] = 1.0 - acc;
    return d;
}

}  // namespace rnd

inline Interface random_interface(uint64_t seed, int max_actions = 3, int max_obs = 3) {
    std::mt19937_64 rng(seed);
    Interface iface;
    int na = 1 + rnd::below(rng, max_actions);
    int no = 1 + rnd::below(rng, max_obs);
    for (int i = 0; i < na; ++i) iface.actions.push_back("a" + std::to_string(i));
    for (int i = 0; i < no; ++i) iface.observations.push_back("o" + std::to_string(i));
    return iface;
}

inline BoundedAgent random_agent(uint64_t seed, const Interface& iface, int max_states = 4) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    const int n = 1 + rnd::below(rng, max_states);
    const int na = iface.num_actions(), no = iface.num_observations();
    BoundedAgent a;
    for (int s = 0; s < n; ++s) a.state_names.push_back("s" + std::to_string(s));
    a.start = 0;
    for (int s = 0; s < n; ++s) a.policy.push_back(rnd::dist(rng, na));
    a.update.assign(n, std::vector<std::vector<int>>(na, std::vector<int>(no, 0)));
    for (int s = 0; s < n; ++s)
        for (int act = 0; act < na; ++act)
            for (int o = 0; o < no; ++o) a.update[s][act][o] = rnd::below(rng, n);
    return a;
}

inline FiniteEnvironment random_env(uint64_t seed, const Interface& iface, int max_states = 4,
                                    double reward_lo = -1.0, double reward_hi = 1.0) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 2);
    const int n = 1 + rnd::below(rng, max_states);
    const int na = iface.num_actions(), no = iface.num_observations();
    FiniteEnvironment e;
    for (int x = 0; x < n; ++x) e.state_names.push_back("x" + std::to_string(x));
    e.start = 0;
    e.emission.assign(n, std::vector<std::vector<double>>(na));
    e.update.assign(n, std::vector<std::vector<int>>(na, std::vector<int>(no, 0)));
    e.reward.assign(n, std::vector<std::vector<double>>(na, std::vector<double>(no, 0.0)));
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < na; ++a) {
            e.emission[x][a] = rnd::dist(rng, no).probs;
            for (int o = 0; o < no; ++o) {
                e.update[x][a][o] = rnd::below(rng, n);
                e.reward[x][a][o] = reward_lo + (reward_hi - reward_lo) * rnd::unit(rng);
            }
        }
    return e;
}

/// Random fully-observable MDP (observation = next env state).
inline FiniteEnvironment random_mdp(uint64_t seed, const Interface& iface) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 3);
    const int nx = iface.num_observations();
    const int na = iface.num_actions();
    std::vector<std::vector<std::vector<double>>> trans(nx, std::vector<std::vector<double>>(na));
    std::vector<std::vector<std::vector<double>>> rew(
        nx, std::vector<std::vector<double>>(na, std::vector<double>(nx, 0.0)));
    for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a) {
            trans[x][a] = rnd::dist(rng, nx).probs;
            for (int o = 0; o < nx; ++o) rew[x][a][o] = -1.0 + 2.0 * rnd::unit(rng);
        }
    FiniteEnvironment e;
    e.state_names = iface.observations;
    e.start = 0;
    e.emission = trans;
    e.reward = rew;
    e.update.assign(nx, std::vector<std::vector<int>>(na, std::vector<int>(nx, 0)));
    for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a)
            for (int o = 0; o < nx; ++o) e.update[x][a][o] = o;
    return e;
}

/// Random incompletely specified Moore machine, restricted to the states
/// reachable from the root. `define_prob` controls transition density.
inline IncompleteMooreMachine random_machine(uint64_t seed, int max_states, int num_inputs,
                                             int num_outputs, double define_prob = 0.7) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 4);
    int n = 1 + rnd::below(rng, max_states);
    std::vector<std::vector<int>> trans(n, std::vector<int>(num_inputs, -1));
    std::vector<int> output(n);
    for (int s = 0; s < n; ++s) {
        output[s] = rnd::below(rng, num_outputs);
        for (int i = 0; i < num_inputs; ++i)
            if (rnd::unit(rng) < define_prob) trans[s][i] = rnd::below(rng, n);
    }
    // restrict to the part reachable from state 0
    std::vector<int> order{0}, local(n, -1);
    local[0] = 0;
    for (size_t i = 0; i < order.size(); ++i)
        for (int in = 0; in < num_inputs; ++in) {
            int t = trans[order[i]][in];
            if (t >= 0 && local[t] < 0) {
                local[t] = static_cast<int>(order.size());
                order.push_back(t);
            }
        }
    IncompleteMooreMachine m;
    m.num_states = static_cast<int>(order.size());
    m.root = 0;
    m.num_inputs = num_inputs;
    m.trans.assign(m.num_states, std::vector<int>(num_inputs, -1));
    m.output.assign(m.num_states, 0);
    int max_out = 0;
    for (int i = 0; i < m.num_states; ++i) {
        m.output[i] = output[order[i]];
        max_out = std::max(max_out, m.output[i]);
        for (int in = 0; in < num_inputs; ++in) {
            int t = trans[order[i]][in];
            if (t >= 0) m.trans[i][in] = local[t];
        }
    }
    // representative output distributions: deterministic over `max_out + 1` slots
    for (int c = 0; c <= max_out; ++c) {
        ActionDist d{std::vector<double>(max_out + 1, 0.0)};
        d.probs[c] = 1.0;
        m.output_dists.push_back(d);
    }
    return m;
}

}  // namespace bac
