#pragma once

// Canonical environment constructions: bandits, fully-observable MDP
// encodings, the two-state nonstationary-learning fixture, and clocked
// reward overlays.

#include <string>
#include <vector>

#include "bac/core.hpp"

namespace bac {

/// Single env state, single observation, reward per pulled arm.
inline FiniteEnvironment bandit_env(const std::vector<double>& arm_rewards,
                                    const Interface& iface) {
    if (iface.num_observations() != 1)
        throw InputError("bandit environments need a single observation");
    if (static_cast<int>(arm_rewards.size()) != iface.num_actions())
        throw InputError("need one reward per arm");
    FiniteEnvironment e;
    e.state_names = {"x0"};
    e.start = 0;
    const int na = iface.num_actions();
    e.emission.assign(1, std::vector<std::vector<double>>(na, {1.0}));
    e.update.assign(1, std::vector<std::vector<int>>(na, {0}));
    e.reward.assign(1, std::vector<std::vector<double>>(na, {0.0}));
    for (int a = 0; a < na; ++a) e.reward[0][a][0] = arm_rewards[a];
    return e;
}

/// Fully-observable MDP encoding: observations are the MDP states, the
/// emission is the transition kernel, and the env update follows the
/// emitted observation.
inline FiniteEnvironment mdp_env(const std::vector<std::vector<std::vector<double>>>& transitions,
                                 const std::vector<std::vector<std::vector<double>>>& rewards,
                                 int start, const Interface& iface) {
    const int nx = iface.num_observations();  // O = MDP states
    const int na = iface.num_actions();
    if (static_cast<int>(transitions.size()) != nx ||
        static_cast<int>(rewards.size()) != nx)
        throw InputError("MDP tables must be indexed by observation states");
    FiniteEnvironment e;
    e.state_names = iface.observations;
    e.start = start;
    e.emission = transitions;
    e.reward = rewards;
    e.update.assign(nx, std::vector<std::vector<int>>(na, std::vector<int>(nx, 0)));
    for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a)
            for (int o = 0; o < nx; ++o) e.update[x][a][o] = o;
    return e;
}

/// The two-state deterministic move/stay MDP whose reward is -1 from state
/// o1 and +1 from state o2, regardless of action.
inline FiniteEnvironment move_stay_env(const Interface& iface) {
    if (iface.num_actions() != 2 || iface.num_observations() != 2)
        throw InputError("fixture needs |A| = |O| = 2 (move/stay over o1/o2)");
    const int kMove = 0, kStay = 1;
    std::vector<std::vector<std::vector<double>>> trans(
        2, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)));
    trans[0][kMove][1] = 1.0;
    trans[0][kStay][0] = 1.0;
    trans[1][kMove][0] = 1.0;
    trans[1][kStay][1] = 1.0;
    std::vector<std::vector<std::vector<double>>> rew(
        2, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)));
    for (int a = 0; a < 2; ++a)
        for (int o = 0; o < 2; ++o) {
            rew[0][a][o] = -1.0;
            rew[1][a][o] = +1.0;
        }
    return mdp_env(trans, rew, 0, iface);
}

/// Overlay a saturating step clock on a base environment and override the
/// reward by clock phase. The clock is invisible to the agent: the
/// observation alphabet is unchanged.
inline FiniteEnvironment clocked_env(const FiniteEnvironment& base, int switch_time,
                                     double reward_before, double reward_after,
                                     const Interface& iface) {
    if (switch_time < 1) throw InputError("switch_time must be >= 1");
    const int nb = base.num_states();
    const int na = iface.num_actions();
    const int no = iface.num_observations();
    const int clocks = switch_time + 1;
    FiniteEnvironment e;
    e.start = base.start;  // clock 0
    for (int c = 0; c < clocks; ++c)
        for (int x = 0; x < nb; ++x)
            e.state_names.push_back(base.state_names[x] + "@" + std::to_string(c));
    auto id = [&](int c, int x) { return c * nb + x; };
    e.emission.assign(clocks * nb, std::vector<std::vector<double>>(
                                       na, std::vector<double>(no, 0.0)));
    e.update.assign(clocks * nb,
                    std::vector<std::vector<int>>(na, std::vector<int>(no, 0)));
    e.reward.assign(clocks * nb, std::vector<std::vector<double>>(
                                     na, std::vector<double>(no, 0.0)));
    for (int c = 0; c < clocks; ++c)
        for (int x = 0; x < nb; ++x)
            for (int a = 0; a < na; ++a)
                for (int o = 0; o < no; ++o) {
                    e.emission[id(c, x)][a][o] = base.emission[x][a][o];
                    int c2 = std::min(c + 1, switch_time);
                    e.update[id(c, x)][a][o] = id(c2, base.update[x][a][o]);
                    e.reward[id(c, x)][a][o] = c < switch_time ? reward_before : reward_after;
                }
    return e;
}

}  // namespace bac
