#pragma once

// Shared hand-built fixtures for the test suites.

#include "bac/agents.hpp"
#include "bac/core.hpp"
#include "bac/envs.hpp"

namespace fixtures {

inline bac::Interface iface(int na, int no) {
    bac::Interface f;
    for (int i = 0; i < na; ++i) f.actions.push_back("a" + std::to_string(i));
    for (int i = 0; i < no; ++i) f.observations.push_back("o" + std::to_string(i));
    return f;
}

inline bac::ActionDist det(int a, int n) {
    bac::ActionDist d{std::vector<double>(n, 0.0)};
    d.probs[a] = 1.0;
    return d;
}

inline bac::ActionDist uniform(int n) {
    return bac::ActionDist{std::vector<double>(n, 1.0 / n)};
}

// move/stay interface of the two-state nonstationary fixture
inline bac::Interface move_stay_iface() {
    bac::Interface f;
    f.actions = {"move", "stay"};
    f.observations = {"o1", "o2"};
    return f;
}

inline bac::QAgentConfig aggregated_q_config() {
    bac::QAgentConfig cfg;
    cfg.q_grid = {-1.0, 0.0, 1.0};
    cfg.alpha = 1.0;
    cfg.epsilon = 0.5;
    cfg.obs_aggregation = {0, 0};
    // one aggregate cell: the reconstruction cannot tell o1 from o2, so each
    // action trains toward a fixed target
    cfg.reward_channel = {{-1.0},   // move
                          {+1.0}};  // stay
    return cfg;
}

// Example 2: 10-step alternation over two deterministic actions, then
// commit; lives in a constant-zero-reward bandit
inline bac::BoundedAgent example2_agent(const bac::Interface& f) {
    return bac::switching_agent(10, det(0, 2), det(1, 2), det(0, 2), f);
}

}  // namespace fixtures
