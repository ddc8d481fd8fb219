#pragma once

// Canonical agent constructions as explicit bounded-agent tables: constant,
// memoryless, k-th order sliding window, counter-based switching, and the
// quantized tabular Q-learner.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bac/core.hpp"

namespace bac {

/// 1-state agent playing a fixed action distribution forever.
inline BoundedAgent constant_agent(const ActionDist& dist, const Interface& iface) {
    BoundedAgent a;
    a.state_names = {"s0"};
    a.start = 0;
    a.policy = {dist};
    a.update.assign(1, std::vector<std::vector<int>>(
                           iface.num_actions(), std::vector<int>(iface.num_observations(), 0)));
    return a;
}

/// Last-observation agent: S = O, u(s, a, o) = o. Satisfies the
/// last-observation condition by construction.
inline BoundedAgent memoryless_agent(const std::vector<ActionDist>& policy_per_obs, int o_init,
                                     const Interface& iface) {
    const int no = iface.num_observations();
    if (static_cast<int>(policy_per_obs.size()) != no)
        throw InputError("memoryless policy must cover every observation");
    BoundedAgent a;
    for (int o = 0; o < no; ++o) a.state_names.push_back("obs:" + iface.observations[o]);
    a.start = o_init;
    a.policy = policy_per_obs;
    a.update.assign(no, std::vector<std::vector<int>>(iface.num_actions(),
                                                      std::vector<int>(no, 0)));
    for (int s = 0; s < no; ++s)
        for (int act = 0; act < iface.num_actions(); ++act)
            for (int o = 0; o < no; ++o) a.update[s][act][o] = o;
    return a;
}

/// Sliding window of the last k observations, padded with `pad` until k
/// observations have arrived. |S| = |O|^k; policy is indexed by window.
inline BoundedAgent korder_agent(int k, const std::vector<ActionDist>& policy_per_window,
                                 int pad, const Interface& iface) {
    if (k < 1) throw InputError("window order must be >= 1");
    const int no = iface.num_observations();
    int n = 1;
    for (int i = 0; i < k; ++i) n *= no;
    if (static_cast<int>(policy_per_window.size()) != n)
        throw InputError("k-th order policy must cover every observation window");
    // state index encodes the window base-|O|, most recent observation in
    // the lowest digit
    auto shift = [&](int state, int o) { return (state * no + o) % n; };
    BoundedAgent a;
    for (int s = 0; s < n; ++s) {
        std::string name = "win:";
        int v = s;
        std::vector<int> digits(k);
        for (int i = k - 1; i >= 0; --i) {
            digits[i] = v % no;
            v /= no;
        }
        for (int i = 0; i < k; ++i) name += iface.observations[digits[i]] + (i + 1 < k ? "," : "");
        a.state_names.push_back(name);
    }
    int start = 0;
    for (int i = 0; i < k; ++i) start = shift(start, pad);
    a.start = start;
    a.policy = policy_per_window;
    a.update.assign(n, std::vector<std::vector<int>>(iface.num_actions(),
                                                     std::vector<int>(no, 0)));
    for (int s = 0; s < n; ++s)
        for (int act = 0; act < iface.num_actions(); ++act)
            for (int o = 0; o < no; ++o) a.update[s][act][o] = shift(s, o);
    return a;
}

/// Counter agent: alternates dist_a / dist_b on even / odd counters, then
/// commits to dist_final once the counter saturates at n_switch.
inline BoundedAgent switching_agent(int n_switch, const ActionDist& dist_a,
                                    const ActionDist& dist_b, const ActionDist& dist_final,
                                    const Interface& iface) {
    if (n_switch == 0) return constant_agent(dist_final, iface);
    if (dist_equal(dist_a, dist_b)) throw InputError("switching distributions must differ");
    BoundedAgent a;
    const int n = n_switch + 1;
    for (int c = 0; c < n; ++c) a.state_names.push_back("t" + std::to_string(c));
    a.start = 0;
    for (int c = 0; c < n; ++c)
        a.policy.push_back(c == n_switch ? dist_final : (c % 2 == 0 ? dist_a : dist_b));
    a.update.assign(n, std::vector<std::vector<int>>(
                           iface.num_actions(), std::vector<int>(iface.num_observations(), 0)));
    for (int c = 0; c < n; ++c) {
        int succ = std::min(c + 1, n_switch);
        for (auto& row : a.update[c])
            for (auto& cell : row) cell = succ;
    }
    return a;
}

/// Configuration of the quantized tabular Q-learner. The agent state is
/// (current aggregate cell, Q-table over cell x action), with Q-values
/// restricted to a finite grid. The reward the learner trains on is
/// reconstructed from its own perception of the transition: the action and
/// the aggregate cell of the new observation. Observations merged into one
/// cell are indistinguishable to the update, so the reconstruction loses
/// exactly the information the aggregation discards.
struct QAgentConfig {
    std::vector<double> q_grid;            // sorted, non-empty
    double alpha = 1.0;                    // step size in (0, 1]
    double epsilon = 0.5;                  // exploration in (0, 1]
    std::vector<int> obs_aggregation;      // [obs] -> cell
    std::vector<std::vector<double>> reward_channel;  // [action][cell] -> reconstructed reward
    double q_init = 0.0;                   // initial Q value (snapped to grid)
    double q_gamma = 0.0;                  // bootstrap weight; 0 = pure myopic update
    int init_cell = 0;
};

namespace detail {

/// Round to nearest grid point, ties toward the larger value. Values more
/// than half a gap outside the grid range are a construction error.
inline int quantize(const std::vector<double>& grid, double v) {
    int best = 0;
    double best_gap = std::fabs(v - grid[0]);
    for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
        double gap = std::fabs(v - grid[i]);
        if (gap < best_gap - 1e-15 || (std::fabs(gap - best_gap) <= 1e-15 && grid[i] > grid[best])) {
            best = i;
            best_gap = gap;
        }
    }
    return best;
}

}  // namespace detail

/// Tabular epsilon-greedy Q-learner quantized onto a finite grid; the state
/// space is enumerated by closure under all (a, o) inputs from the initial
/// table and reachable-pruned at build time.
inline BoundedAgent bounded_q_agent(const QAgentConfig& cfg, const Interface& iface) {
    const int na = iface.num_actions();
    const int no = iface.num_observations();
    if (cfg.q_grid.empty() || !std::is_sorted(cfg.q_grid.begin(), cfg.q_grid.end()))
        throw InputError("q_grid must be non-empty and sorted");
    if (!(cfg.alpha > 0 && cfg.alpha <= 1)) throw InputError("alpha must lie in (0,1]");
    if (!(cfg.epsilon > 0 && cfg.epsilon <= 1)) throw InputError("epsilon must lie in (0,1]");
    if (static_cast<int>(cfg.obs_aggregation.size()) != no)
        throw InputError("obs_aggregation must cover every observation");
    int n_cells = 0;
    for (int c : cfg.obs_aggregation) n_cells = std::max(n_cells, c + 1);
    if (cfg.init_cell < 0 || cfg.init_cell >= n_cells)
        throw InputError("init_cell outside the aggregation range");
    if (static_cast<int>(cfg.reward_channel.size()) != na)
        throw InputError("reward_channel must cover every action");
    for (const auto& row : cfg.reward_channel)
        if (static_cast<int>(row.size()) != n_cells)
            throw InputError("reward_channel must cover every aggregate cell");

    const double lo = cfg.q_grid.front(), hi = cfg.q_grid.back();

    // state = (cell, q_idx[cell][action]) encoded as a vector of ints
    using State = std::vector<int>;
    auto make_start = [&] {
        State s(1 + n_cells * na);
        s[0] = cfg.init_cell;
        int q0 = detail::quantize(cfg.q_grid, cfg.q_init);
        for (int i = 0; i < n_cells * na; ++i) s[1 + i] = q0;
        return s;
    };
    auto step = [&](const State& s, int a, int o) {
        int cell = s[0];
        int new_cell = cfg.obs_aggregation[o];
        double rhat = cfg.reward_channel[a][new_cell];
        double target = rhat;
        if (cfg.q_gamma > 0) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a2 = 0; a2 < na; ++a2)
                best = std::max(best, cfg.q_grid[s[1 + new_cell * na + a2]]);
            target += cfg.q_gamma * best;
        }
        double q_old = cfg.q_grid[s[1 + cell * na + a]];
        double q_new = (1 - cfg.alpha) * q_old + cfg.alpha * target;
        if (q_new < lo - 1e-9 || q_new > hi + 1e-9)
            throw InputError("Q update escapes the grid at (cell " + std::to_string(cell) +
                             ", action " + iface.actions[a] + ", obs " + iface.observations[o] +
                             ")");
        State out = s;
        out[0] = new_cell;
        out[1 + cell * na + a] = detail::quantize(cfg.q_grid, q_new);
        return out;
    };
    auto policy_of = [&](const State& s) {
        int cell = s[0];
        int greedy = 0;
        for (int a = 1; a < na; ++a)
            if (cfg.q_grid[s[1 + cell * na + a]] > cfg.q_grid[s[1 + cell * na + greedy]])
                greedy = a;  // ties stay at the lowest index
        ActionDist d{std::vector<double>(na, cfg.epsilon / na)};
        d.probs[greedy] += 1.0 - cfg.epsilon;
        return d;
    };

    std::map<State, int> index;
    std::vector<State> states;
    auto intern = [&](const State& s) {
        auto it = index.find(s);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        index.emplace(s, id);
        states.push_back(s);
        return id;
    };
    intern(make_start());
    BoundedAgent agent;
    for (size_t i = 0; i < states.size(); ++i) {
        State s = states[i];
        agent.update.emplace_back(na, std::vector<int>(no, 0));
        for (int a = 0; a < na; ++a)
            for (int o = 0; o < no; ++o) agent.update[i][a][o] = intern(step(s, a, o));
    }
    agent.start = 0;
    for (const auto& s : states) {
        std::string name = "cell" + std::to_string(s[0]) + ":Q[";
        for (int i = 0; i < n_cells * na; ++i)
            name += std::to_string(cfg.q_grid[s[1 + i]]) + (i + 1 < n_cells * na ? "," : "");
        agent.state_names.push_back(name + "]");
        agent.policy.push_back(policy_of(s));
    }
    return agent;
}

}  // namespace bac
