#pragma once

// Exact computation of the performance function v on product nodes, plus a
// seeded Monte-Carlo estimator for cross-checks. Values follow the
// convention that v at a node sums rewards of transitions strictly after
// the history reaching it.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "bac/core.hpp"
#include "bac/product.hpp"

namespace bac {

struct ValueTable {
    std::vector<double> values;  // indexed by product node
    PerformanceSpec spec;
    double v_min = 0, v_max = 0;
};

namespace detail {

/// Expected reward of the next transition at each node.
inline std::vector<double> expected_step_reward(const ProductGraph& g) {
    std::vector<double> r(g.num_nodes(), 0.0);
    for (int q = 0; q < g.num_nodes(); ++q)
        for (const auto& e : g.edges[q]) {
            const auto& node = g.nodes[q];
            r[q] += e.prob * g.env.reward[node.env_state][e.action][e.observation];
        }
    return r;
}

inline Eigen::MatrixXd transition_matrix(const ProductGraph& g) {
    const int n = g.num_nodes();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < n; ++q)
        for (const auto& e : g.edges[q]) p(q, e.succ) += e.prob;
    return p;
}

/// Tarjan strongly connected components, returned as component id per node.
/// Component ids are in reverse topological order (successors first).
inline std::vector<int> scc_ids(const ProductGraph& g, int& num_components) {
    const int n = g.num_nodes();
    std::vector<int> ids(n, -1), low(n), disc(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int timer = 0, comps = 0;
    // iterative Tarjan
    struct Frame {
        int v;
        size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        disc[root] = low[root] = timer++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& f = call.back();
            if (f.edge < g.edges[f.v].size()) {
                int w = g.edges[f.v][f.edge++].succ;
                if (disc[w] == -1) {
                    disc[w] = low[w] = timer++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
            } else {
                if (low[f.v] == disc[f.v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        ids[w] = comps;
                        if (w == f.v) break;
                    }
                    ++comps;
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    num_components = comps;
    return ids;
}

/// One pass of iterative refinement keeps the Bellman residual at solver
/// noise level even for gamma close to 1.
inline Eigen::VectorXd refine_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     Eigen::VectorXd x) {
    auto lu = a.partialPivLu();
    for (int pass = 0; pass < 3; ++pass) {
        Eigen::VectorXd resid = b - a * x;
        if (resid.lpNorm<Eigen::Infinity>() <= 1e-14) break;
        x += lu.solve(resid);
    }
    return x;
}

}  // namespace detail

/// Exact node values under the given performance statistic.
///   myopic:     expected next-transition reward.
///   discounted: unique solution of v = rbar + gamma * P v.
///   average:    Cesaro limit of the reward average; constant on each
///               recurrent class, absorption-weighted on transient nodes.
inline ValueTable exact_value(const ProductGraph& g, const PerformanceSpec& spec) {
    const int n = g.num_nodes();
    ValueTable vt;
    vt.spec = spec;
    auto [vmin, vmax] = spec.value_bounds(g.env);
    vt.v_min = vmin;
    vt.v_max = vmax;
    auto rbar = detail::expected_step_reward(g);

    switch (spec.kind) {
        case PerformanceKind::Myopic: {
            vt.values = rbar;
            break;
        }
        case PerformanceKind::Discounted: {
            Eigen::MatrixXd p = detail::transition_matrix(g);
            Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - spec.gamma * p;
            Eigen::VectorXd b(n);
            for (int i = 0; i < n; ++i) b(i) = rbar[i];
            Eigen::VectorXd x;
            if (n <= 2000) {
                x = detail::refine_linear(a, b, a.partialPivLu().solve(b));
            } else {
                // value iteration with a residual-driven stop
                x = Eigen::VectorXd::Zero(n);
                for (int it = 0; it < 1000000; ++it) {
                    Eigen::VectorXd next = b + spec.gamma * (p * x);
                    if ((next - x).lpNorm<Eigen::Infinity>() <= 1e-13 * (1 - spec.gamma)) {
                        x = next;
                        break;
                    }
                    x = next;
                }
                x = detail::refine_linear(a, b, x);
            }
            vt.values.assign(x.data(), x.data() + n);
            break;
        }
        case PerformanceKind::Average: {
            int comps = 0;
            auto ids = detail::scc_ids(g, comps);
            std::vector<bool> recurrent(comps, true);
            for (int q = 0; q < n; ++q)
                for (const auto& e : g.edges[q])
                    if (ids[e.succ] != ids[q]) recurrent[ids[q]] = false;
            std::vector<double> gain(comps, 0.0);
            for (int c = 0; c < comps; ++c) {
                if (!recurrent[c]) continue;
                std::vector<int> members;
                for (int q = 0; q < n; ++q)
                    if (ids[q] == c) members.push_back(q);
                const int k = static_cast<int>(members.size());
                std::vector<int> pos(n, -1);
                for (int i = 0; i < k; ++i) pos[members[i]] = i;
                // stationary distribution: pi (P - I) = 0, sum pi = 1
                Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
                for (int i = 0; i < k; ++i) {
                    a(i, i) -= 1.0;
                    for (const auto& e : g.edges[members[i]]) a(pos[e.succ], i) += e.prob;
                }
                a.row(k - 1).setOnes();
                Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
                b(k - 1) = 1.0;
                Eigen::VectorXd pi = detail::refine_linear(a, b, a.fullPivLu().solve(b));
                for (int i = 0; i < k; ++i) gain[c] += pi(i) * rbar[members[i]];
            }
            // transient nodes: v = P v with recurrent values fixed
            std::vector<int> transient;
            std::vector<int> tpos(n, -1);
            vt.values.assign(n, 0.0);
            for (int q = 0; q < n; ++q) {
                if (recurrent[ids[q]]) {
                    vt.values[q] = gain[ids[q]];
                } else {
                    tpos[q] = static_cast<int>(transient.size());
                    transient.push_back(q);
                }
            }
            const int m = static_cast<int>(transient.size());
            if (m > 0) {
                Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
                Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
                for (int i = 0; i < m; ++i)
                    for (const auto& e : g.edges[transient[i]]) {
                        if (tpos[e.succ] >= 0)
                            a(i, tpos[e.succ]) -= e.prob;
                        else
                            b(i) += e.prob * vt.values[e.succ];
                    }
                Eigen::VectorXd x = detail::refine_linear(a, b, a.partialPivLu().solve(b));
                for (int i = 0; i < m; ++i) vt.values[transient[i]] = x(i);
            }
            break;
        }
    }
    return vt;
}

/// Max |v - rbar - gamma P v| over nodes; for myopic this degenerates to the
/// defining identity and is 0 up to rounding.
inline double bellman_residual(const ProductGraph& g, const ValueTable& vt) {
    if (vt.spec.kind == PerformanceKind::Average) return 0.0;
    auto rbar = detail::expected_step_reward(g);
    double gamma = vt.spec.kind == PerformanceKind::Discounted ? vt.spec.gamma : 0.0;
    double worst = 0;
    for (int q = 0; q < g.num_nodes(); ++q) {
        double rhs = rbar[q];
        for (const auto& e : g.edges[q]) rhs += gamma * e.prob * vt.values[e.succ];
        worst = std::max(worst, std::fabs(vt.values[q] - rhs));
    }
    return worst;
}

struct McEstimate {
    double estimate = 0;
    double ci_halfwidth = 0;  // 99% normal-approximation interval
};

namespace detail {

// mt19937_64 output mapped to [0,1); bit-reproducible across platforms,
// unlike std::uniform_real_distribution.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int sample_index(std::mt19937_64& rng, const std::vector<double>& probs) {
    double u = next_unit(rng);
    double acc = 0;
    int last = -1;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
        if (probs[i] <= 0) continue;
        acc += probs[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // guard against rounding at the top of the CDF
}

}  // namespace detail

/// Seeded Monte-Carlo value estimate from a product node. Deterministic
/// given the seed: rollout i draws from mt19937_64(seed + i). Average-reward
/// specs are rejected (truncation bias is unbounded).
inline McEstimate mc_estimate_value(const BoundedAgent& agent, const FiniteEnvironment& env,
                                    ProductNode start, const PerformanceSpec& spec,
                                    int rollouts, int horizon, uint64_t seed) {
    if (spec.kind == PerformanceKind::Average)
        throw UnsupportedError("Monte-Carlo estimation does not support the average-reward kind");
    if (rollouts < 2) throw InputError("need at least 2 rollouts");
    double gamma = spec.kind == PerformanceKind::Discounted ? spec.gamma : 0.0;
    int steps = spec.kind == PerformanceKind::Myopic ? 1 : horizon;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < rollouts; ++i) {
        std::mt19937_64 rng(seed + static_cast<uint64_t>(i));
        int s = start.agent_state, x = start.env_state;
        double ret = 0, w = 1;
        for (int k = 0; k < steps; ++k) {
            int a = detail::sample_index(rng, agent.policy[s].probs);
            int o = detail::sample_index(rng, env.emission[x][a]);
            ret += w * env.reward[x][a][o];
            w *= gamma;
            s = agent.update[s][a][o];
            x = env.update[x][a][o];
            if (w == 0) break;
        }
        sum += ret;
        sumsq += ret * ret;
    }
    double mean = sum / rollouts;
    double var = std::max(0.0, (sumsq - rollouts * mean * mean) / (rollouts - 1));
    constexpr double z99 = 2.5758293035489004;
    return McEstimate{mean, z99 * std::sqrt(var / rollouts)};
}

/// CSV export: node id, agent state, env state, value.
inline void export_values_csv(const ProductGraph& g, const ValueTable& vt, std::ostream& os) {
    os << "node,agent_state,env_state,value\n";
    for (int q = 0; q < g.num_nodes(); ++q)
        os << q << ',' << g.agent.state_names[g.nodes[q].agent_state] << ','
           << g.env.state_names[g.nodes[q].env_state] << ',' << vt.values[q] << '\n';
}

}  // namespace bac
