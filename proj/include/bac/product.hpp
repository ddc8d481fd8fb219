#pragma once

// Reachable agent x environment product automaton and the layered
// reachability machinery that makes realizable-history quantifiers finite.
// Both the agent and the environment update deterministically, so every
// realizable history ends at exactly one product node.

#include <cstdint>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <vector>

#include "bac/core.hpp"

namespace bac {

struct ProductNode {
    int agent_state = 0;
    int env_state = 0;

    friend bool operator==(const ProductNode&, const ProductNode&) = default;
    friend auto operator<=>(const ProductNode&, const ProductNode&) = default;
};

struct ProductEdge {
    int action = 0;
    int observation = 0;
    double prob = 0.0;  // pi(a|s) * e(o|x,a), strictly positive
    int succ = 0;       // node index
};

/// The reachable product automaton. Node 0 is the start (s0, x0); nodes are
/// indexed in BFS discovery order, which fixes all downstream tie-breaking.
struct ProductGraph {
    BoundedAgent agent;  // owned copies: the graph outlives its inputs
    FiniteEnvironment env;
    std::vector<ProductNode> nodes;
    std::vector<std::vector<ProductEdge>> edges;  // [node] -> realizable one-step extensions

    int num_nodes() const { return static_cast<int>(nodes.size()); }

    int node_index(const ProductNode& q) const {
        for (int i = 0; i < num_nodes(); ++i)
            if (nodes[i] == q) return i;
        return -1;
    }
};

/// Build the product of an agent and environment over a shared interface.
/// Edges exist exactly where both the policy and the emission place
/// structurally positive probability; no numeric thresholding.
inline ProductGraph build_product(const BoundedAgent& agent, const FiniteEnvironment& env,
                                  const Interface& iface) {
    const int na = iface.num_actions();
    const int no = iface.num_observations();
    if (!validate_agent(agent, iface).ok())
        throw InputError("agent does not match the interface");
    if (!validate_env(env, iface).ok())
        throw InputError("environment does not match the interface");

    ProductGraph g;
    g.agent = agent;
    g.env = env;
    std::map<ProductNode, int> index;
    std::queue<int> work;
    auto intern = [&](ProductNode q) {
        auto it = index.find(q);
        if (it != index.end()) return it->second;
        int id = g.num_nodes();
        index.emplace(q, id);
        g.nodes.push_back(q);
        g.edges.emplace_back();
        work.push(id);
        return id;
    };
    intern(ProductNode{agent.start, env.start});
    while (!work.empty()) {
        int id = work.front();
        work.pop();
        ProductNode q = g.nodes[id];
        double mass = 0;
        for (int a = 0; a < na; ++a) {
            double pa = agent.policy[q.agent_state].probs[a];
            if (pa <= 0) continue;
            for (int o = 0; o < no; ++o) {
                double po = env.emission[q.env_state][a][o];
                if (po <= 0) continue;
                ProductNode succ{agent.update[q.agent_state][a][o],
                                 env.update[q.env_state][a][o]};
                int sid = intern(succ);
                g.edges[id].push_back(ProductEdge{a, o, pa * po, sid});
                mass += pa * po;
            }
        }
        if (std::fabs(mass - 1.0) > kEdgeSumTol)
            throw InputError("outgoing edge mass at a product node deviates from 1");
    }
    return g;
}

/// L_0, L_1, ... where L_k holds the nodes reachable by realizable paths of
/// length exactly k, together with the minimal (preperiod, period) at which
/// the layer sets recur.
struct LayerSequence {
    std::vector<std::vector<int>> layers;  // sorted node indices per layer
    int preperiod = 0;
    int period = 1;
};

/// Compute layers until the first recurrence of a layer set. The layer
/// evolution is deterministic, so the first recurrence yields the minimal
/// preperiod and period. `max_steps` is a loud safety cap.
inline LayerSequence layer_sequence(const ProductGraph& g, int max_steps = -1) {
    if (g.num_nodes() == 0) throw InputError("empty product graph");
    if (max_steps < 0) max_steps = 4 * g.num_nodes() * g.num_nodes() + 8;
    LayerSequence ls;
    std::map<std::vector<int>, int> seen;
    std::vector<int> layer{0};
    for (int step = 0; step <= max_steps; ++step) {
        auto it = seen.find(layer);
        if (it != seen.end()) {
            ls.preperiod = it->second;
            ls.period = step - it->second;
            return ls;
        }
        seen.emplace(layer, step);
        ls.layers.push_back(layer);
        std::set<int> next;
        for (int q : layer)
            for (const auto& e : g.edges[q]) next.insert(e.succ);
        layer.assign(next.begin(), next.end());
    }
    throw ResourceError("layer recurrence not found within " + std::to_string(max_steps) +
                        " steps");
}

/// R_t: the union of all layers with index >= t. Constant for t >= preperiod.
inline std::vector<int> reachable_from_time(const LayerSequence& ls, int t) {
    std::set<int> out;
    // Cycle layers recur at arbitrarily large indices, so they are always in.
    for (int k = ls.preperiod; k < ls.preperiod + ls.period; ++k)
        for (int q : ls.layers[k]) out.insert(q);
    // Transient layers contribute only while their index is still >= t.
    for (int k = t; k < ls.preperiod; ++k)
        for (int q : ls.layers[k]) out.insert(q);
    return {out.begin(), out.end()};
}

/// Transitive successor closure: reach_plus[q] holds all nodes reachable
/// from q by a path of length >= 1.
inline std::vector<std::vector<bool>> successor_closure(const ProductGraph& g) {
    const int n = g.num_nodes();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int q = 0; q < n; ++q) {
        std::queue<int> work;
        for (const auto& e : g.edges[q])
            if (!reach[q][e.succ]) {
                reach[q][e.succ] = true;
                work.push(e.succ);
            }
        while (!work.empty()) {
            int v = work.front();
            work.pop();
            for (const auto& e : g.edges[v])
                if (!reach[q][e.succ]) {
                    reach[q][e.succ] = true;
                    work.push(e.succ);
                }
        }
    }
    return reach;
}

/// All node pairs (q, q') with q in R_t, q' reachable from q by a realizable
/// path of length >= 1, and equal agent-state components. Self-revisits are
/// kept; they witness cycles and contribute 0 to the distortion.
inline std::vector<std::pair<int, int>> revisit_pairs(const ProductGraph& g,
                                                      const std::vector<int>& r_t) {
    auto reach = successor_closure(g);
    std::vector<std::pair<int, int>> out;
    for (int q : r_t)
        for (int v = 0; v < g.num_nodes(); ++v)
            if (reach[q][v] && g.nodes[q].agent_state == g.nodes[v].agent_state)
                out.emplace_back(q, v);
    return out;
}

/// Explicit enumeration of all realizable histories of length <= depth with
/// their end nodes. Brute-force oracle substrate; `node_budget` bounds the
/// total number of emitted histories.
inline std::vector<std::pair<History, int>> enumerate_histories(const ProductGraph& g, int depth,
                                                                size_t node_budget = 1000000) {
    std::vector<std::pair<History, int>> out;
    out.emplace_back(History{}, 0);
    size_t begin = 0;
    for (int d = 0; d < depth; ++d) {
        size_t end = out.size();
        for (size_t i = begin; i < end; ++i) {
            auto [h, q] = out[i];
            for (const auto& e : g.edges[q]) {
                History h2 = h;
                h2.steps.emplace_back(e.action, e.observation);
                out.emplace_back(std::move(h2), e.succ);
                if (out.size() > node_budget)
                    throw ResourceError("history enumeration exceeded its node budget");
            }
        }
        begin = end;
    }
    return out;
}

/// Debug export: one edge per line (node, action, observation, probability,
/// successor), nodes printed as agent-state|env-state name pairs.
inline void export_edges(const ProductGraph& g, const Interface& iface, std::ostream& os) {
    for (int q = 0; q < g.num_nodes(); ++q)
        for (const auto& e : g.edges[q]) {
            const auto& from = g.nodes[q];
            const auto& to = g.nodes[e.succ];
            os << g.agent.state_names[from.agent_state] << '|'
               << g.env.state_names[from.env_state] << '\t' << iface.actions[e.action] << '\t'
               << iface.observations[e.observation] << '\t' << e.prob << '\t'
               << g.agent.state_names[to.agent_state] << '|' << g.env.state_names[to.env_state]
               << '\n';
        }
}

}  // namespace bac
