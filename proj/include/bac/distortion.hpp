#pragma once

// Distortion sequence delta_t, its limit, the convergence time t_eps, and a
// brute-force oracle over explicitly enumerated histories.

#include <cmath>
#include <vector>

#include "bac/core.hpp"
#include "bac/product.hpp"
#include "bac/value.hpp"

namespace bac {

/// delta_0 .. delta_{preperiod+period}, non-increasing, bounded by the
/// value range; the limit equals the final value.
struct DistortionSequence {
    std::vector<double> values;
    double limit = 0;
    int stabilization_time = 0;
};

/// Max over same-agent-state revisit pairs rooted in R_t of the absolute
/// value gap. The history-level supremum collapses to this finite max
/// because v factors through product nodes.
inline double distortion_at(const ProductGraph& g, const ValueTable& vt,
                            const std::vector<int>& r_t) {
    auto pairs = revisit_pairs(g, r_t);
    if (pairs.empty())
        throw std::logic_error("empty revisit set; contradicts boundedness of the agent");
    double worst = 0;
    for (auto [q, q2] : pairs)
        worst = std::max(worst, std::fabs(vt.values[q] - vt.values[q2]));
    return worst;
}

inline DistortionSequence distortion_sequence(const ProductGraph& g, const ValueTable& vt,
                                              const LayerSequence& ls) {
    DistortionSequence seq;
    int horizon = ls.preperiod + ls.period;
    auto reach = successor_closure(g);
    for (int t = 0; t <= horizon; ++t) {
        double worst = 0;
        for (int q : reachable_from_time(ls, t))
            for (int v = 0; v < g.num_nodes(); ++v)
                if (reach[q][v] && g.nodes[q].agent_state == g.nodes[v].agent_state)
                    worst = std::max(worst, std::fabs(vt.values[q] - vt.values[v]));
        seq.values.push_back(worst);
    }
    for (size_t t = 1; t < seq.values.size(); ++t)
        if (seq.values[t] > seq.values[t - 1] + 1e-12)
            throw std::logic_error("distortion sequence increased; product construction bug");
    seq.limit = seq.values.back();
    seq.stabilization_time = static_cast<int>(seq.values.size()) - 1;
    while (seq.stabilization_time > 0 &&
           seq.values[seq.stabilization_time - 1] == seq.limit)
        --seq.stabilization_time;
    return seq;
}

/// Earliest t with |delta_t - delta_infinity| <= eps. Always exists: the
/// computed sequence stabilizes at its limit.
inline int convergence_time_eps(const DistortionSequence& seq, double eps) {
    for (size_t t = 0; t < seq.values.size(); ++t)
        if (std::fabs(seq.values[t] - seq.limit) <= eps) return static_cast<int>(t);
    return static_cast<int>(seq.values.size()) - 1;
}

/// Independent brute force: max over enumerated pairs (h, hh') with
/// |h| >= t, |h'| >= 1, |hh'| <= depth and equal agent states of the value
/// gap at the end nodes. A lower bound on delta_t; equal to it whenever
/// depth >= preperiod + period + longest revisit path.
inline double distortion_oracle(const BoundedAgent& agent, const FiniteEnvironment& env,
                                const Interface& iface, const PerformanceSpec& spec, int depth,
                                int t, size_t node_budget = 1000000) {
    auto g = build_product(agent, env, iface);
    auto vt = exact_value(g, spec);
    auto hist = enumerate_histories(g, depth, node_budget);
    // group histories by (length, agent state at end) to pair prefixes with
    // their extensions; the prefix relation is checked explicitly
    double worst = 0;
    for (const auto& [h, q] : hist) {
        if (static_cast<int>(h.length()) < t) continue;
        int s = g.nodes[q].agent_state;
        for (const auto& [h2, q2] : hist) {
            if (h2.length() <= h.length()) continue;
            if (g.nodes[q2].agent_state != s) continue;
            if (!std::equal(h.steps.begin(), h.steps.end(), h2.steps.begin())) continue;
            worst = std::max(worst, std::fabs(vt.values[q] - vt.values[q2]));
        }
    }
    return worst;
}

}  // namespace bac
