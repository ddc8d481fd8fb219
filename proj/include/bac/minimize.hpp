#pragma once

// Minimal-size machinery: incompletely specified Moore machines built from
// product-graph futures, exact minimization via closed covers of
// compatibles, a partition-refinement upper bound, an exhaustive oracle for
// tiny instances, and the size sequence c_t.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "bac/core.hpp"
#include "bac/product.hpp"

namespace bac {

/// The future-behavior machine at a product node. States are the nodes
/// reachable from the root; inputs are (action, observation) pairs encoded
/// as a * |O| + o. A transition is defined exactly on realizable branches;
/// undefined transitions are don't-cares. Outputs are canonical policy
/// distributions, compared at `tol`, and stored as class ids.
struct IncompleteMooreMachine {
    int num_states = 0;
    int root = 0;
    int num_inputs = 0;
    std::vector<std::vector<int>> trans;  // [state][input] -> state, -1 if undefined
    std::vector<int> output;              // [state] -> output class id
    std::vector<ActionDist> output_dists; // [class id] -> representative distribution
    double tol = kDistTol;

    bool completely_specified() const {
        for (const auto& row : trans)
            for (int t : row)
                if (t < 0) return false;
        return true;
    }
};

/// Realizable-future machine of the product sub-graph rooted at node q.
/// Output agreement is required at the root as well (the empty suffix is a
/// realizable suffix).
inline IncompleteMooreMachine future_machine(const ProductGraph& g, int q,
                                             double tol = kDistTol) {
    if (q < 0 || q >= g.num_nodes()) throw InputError("node outside the product graph");
    const auto& agent = g.agent;
    const int no = static_cast<int>(g.env.emission[0][0].size());
    // collect reachable sub-graph in BFS order
    std::vector<int> order;
    std::vector<int> local(g.num_nodes(), -1);
    order.push_back(q);
    local[q] = 0;
    for (size_t i = 0; i < order.size(); ++i)
        for (const auto& e : g.edges[order[i]])
            if (local[e.succ] < 0) {
                local[e.succ] = static_cast<int>(order.size());
                order.push_back(e.succ);
            }
    IncompleteMooreMachine m;
    m.num_states = static_cast<int>(order.size());
    m.root = 0;
    m.num_inputs = static_cast<int>(agent.policy[0].probs.size()) * no;
    m.tol = tol;
    m.trans.assign(m.num_states, std::vector<int>(m.num_inputs, -1));
    m.output.assign(m.num_states, -1);
    for (int i = 0; i < m.num_states; ++i) {
        for (const auto& e : g.edges[order[i]])
            m.trans[i][e.action * no + e.observation] = local[e.succ];
        const ActionDist& d = agent.policy[g.nodes[order[i]].agent_state];
        for (int c = 0; c < static_cast<int>(m.output_dists.size()); ++c)
            if (dist_equal(d, m.output_dists[c], tol)) {
                m.output[i] = c;
                break;
            }
        if (m.output[i] < 0) {
            m.output[i] = static_cast<int>(m.output_dists.size());
            m.output_dists.push_back(d);
        }
    }
    return m;
}

/// Greatest fixpoint compatibility relation: p ~ p' iff outputs agree and,
/// for every input defined at both, the successors are again compatible.
inline std::vector<std::vector<bool>> compatible_pairs(const IncompleteMooreMachine& m) {
    const int n = m.num_states;
    std::vector<std::vector<bool>> compat(n, std::vector<bool>(n, false));
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) compat[p][q] = (m.output[p] == m.output[q]);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (!compat[p][q]) continue;
                for (int i = 0; i < m.num_inputs; ++i) {
                    int tp = m.trans[p][i], tq = m.trans[q][i];
                    if (tp >= 0 && tq >= 0 && !compat[tp][tq]) {
                        compat[p][q] = compat[q][p] = false;
                        changed = true;
                        break;
                    }
                }
            }
    }
    return compat;
}

/// Quotient size under the coarsest computed equivalence refining outputs
/// and mutually-defined transitions (classical partition refinement with
/// don't-cares keyed separately). Always >= the exact minimum; equal to it
/// on completely specified machines.
inline int heuristic_size(const IncompleteMooreMachine& m) {
    const int n = m.num_states;
    std::vector<int> block = m.output;
    int count = *std::max_element(block.begin(), block.end()) + 1;
    while (true) {
        std::map<std::vector<int>, int> keys;
        std::vector<int> next(n);
        for (int s = 0; s < n; ++s) {
            std::vector<int> key;
            key.push_back(block[s]);
            for (int i = 0; i < m.num_inputs; ++i)
                key.push_back(m.trans[s][i] < 0 ? -1 : block[m.trans[s][i]]);
            auto [it, inserted] = keys.emplace(std::move(key), static_cast<int>(keys.size()));
            next[s] = it->second;
        }
        // keys only ever refine the partition; a stable count means a fixpoint
        if (static_cast<int>(keys.size()) == count) return count;
        count = static_cast<int>(keys.size());
        block = std::move(next);
    }
}

/// Result of exact minimization. When the state count exceeds the budget,
/// `exact` is false and [lower, size] brackets the true minimum.
struct MinimizeResult {
    int size = 0;        // exact minimum, or certified upper bound
    int lower = 0;       // certified lower bound (max pairwise-incompatible clique found)
    bool exact = true;
    std::optional<BoundedAgent> witness;  // n-state machine agreeing on all defined paths
};

namespace detail {

/// Greedy clique in the incompatibility graph; any pairwise-incompatible
/// set is a valid lower bound on the cover size.
inline std::vector<int> incompatible_clique(const std::vector<std::vector<bool>>& compat) {
    const int n = static_cast<int>(compat.size());
    std::vector<int> degree(n, 0);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (p != q && !compat[p][q]) ++degree[p];
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return degree[a] != degree[b] ? degree[a] > degree[b] : a < b;
    });
    std::vector<int> best;
    for (int start = 0; start < n; ++start) {
        std::vector<int> clique{order[start]};
        for (int idx = 0; idx < n; ++idx) {
            int cand = order[idx];
            bool fits = true;
            for (int c : clique)
                if (c == cand || compat[c][cand]) {
                    fits = false;
                    break;
                }
            if (fits) clique.push_back(cand);
        }
        if (clique.size() > best.size()) best = clique;
    }
    return best;
}

struct CoverSearch {
    const IncompleteMooreMachine& m;
    const std::vector<std::vector<bool>>& compat;
    int n_classes;
    std::vector<std::vector<bool>> classes;  // [class][state] membership
    std::vector<int> class_size;

    CoverSearch(const IncompleteMooreMachine& machine,
                const std::vector<std::vector<bool>>& comp, int n)
        : m(machine), compat(comp), n_classes(n),
          classes(n, std::vector<bool>(machine.num_states, false)), class_size(n, 0) {}

    bool set_compatible_with_class(int c, const std::vector<int>& set) const {
        for (int s = 0; s < m.num_states; ++s) {
            if (!classes[c][s]) continue;
            for (int t : set)
                if (!compat[s][t]) return false;
        }
        for (size_t i = 0; i < set.size(); ++i)
            for (size_t j = i + 1; j < set.size(); ++j)
                if (!compat[set[i]][set[j]]) return false;
        return true;
    }

    bool contained(int c, const std::vector<int>& set) const {
        for (int t : set)
            if (!classes[c][t]) return false;
        return true;
    }

    /// Find one violated requirement: an uncovered state, or an implied
    /// successor set of some class not contained in any class.
    std::optional<std::vector<int>> violated() const {
        for (int s = 0; s < m.num_states; ++s) {
            bool covered = false;
            for (int c = 0; c < n_classes && !covered; ++c) covered = classes[c][s];
            if (!covered) return std::vector<int>{s};
        }
        for (int c = 0; c < n_classes; ++c) {
            if (class_size[c] == 0) continue;
            for (int i = 0; i < m.num_inputs; ++i) {
                std::vector<int> implied;
                for (int s = 0; s < m.num_states; ++s)
                    if (classes[c][s] && m.trans[s][i] >= 0) implied.push_back(m.trans[s][i]);
                std::sort(implied.begin(), implied.end());
                implied.erase(std::unique(implied.begin(), implied.end()), implied.end());
                if (implied.empty()) continue;
                bool ok = false;
                for (int c2 = 0; c2 < n_classes && !ok; ++c2) ok = contained(c2, implied);
                if (!ok) return implied;
            }
        }
        return std::nullopt;
    }

    bool search() {
        auto req = violated();
        if (!req) return true;
        bool tried_empty = false;
        for (int c = 0; c < n_classes; ++c) {
            if (class_size[c] == 0) {
                if (tried_empty) continue;  // empty classes are interchangeable
                tried_empty = true;
            }
            if (contained(c, *req)) continue;  // would be a no-op, requirement elsewhere
            if (!set_compatible_with_class(c, *req)) continue;
            std::vector<int> added;
            for (int t : *req)
                if (!classes[c][t]) {
                    classes[c][t] = true;
                    ++class_size[c];
                    added.push_back(t);
                }
            if (search()) return true;
            for (int t : added) {
                classes[c][t] = false;
                --class_size[c];
            }
        }
        return false;
    }
};

}  // namespace detail

/// Build the witness bounded agent from a closed cover. Don't-care
/// transitions are completed to the lowest-index class.
inline BoundedAgent cover_witness(const IncompleteMooreMachine& m,
                                  const std::vector<std::vector<bool>>& classes,
                                  int num_actions, int num_observations) {
    const int n = static_cast<int>(classes.size());
    auto class_of = [&](const std::vector<int>& set) {
        for (int c = 0; c < n; ++c) {
            bool all = true;
            for (int t : set)
                if (!classes[c][t]) {
                    all = false;
                    break;
                }
            if (all) return c;
        }
        return 0;  // unreachable for closed covers
    };
    BoundedAgent w;
    for (int c = 0; c < n; ++c) w.state_names.push_back("c" + std::to_string(c));
    w.policy.assign(n, ActionDist{std::vector<double>(num_actions, 0.0)});
    // policy: output of any member (equal by compatibility); pad classes
    // that stayed empty with the lowest output class
    for (int c = 0; c < n; ++c) {
        int out = 0;
        for (int s = 0; s < m.num_states; ++s)
            if (classes[c][s]) {
                out = m.output[s];
                break;
            }
        w.policy[c] = m.output_dists[out];
    }
    w.update.assign(n, std::vector<std::vector<int>>(
                           num_actions, std::vector<int>(num_observations, 0)));
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < num_actions; ++a)
            for (int o = 0; o < num_observations; ++o) {
                int input = a * num_observations + o;
                std::vector<int> implied;
                for (int s = 0; s < m.num_states; ++s)
                    if (classes[c][s] && m.trans[s][input] >= 0)
                        implied.push_back(m.trans[s][input]);
                std::sort(implied.begin(), implied.end());
                implied.erase(std::unique(implied.begin(), implied.end()), implied.end());
                w.update[c][a][o] = implied.empty() ? 0 : class_of(implied);
            }
    // start: lowest-index class containing the root
    for (int c = 0; c < n; ++c)
        if (classes[c][m.root]) {
            w.start = c;
            break;
        }
    return w;
}

/// Exact minimum closed cover by compatibles, with witness. Above
/// `exact_budget` states the search is skipped and certified
/// (lower, upper) bounds are returned instead with exact = false.
inline MinimizeResult min_closed_cover(const IncompleteMooreMachine& m, int num_actions,
                                       int num_observations, int exact_budget = 64) {
    auto compat = compatible_pairs(m);
    MinimizeResult res;
    auto clique = detail::incompatible_clique(compat);
    res.lower = std::max<int>(1, static_cast<int>(clique.size()));
    int upper = heuristic_size(m);
    if (m.num_states > exact_budget) {
        res.size = upper;
        res.exact = false;
        return res;
    }
    for (int n = res.lower; n <= upper; ++n) {
        detail::CoverSearch search(m, compat, n);
        if (search.search()) {
            res.size = n;
            res.exact = true;
            res.witness = cover_witness(m, search.classes, num_actions, num_observations);
            return res;
        }
    }
    // unreachable: the heuristic partition is itself a closed cover
    res.size = upper;
    res.exact = true;
    return res;
}

/// Exhaustive ground truth for tiny machines: smallest n <= n_max for which
/// some complete n-state machine (outputs drawn from m's output set) agrees
/// with m on every defined path. Returns n_max + 1 if none exists.
inline int size_oracle(const IncompleteMooreMachine& m, int n_max,
                       uint64_t candidate_budget = 50000000) {
    if (n_max > 3) throw InputError("size_oracle supports n_max <= 3");
    if (m.num_inputs > 4) throw InputError("size_oracle supports at most 4 inputs");
    const int g = static_cast<int>(m.output_dists.size());
    auto agrees = [&](const std::vector<int>& out, const std::vector<std::vector<int>>& tr) {
        // synchronized traversal: no reachable output disagreement allowed
        const int n = static_cast<int>(out.size());
        std::vector<bool> seen(static_cast<size_t>(m.num_states) * n, false);
        std::vector<std::pair<int, int>> stack{{m.root, 0}};
        seen[static_cast<size_t>(m.root) * n] = true;
        while (!stack.empty()) {
            auto [p, c] = stack.back();
            stack.pop_back();
            if (m.output[p] != out[c]) return false;
            for (int i = 0; i < m.num_inputs; ++i) {
                if (m.trans[p][i] < 0) continue;
                int p2 = m.trans[p][i], c2 = tr[c][i];
                size_t key = static_cast<size_t>(p2) * n + c2;
                if (!seen[key]) {
                    seen[key] = true;
                    stack.emplace_back(p2, c2);
                }
            }
        }
        return true;
    };
    for (int n = 1; n <= n_max; ++n) {
        // budget check: g^n output choices * n^(n*inputs) transition tables
        double total = 1;
        for (int i = 0; i < n; ++i) total *= g;
        for (int i = 0; i < n * m.num_inputs; ++i) total *= n;
        if (total > static_cast<double>(candidate_budget))
            throw ResourceError("size_oracle combinatorial budget exceeded");
        std::vector<int> out(n, 0);
        while (true) {
            if (out[0] == m.output[m.root]) {  // candidate start is state 0
                std::vector<std::vector<int>> tr(n, std::vector<int>(m.num_inputs, 0));
                while (true) {
                    if (agrees(out, tr)) return n;
                    // odometer over transition entries
                    int i = 0, j = 0;
                    for (;;) {
                        if (++tr[i][j] < n) break;
                        tr[i][j] = 0;
                        if (++j == m.num_inputs) {
                            j = 0;
                            ++i;
                        }
                        if (i == n) goto next_output;
                    }
                }
            }
        next_output:
            int i = 0;
            for (;;) {
                if (++out[i] < g) break;
                out[i] = 0;
                if (++i == n) goto next_n;
            }
        }
    next_n:;
    }
    return n_max + 1;
}

/// The minimal-size sequence c_0 .. c_{preperiod+period}, its limit, and the
/// per-node minima it maximizes over.
struct SizeSequence {
    std::vector<int> values;
    int limit = 0;
    std::vector<int> per_node_sizes;   // m(q) per product node (upper bound if inexact)
    std::vector<int> per_node_lower;   // certified lower bounds
    bool exact = true;                 // false if any per-node value is bounds-only
    int stabilization_time = 0;
};

/// c_t = max over nodes in R_t of the per-node minimum. Per-node
/// minimizations are independent; with `workers` > 1 they run on a thread
/// pool and are merged in node index order.
inline SizeSequence size_sequence(const ProductGraph& g, const LayerSequence& ls,
                                  const Interface& iface, int exact_budget = 64,
                                  int workers = 1, double tol = kDistTol) {
    const int n = g.num_nodes();
    SizeSequence seq;
    seq.per_node_sizes.assign(n, 0);
    seq.per_node_lower.assign(n, 0);
    std::vector<char> node_exact(n, 1);
    auto compute = [&](int q) {
        auto m = future_machine(g, q, tol);
        auto res = min_closed_cover(m, iface.num_actions(), iface.num_observations(),
                                    exact_budget);
        seq.per_node_sizes[q] = res.size;
        seq.per_node_lower[q] = res.lower;
        node_exact[q] = res.exact ? 1 : 0;
    };
    if (workers <= 1) {
        for (int q = 0; q < n; ++q) compute(q);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int q = next.fetch_add(1); q < n; q = next.fetch_add(1)) compute(q);
            });
        for (auto& t : pool) t.join();
    }
    for (int q = 0; q < n; ++q) seq.exact = seq.exact && node_exact[q];
    int horizon = ls.preperiod + ls.period;
    for (int t = 0; t <= horizon; ++t) {
        int c = 1;
        for (int q : reachable_from_time(ls, t)) c = std::max(c, seq.per_node_sizes[q]);
        seq.values.push_back(c);
    }
    for (size_t t = 1; t < seq.values.size(); ++t)
        if (seq.exact && seq.values[t] > seq.values[t - 1])
            throw std::logic_error("size sequence increased; product construction bug");
    seq.limit = seq.values.back();
    seq.stabilization_time = static_cast<int>(seq.values.size()) - 1;
    while (seq.stabilization_time > 0 &&
           seq.values[seq.stabilization_time - 1] == seq.limit)
        --seq.stabilization_time;
    return seq;
}

/// Earliest t with |c_t - c_infinity| <= beta. Requires an exact sequence.
inline int convergence_time_beta(const SizeSequence& seq, double beta) {
    if (!seq.exact)
        throw UnsupportedError("t_beta undefined on a bounds-only size sequence");
    for (size_t t = 0; t < seq.values.size(); ++t)
        if (std::fabs(static_cast<double>(seq.values[t] - seq.limit)) <= beta)
            return static_cast<int>(t);
    return static_cast<int>(seq.values.size()) - 1;
}

}  // namespace bac
