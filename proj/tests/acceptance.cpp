// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
// argv[1] must point at the bundled scenario directory.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "bac/agents.hpp"
#include "bac/distortion.hpp"
#include "bac/envs.hpp"
#include "bac/minimize.hpp"
#include "bac/random_fixtures.hpp"
#include "bac/scenario.hpp"

using namespace bac;

namespace {

int g_failures = 0;

void criterion(const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    std::string note;
    try {
        ok = body();
    } catch (const std::exception& e) {
        ok = false;
        note = std::string(" (") + e.what() + ")";
    }
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << note << std::endl;
    if (!ok) ++g_failures;
}

struct Pair {
    Interface f;
    BoundedAgent agent;
    FiniteEnvironment env;
};

Pair seeded_pair(uint64_t seed, int max_a = 3, int max_o = 3, int max_s = 4) {
    Pair p;
    p.f = random_interface(seed, max_a, max_o);
    p.agent = random_agent(seed, p.f, max_s);
    p.env = random_env(seed, p.f, max_s);
    return p;
}

bool witness_agrees(const IncompleteMooreMachine& m, const BoundedAgent& cand) {
    const int n = cand.num_states();
    std::vector<bool> seen(static_cast<size_t>(m.num_states) * n, false);
    std::vector<std::pair<int, int>> stack{{m.root, cand.start}};
    seen[static_cast<size_t>(m.root) * n + cand.start] = true;
    while (!stack.empty()) {
        auto [p, c] = stack.back();
        stack.pop_back();
        if (!dist_equal(m.output_dists[m.output[p]], cand.policy[c], m.tol)) return false;
        for (int i = 0; i < m.num_inputs; ++i) {
            if (m.trans[p][i] < 0) continue;
            int p2 = m.trans[p][i], c2 = cand.update[c][i][0];
            size_t key = static_cast<size_t>(p2) * n + c2;
            if (!seen[key]) {
                seen[key] = true;
                stack.emplace_back(p2, c2);
            }
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <scenario-dir>\n";
        return 2;
    }
    const std::string dir = argv[1];
    auto load = [&](const std::string& name) { return load_scenario(dir + "/" + name + ".json"); };

    criterion("size-sequence-laws (200 random pairs)", [&] {
        for (uint64_t seed = 0; seed < 200; ++seed) {
            auto p = seeded_pair(seed);
            auto g = build_product(p.agent, p.env, p.f);
            auto ls = layer_sequence(g);
            auto seq = size_sequence(g, ls, p.f);  // throws if c_t ever increases
            if (!seq.exact) return false;
            if (static_cast<int>(seq.values.size()) != ls.preperiod + ls.period + 1) return false;
            for (size_t t = 1; t < seq.values.size(); ++t)
                if (seq.values[t] > seq.values[t - 1]) return false;
            for (int c : seq.values)
                if (c < 1 || c > p.agent.num_states()) return false;
            for (size_t t = ls.preperiod; t < seq.values.size(); ++t)
                if (seq.values[t] != seq.values[ls.preperiod]) return false;
        }
        return true;
    });

    criterion("distortion-sequence-laws (200 random pairs)", [&] {
        for (uint64_t seed = 0; seed < 200; ++seed) {
            auto p = seeded_pair(seed);
            auto g = build_product(p.agent, p.env, p.f);
            auto ls = layer_sequence(g);
            for (auto spec : {PerformanceSpec::myopic(), PerformanceSpec::discounted(0.9)}) {
                auto vt = exact_value(g, spec);
                auto seq = distortion_sequence(g, vt, ls);  // throws on any increase
                for (size_t t = 1; t < seq.values.size(); ++t)
                    if (seq.values[t] > seq.values[t - 1] + 1e-12) return false;
                for (double d : seq.values)
                    if (d < 0 || d > vt.v_max - vt.v_min + 1e-9) return false;
            }
            for (int t = 0; t <= ls.preperiod + ls.period; ++t)
                if (revisit_pairs(g, reachable_from_time(ls, t)).empty()) return false;
        }
        return true;
    });

    criterion("limiting-size-structure-bounds", [&] {
        auto f2 = random_interface(0, 1, 1);
        f2.actions = {"a0", "a1"};
        f2.observations = {"o0"};
        auto ca = constant_agent(ActionDist{{0.5, 0.5}}, f2);
        auto cg = build_product(ca, bandit_env({0.0, 1.0}, f2), f2);
        auto cls = layer_sequence(cg);
        if (size_sequence(cg, cls, f2).limit != 1) return false;

        Interface f;
        f.actions = {"a0", "a1"};
        f.observations = {"o0", "o1", "o2"};
        for (uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::vector<ActionDist> policy;
            for (int o = 0; o < 3; ++o) policy.push_back(rnd::dist(rng, 2));
            auto agent = memoryless_agent(policy, 0, f);
            auto g = build_product(agent, random_mdp(seed, f), f);
            auto seq = size_sequence(g, layer_sequence(g), f);
            if (!seq.exact || seq.limit > 3) return false;
        }

        Interface f22;
        f22.actions = {"a0", "a1"};
        f22.observations = {"o0", "o1"};
        for (uint64_t seed = 0; seed < 10; ++seed) {
            std::mt19937_64 rng(seed + 1000);
            std::vector<ActionDist> policy;
            for (int w = 0; w < 4; ++w) policy.push_back(rnd::dist(rng, 2));
            auto agent = korder_agent(2, policy, 0, f22);
            auto g = build_product(agent, random_mdp(seed, f22), f22);
            auto seq = size_sequence(g, layer_sequence(g), f22);
            if (!seq.exact || seq.limit > 4) return false;
        }
        return true;
    });

    criterion("memoryless-zero-distortion (20 random MDPs)", [&] {
        Interface f;
        f.actions = {"a0", "a1"};
        f.observations = {"o0", "o1", "o2"};
        for (uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::vector<ActionDist> policy;
            for (int o = 0; o < 3; ++o) policy.push_back(rnd::dist(rng, 2));
            auto agent = memoryless_agent(policy, 0, f);
            if (!check_last_obs_condition(agent).first) return false;
            auto g = build_product(agent, random_mdp(seed, f), f);
            auto ls = layer_sequence(g);
            for (auto spec : {PerformanceSpec::myopic(), PerformanceSpec::discounted(0.9),
                              PerformanceSpec::average()}) {
                auto seq = distortion_sequence(g, exact_value(g, spec), ls);
                for (double d : seq.values)
                    if (std::fabs(d) > 1e-9) return false;
            }
        }
        return true;
    });

    criterion("q-learner-positive-distortion", [&] {
        Interface f;
        f.actions = {"move", "stay"};
        f.observations = {"o1", "o2"};
        QAgentConfig cfg;
        cfg.q_grid = {-1.0, 0.0, 1.0};
        cfg.alpha = 1.0;
        cfg.epsilon = 0.5;
        cfg.obs_aggregation = {0, 0};
        cfg.reward_channel = {{-1.0}, {+1.0}};
        auto agent = bounded_q_agent(cfg, f);
        auto g = build_product(agent, move_stay_env(f), f);
        auto seq =
            distortion_sequence(g, exact_value(g, PerformanceSpec::myopic()), layer_sequence(g));
        return seq.limit > 0 && std::fabs(seq.limit - 2.0) <= 1e-9;
    });

    criterion("worked-examples", [&] {
        auto r1 = cmd_analyze(load("example1"));
        if (r1.t_beta != 0) return false;
        if (r1.t_eps != 9 && r1.t_eps != 10) return false;
        if (!(r1.t_beta < r1.t_eps)) return false;
        auto r2 = cmd_analyze(load("example2"));
        if (r2.t_eps != 0 || r2.t_beta != 10) return false;
        for (double d : r2.distortion.values)
            if (d != 0.0) return false;
        if (r2.size.values.front() <= 1) return false;
        if (r2.size.values[10] != 1 || r2.size.limit != 1) return false;
        return true;
    });

    criterion("independent-oracles (50 tiny pairs)", [&] {
        int ran_distortion = 0;
        for (uint64_t seed = 0; seed < 50; ++seed) {
            auto p = seeded_pair(seed, 2, 2, 2);
            auto g = build_product(p.agent, p.env, p.f);
            auto ls = layer_sequence(g);
            auto vt = exact_value(g, PerformanceSpec::myopic());
            double engine = distortion_at(g, vt, reachable_from_time(ls, 0));
            int depth = ls.preperiod + ls.period + g.num_nodes();
            try {
                double oracle = distortion_oracle(p.agent, p.env, p.f, PerformanceSpec::myopic(),
                                                  depth, 0, 500000);
                if (std::fabs(engine - oracle) > 1e-9) return false;
                ++ran_distortion;
            } catch (const ResourceError&) {
            }
            auto m = future_machine(g, 0);
            auto res = min_closed_cover(m, p.f.num_actions(), p.f.num_observations());
            if (!res.exact) return false;
            try {
                int oracle = size_oracle(m, 3);
                if (res.size <= 3 ? oracle != res.size : oracle != 4) return false;
            } catch (const ResourceError&) {
            }
        }
        return ran_distortion >= 20;
    });

    criterion("minimization-brackets", [&] {
        for (uint64_t seed = 0; seed < 40; ++seed) {
            auto m = random_machine(seed, 6, 2, 2, 1.0);
            auto res = min_closed_cover(m, m.num_inputs, 1);
            if (!res.exact || res.size != heuristic_size(m)) return false;
        }
        for (uint64_t seed = 0; seed < 20; ++seed) {
            auto m = random_machine(seed, 6, 2, 2);
            auto res = min_closed_cover(m, m.num_inputs, 1);
            if (!res.exact) return false;
            if (res.lower > res.size || res.size > heuristic_size(m)) return false;
            if (!res.witness || res.witness->num_states() != res.size) return false;
            if (!witness_agrees(m, *res.witness)) return false;
        }
        return true;
    });

    criterion("value-engine-crosschecks (100 fixtures)", [&] {
        int mc_hits = 0;
        for (uint64_t seed = 0; seed < 100; ++seed) {
            auto p = seeded_pair(seed + 5000);
            auto g = build_product(p.agent, p.env, p.f);
            for (double gamma : {0.9, 0.99}) {
                auto vt = exact_value(g, PerformanceSpec::discounted(gamma));
                if (bellman_residual(g, vt) > 1e-12) return false;
            }
            auto my = exact_value(g, PerformanceSpec::myopic());
            if (bellman_residual(g, my) > 1e-12) return false;

            auto spec = PerformanceSpec::discounted(0.9);
            auto vt = exact_value(g, spec);
            auto mc = mc_estimate_value(p.agent, p.env, g.nodes[0], spec, 4000, 400, seed + 5000);
            if (std::fabs(mc.estimate - vt.values[0]) <= 3 * mc.ci_halfwidth + 1e-9) ++mc_hits;
        }
        return mc_hits >= 95;
    });

    criterion("parallel-determinism (all bundled scenarios)", [&] {
        for (const char* name :
             {"bandit-constant", "mdp-memoryless", "korder", "movestay", "example1", "example2",
              "random-pair-1", "random-pair-2", "random-pair-3"}) {
            auto sc = load(name);
            auto one = report_to_json(cmd_analyze(sc, 1)).dump(2);
            auto eight = report_to_json(cmd_analyze(sc, 8)).dump(2);
            if (one != eight) return false;
        }
        return true;
    });

    if (g_failures == 0)
        std::cout << "all criteria passed" << std::endl;
    else
        std::cout << g_failures << " criteria failed" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
