#include <doctest.h>

#include <set>

#include "bac/agents.hpp"
#include "bac/envs.hpp"
#include "bac/product.hpp"
#include "bac/random_fixtures.hpp"
#include "fixtures.hpp"

using namespace bac;

namespace {

// Example 1 fixture: constant one-action agent in a reward-flip-at-10 env.
struct Example1 {
    Interface f = fixtures::iface(1, 1);
    BoundedAgent agent = constant_agent(fixtures::det(0, 1), f);
    FiniteEnvironment env =
        clocked_env(bandit_env({0.0}, f), 10, 0.0, 1.0, f);
};

int env_fold(const FiniteEnvironment& env, const History& h) {
    int x = env.start;
    for (auto [a, o] : h.steps) x = env.update[x][a][o];
    return x;
}

}  // namespace

TEST_CASE("degenerate product: 1-state agent in a bandit") {
    auto f = fixtures::iface(2, 1);
    auto agent = constant_agent(fixtures::uniform(2), f);
    auto env = bandit_env({0.0, 1.0}, f);
    auto g = build_product(agent, env, f);
    CHECK(g.num_nodes() == 1);
    CHECK(g.edges[0].size() == 2);  // |support(pi)| * |support(e)|
}

TEST_CASE("product of the Q-learner fixture") {
    auto f = fixtures::move_stay_iface();
    auto agent = bounded_q_agent(fixtures::aggregated_q_config(), f);
    auto env = move_stay_env(f);
    auto g = build_product(agent, env, f);
    std::set<int> agent_states, env_states;
    for (const auto& n : g.nodes) {
        agent_states.insert(n.agent_state);
        env_states.insert(n.env_state);
    }
    CHECK(env_states.size() == 2);
    CHECK(agent_states.size() == 4);
    CHECK(g.num_nodes() == 6);
}

TEST_CASE("Example-1 product is a line with a self-loop at the cap") {
    Example1 ex;
    auto g = build_product(ex.agent, ex.env, ex.f);
    CHECK(g.num_nodes() == 11);
    for (int q = 0; q < 11; ++q) {
        REQUIRE(g.edges[q].size() == 1);
        CHECK(g.edges[q][0].succ == std::min(q + 1, 10));
    }
}

TEST_CASE("interface mismatch is an input error") {
    auto f2 = fixtures::iface(2, 1);
    auto f3 = fixtures::iface(3, 1);
    auto agent = constant_agent(fixtures::uniform(2), f2);
    auto env = bandit_env({0.0, 1.0, 2.0}, f3);
    CHECK_THROWS_AS(build_product(agent, env, f3), InputError);
}

TEST_CASE("layer sequence periodicity") {
    SUBCASE("self-loop fixes immediately") {
        auto f = fixtures::iface(1, 1);
        auto agent = constant_agent(fixtures::det(0, 1), f);
        auto env = bandit_env({0.0}, f);
        auto g = build_product(agent, env, f);
        auto ls = layer_sequence(g);
        CHECK(ls.preperiod == 0);
        CHECK(ls.period == 1);
    }
    SUBCASE("deterministic 2-cycle has period 2") {
        auto f = fixtures::move_stay_iface();
        // always move, deterministically; env states alternate
        ActionDist move = fixtures::det(0, 2);
        auto agent = constant_agent(move, f);
        auto env = move_stay_env(f);
        auto g = build_product(agent, env, f);
        auto ls = layer_sequence(g);
        CHECK(ls.period == 2);
    }
    SUBCASE("Example-1 clock saturates: p=10, d=1") {
        Example1 ex;
        auto g = build_product(ex.agent, ex.env, ex.f);
        auto ls = layer_sequence(g);
        CHECK(ls.preperiod == 10);
        CHECK(ls.period == 1);
    }
    SUBCASE("tight caps fail loudly") {
        Example1 ex;
        auto g = build_product(ex.agent, ex.env, ex.f);
        CHECK_THROWS_AS(layer_sequence(g, 3), ResourceError);
    }
}

TEST_CASE("layer recurrence holds beyond the detected period") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        auto f = random_interface(seed);
        auto agent = random_agent(seed, f);
        auto env = random_env(seed, f);
        auto g = build_product(agent, env, f);
        auto ls = layer_sequence(g);
        // recompute layers past the detected cycle and check L_{p+i} = L_{p+d+i}
        std::vector<std::vector<int>> layers = ls.layers;
        int need = ls.preperiod + 4 * ls.period + 1;
        while (static_cast<int>(layers.size()) < need) {
            std::set<int> next;
            for (int q : layers.back())
                for (const auto& e : g.edges[q]) next.insert(e.succ);
            layers.emplace_back(next.begin(), next.end());
        }
        for (int i = 0; i <= 3 * ls.period; ++i)
            CHECK(layers[ls.preperiod + i] == layers[ls.preperiod + ls.period + i]);
    }
}

TEST_CASE("reachable_from_time") {
    SUBCASE("t=0 covers every reachable node") {
        auto f = fixtures::move_stay_iface();
        auto agent = bounded_q_agent(fixtures::aggregated_q_config(), f);
        auto env = move_stay_env(f);
        auto g = build_product(agent, env, f);
        auto ls = layer_sequence(g);
        CHECK(static_cast<int>(reachable_from_time(ls, 0).size()) == g.num_nodes());
    }
    SUBCASE("Example-1 at t=10 keeps only the saturated node") {
        Example1 ex;
        auto g = build_product(ex.agent, ex.env, ex.f);
        auto ls = layer_sequence(g);
        auto r = reachable_from_time(ls, 10);
        REQUIRE(r.size() == 1);
        CHECK(g.nodes[r[0]].env_state == ex.env.num_states() - 1);
    }
    SUBCASE("monotone and eventually constant") {
        for (uint64_t seed = 0; seed < 20; ++seed) {
            auto f = random_interface(seed);
            auto g = build_product(random_agent(seed, f), random_env(seed, f), f);
            auto ls = layer_sequence(g);
            auto prev = reachable_from_time(ls, 0);
            for (int t = 1; t <= ls.preperiod + ls.period + 2; ++t) {
                auto cur = reachable_from_time(ls, t);
                CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
                if (t >= ls.preperiod) CHECK(cur == reachable_from_time(ls, ls.preperiod));
                prev = cur;
            }
        }
    }
}

TEST_CASE("revisit pairs") {
    SUBCASE("single self-loop node revisits itself") {
        auto f = fixtures::iface(1, 1);
        auto g = build_product(constant_agent(fixtures::det(0, 1), f), bandit_env({0.0}, f), f);
        auto pairs = revisit_pairs(g, {0});
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0] == std::pair<int, int>{0, 0});
    }
    SUBCASE("the Q-learner fixture revisits the same agent state across env states") {
        auto f = fixtures::move_stay_iface();
        auto agent = bounded_q_agent(fixtures::aggregated_q_config(), f);
        auto g = build_product(agent, move_stay_env(f), f);
        auto ls = layer_sequence(g);
        auto pairs = revisit_pairs(g, reachable_from_time(ls, 0));
        bool crosses = false;
        for (auto [q, q2] : pairs)
            crosses = crosses || (g.nodes[q].env_state != g.nodes[q2].env_state);
        CHECK(crosses);
    }
    SUBCASE("non-empty for every t on every valid pair") {
        for (uint64_t seed = 0; seed < 40; ++seed) {
            auto f = random_interface(seed);
            auto g = build_product(random_agent(seed, f), random_env(seed, f), f);
            auto ls = layer_sequence(g);
            for (int t = 0; t <= ls.preperiod + ls.period; ++t)
                CHECK_FALSE(revisit_pairs(g, reachable_from_time(ls, t)).empty());
        }
    }
}

TEST_CASE("history enumeration") {
    SUBCASE("depth 0 yields only the empty history") {
        auto f = fixtures::iface(1, 1);
        auto g = build_product(constant_agent(fixtures::det(0, 1), f), bandit_env({0.0}, f), f);
        auto hist = enumerate_histories(g, 0);
        REQUIRE(hist.size() == 1);
        CHECK(hist[0].first.length() == 0);
        CHECK(hist[0].second == 0);
    }
    SUBCASE("two supported actions branch as a binary tree") {
        auto f = fixtures::iface(2, 1);
        auto g = build_product(constant_agent(fixtures::uniform(2), f), bandit_env({0.0, 1.0}, f),
                               f);
        auto hist = enumerate_histories(g, 2);
        int len2 = 0;
        for (const auto& [h, q] : hist)
            if (h.length() == 2) ++len2;
        CHECK(len2 == 4);
    }
    SUBCASE("deterministic switching prefix") {
        auto f = fixtures::iface(2, 1);
        auto g = build_product(fixtures::example2_agent(f), bandit_env({0.0, 0.0}, f), f);
        auto hist = enumerate_histories(g, 3);
        REQUIRE(hist.size() == 4);  // one history per length
        CHECK(hist.back().first.steps ==
              std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 0}});
    }
    SUBCASE("budget overruns are resource errors") {
        auto f = fixtures::iface(2, 2);
        auto agent = constant_agent(fixtures::uniform(2), f);
        auto env = random_mdp(3, f);
        auto g = build_product(agent, env, f);
        CHECK_THROWS_AS(enumerate_histories(g, 30, 100), ResourceError);
    }
}

TEST_CASE("node factorization matches explicit history folds") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        auto f = random_interface(seed);
        auto agent = random_agent(seed, f);
        auto env = random_env(seed, f);
        auto g = build_product(agent, env, f);
        auto hist = enumerate_histories(g, 5, 200000);
        for (const auto& [h, q] : hist) {
            CHECK(g.nodes[q].agent_state == run_update(agent, h));
            CHECK(g.nodes[q].env_state == env_fold(env, h));
        }
    }
}
