#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoy/environments.hpp"
#include "decoy/mdp.hpp"
#include "decoy/numeric.hpp"
#include "decoy/oracle.hpp"
#include "helpers.hpp"

#include <cmath>
#include <limits>

using namespace decoy;
using decoy::testing::blank_mdp;
using decoy::testing::chain_of;

namespace {

// 3-state chain s0 -> s1 -> sink, one action, reward on target s1.
Mdp three_state_chain() {
    Mdp mdp = blank_mdp(3, 1, 2);
    mdp.targets = {1};
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(1, 0) = {{2, 1.0}};
    mdp.row(2, 0) = {{2, 1.0}};
    mdp.reward2[mdp.sa_index(1, 0)] = 1.0;
    return mdp;
}

} // namespace

TEST_CASE("validate accepts a well-formed chain") {
    CHECK(validate(three_state_chain()).ok());
}

TEST_CASE("validate flags a deficient transition row") {
    Mdp mdp = three_state_chain();
    mdp.row(0, 0) = {{1, 0.9}};
    ValidationReport report = validate(mdp);
    REQUIRE_FALSE(report.ok());
    bool named = false;
    for (const auto& v : report.violations)
        if (v.find("s0") != std::string::npos && v.find("a0") != std::string::npos &&
            v.find("sum") != std::string::npos)
            named = true;
    CHECK(named);
}

TEST_CASE("validate flags a target with a non-sink successor") {
    Mdp mdp = three_state_chain();
    mdp.row(1, 0) = {{0, 0.5}, {2, 0.5}};
    ValidationReport report = validate(mdp);
    REQUIRE_FALSE(report.ok());
    bool named = false;
    for (const auto& v : report.violations)
        if (v.find("target not terminating") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("induce_chain follows a deterministic policy") {
    Mdp mdp = blank_mdp(3, 2, 2);
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{2, 1.0}};
    std::vector<int> picks = {1, 0, 0};
    MarkovChain chain = induce_chain(mdp, StochasticPolicy::deterministic(picks, 2));
    REQUIRE(chain.rows[0].size() == 1);
    CHECK(chain.rows[0][0].state == 2);
    CHECK(chain.rows[0][0].prob == doctest::Approx(1.0));
}

TEST_CASE("induce_chain mixes actions by the policy") {
    Mdp mdp = blank_mdp(3, 2, 2);
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{2, 1.0}};
    MarkovChain chain = induce_chain(mdp, StochasticPolicy::uniform(3, 2));
    REQUIRE(chain.rows[0].size() == 2);
    CHECK(chain.rows[0][0].prob == doctest::Approx(0.5));
    CHECK(chain.rows[0][1].prob == doctest::Approx(0.5));
}

TEST_CASE("induce_chain rows are stochastic on random models") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Instance inst = random_attack_graph(8, 2, 3, seed, 1, 1);
        StochasticPolicy pi = StochasticPolicy::uniform(8, 2);
        MarkovChain chain = induce_chain(inst.mdp, pi);
        for (const auto& row : chain.rows) {
            double sum = 0.0;
            for (const auto& e : row) sum += e.prob;
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("induce_chain rejects a policy with the wrong shape") {
    Mdp mdp = three_state_chain();
    CHECK_THROWS_AS(induce_chain(mdp, StochasticPolicy::uniform(2, 1)), std::invalid_argument);
}

TEST_CASE("policy_evaluation: absorbing state paying 1 is a geometric series") {
    Mdp mdp = blank_mdp(1, 1, 0);
    std::vector<double> reward = {1.0};
    ValueVector v = policy_evaluation(mdp, reward, StochasticPolicy::uniform(1, 1), 0.95);
    CHECK(v[0] == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("policy_evaluation: zero reward gives zero value") {
    Mdp mdp = three_state_chain();
    std::vector<double> reward(mdp.reward2.size(), 0.0);
    ValueVector v = policy_evaluation(mdp, reward, StochasticPolicy::uniform(3, 1), 0.95);
    for (double x : v) CHECK(x == doctest::Approx(0.0));
}

TEST_CASE("policy_evaluation rejects non-finite rewards") {
    Mdp mdp = three_state_chain();
    std::vector<double> reward(mdp.reward2.size(), 0.0);
    reward[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(policy_evaluation(mdp, reward, StochasticPolicy::uniform(3, 1), 0.95),
                    std::invalid_argument);
}

TEST_CASE("policy_evaluation agrees with Monte Carlo rollouts") {
    Instance inst = random_attack_graph(10, 3, 3, 7, 1, 2);
    StochasticPolicy pi = StochasticPolicy::uniform(10, 3);
    ValueVector v = policy_evaluation(inst.mdp, inst.mdp.reward2, pi, inst.mdp.discount);
    double at_init = 0.0;
    for (int s = 0; s < 10; ++s) at_init += inst.mdp.init[s] * v[s];

    oracle::OracleBudget budget;
    budget.rollouts = 1000000;
    budget.horizon = 500;
    budget.seed = 11;
    auto [estimate, se] =
        oracle::monte_carlo_value(inst.mdp, pi, inst.mdp.reward2, inst.mdp.discount, budget);
    CHECK(std::abs(estimate - at_init) <= 3.0 * se + 1e-9);
}

TEST_CASE("optimal_value picks the rewarding action") {
    Mdp mdp = blank_mdp(2, 2, 1);
    mdp.targets = {0};
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{1, 1.0}};
    mdp.reward2[mdp.sa_index(0, 0)] = 1.0;
    auto [v, pi] = optimal_value(mdp, mdp.reward2, 0.95);
    CHECK(pi.prob(0, 0) == doctest::Approx(1.0));
    CHECK(v[0] == doctest::Approx(1.0));
}

TEST_CASE("optimal_value matches exhaustive policy enumeration") {
    Instance inst = random_attack_graph(5, 2, 2, 3, 1, 1);
    auto [v, pi] = optimal_value(inst.mdp, inst.mdp.reward2, inst.mdp.discount);
    double at_init = 0.0;
    for (int s = 0; s < 5; ++s) at_init += inst.mdp.init[s] * v[s];
    auto [best, best_pi] =
        oracle::enumerate_best_response(inst.mdp, inst.mdp.reward2, inst.mdp.discount, {});
    CHECK(at_init == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("optimal_value breaks ties toward the lowest action index") {
    Mdp mdp = blank_mdp(2, 2, 1);
    mdp.targets = {0};
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{1, 1.0}};
    mdp.reward2[mdp.sa_index(0, 0)] = 1.0;
    mdp.reward2[mdp.sa_index(0, 1)] = 1.0;
    auto [v, pi] = optimal_value(mdp, mdp.reward2, 0.95);
    CHECK(pi.prob(0, 0) == doctest::Approx(1.0));
    CHECK(pi.prob(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("soft_value_iteration equals hard values for a single action") {
    Mdp mdp = three_state_chain();
    SoftSolution soft = soft_value_iteration(mdp, mdp.reward2, 0.95, 0.5);
    auto [hard, pi] = optimal_value(mdp, mdp.reward2, 0.95);
    for (int s = 0; s < 3; ++s) CHECK(soft.values[s] == doctest::Approx(hard[s]).epsilon(1e-9));
}

TEST_CASE("soft_value_iteration splits equal Q-values evenly") {
    Mdp mdp = blank_mdp(2, 2, 1);
    mdp.targets = {0};
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{1, 1.0}};
    mdp.reward2[mdp.sa_index(0, 0)] = 1.0;
    mdp.reward2[mdp.sa_index(0, 1)] = 1.0;
    SoftSolution soft = soft_value_iteration(mdp, mdp.reward2, 0.95, 0.3);
    CHECK(soft.policy.prob(0, 0) == doctest::Approx(0.5));
    CHECK(soft.policy.prob(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("soft_value_iteration rejects a nonpositive temperature") {
    Mdp mdp = three_state_chain();
    CHECK_THROWS_AS(soft_value_iteration(mdp, mdp.reward2, 0.95, 0.0), std::invalid_argument);
}

TEST_CASE("cold soft policy concentrates on the hard argmax set") {
    Instance inst = random_attack_graph(8, 3, 3, 21, 1, 2);
    SoftSolution soft = soft_value_iteration(inst.mdp, inst.mdp.reward2, inst.mdp.discount, 1e-4);
    auto [hard, greedy] = optimal_value(inst.mdp, inst.mdp.reward2, inst.mdp.discount);
    for (int s = 0; s < 8; ++s) {
        int soft_best = 0, hard_best = 0;
        for (int a = 1; a < 3; ++a) {
            if (soft.policy.prob(s, a) > soft.policy.prob(s, soft_best)) soft_best = a;
            if (greedy.prob(s, a) > greedy.prob(s, hard_best)) hard_best = a;
        }
        CHECK(soft_best == hard_best);
    }
}

TEST_CASE("soft values stay within the temperature bound of hard values") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Instance inst = random_attack_graph(7, 3, 3, 100 + seed, 1, 1);
        const double tau = 0.05 + 0.1 * static_cast<double>(seed);
        SoftSolution soft =
            soft_value_iteration(inst.mdp, inst.mdp.reward2, inst.mdp.discount, tau);
        auto [hard, pi] = optimal_value(inst.mdp, inst.mdp.reward2, inst.mdp.discount);
        const double bound = tau * std::log(3.0) / (1.0 - inst.mdp.discount) + 1e-9;
        for (int s = 0; s < 7; ++s) CHECK(std::abs(soft.values[s] - hard[s]) <= bound);
    }
}

TEST_CASE("occupancy of a single absorbing state is 1/(1-gamma)") {
    MarkovChain chain = chain_of({{{0, 1.0}}}, {1.0});
    OccupancyMeasure occ = occupancy(chain, StochasticPolicy::uniform(1, 1), 0.9);
    CHECK(occ.state_occ[0] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("occupancy matches the hand geometric sum on a two-state chain") {
    MarkovChain chain = chain_of({{{1, 1.0}}, {{1, 1.0}}}, {1.0, 0.0});
    OccupancyMeasure occ = occupancy(chain, StochasticPolicy::uniform(2, 1), 0.5);
    CHECK(occ.state_occ[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(occ.state_occ[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("occupancy mass totals 1/(1-gamma) and splits across actions") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance inst = random_attack_graph(9, 3, 3, 200 + seed, 1, 1);
        StochasticPolicy pi = StochasticPolicy::uniform(9, 3);
        MarkovChain chain = induce_chain(inst.mdp, pi);
        OccupancyMeasure occ = occupancy(chain, pi, inst.mdp.discount);
        double total = 0.0;
        for (double v : occ.state_occ) total += v;
        CHECK(std::abs(total - 1.0 / (1.0 - inst.mdp.discount)) <= 1e-6);
        for (int s = 0; s < 9; ++s) {
            double row = 0.0;
            for (int a = 0; a < 3; ++a) row += occ.state_action_occ[s * 3 + a];
            CHECK(std::abs(row - occ.state_occ[s]) <= 1e-8);
        }
    }
}

TEST_CASE("reach_probability of a certain path is 1") {
    MarkovChain chain = chain_of({{{1, 1.0}}, {{1, 1.0}}}, {1.0, 0.0});
    std::vector<int> target = {1};
    CHECK(reach_probability(chain, target) == doctest::Approx(1.0));
}

TEST_CASE("reach_probability of a fair coin is one half") {
    // s0 flips between the target s1 and the dead end s2.
    MarkovChain chain = chain_of({{{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}}, {1.0, 0.0, 0.0});
    std::vector<int> target = {1};
    CHECK(reach_probability(chain, target) == doctest::Approx(0.5));
}

TEST_CASE("reach_probability rejects a non-absorbing target set") {
    MarkovChain chain = chain_of({{{1, 1.0}}, {{0, 1.0}}}, {1.0, 0.0});
    std::vector<int> target = {1};
    CHECK_THROWS_AS(reach_probability(chain, target), std::invalid_argument);
}

TEST_CASE("reach_probability agrees with Monte Carlo rollouts") {
    Instance inst = random_attack_graph(12, 2, 3, 31, 2, 2);
    StochasticPolicy pi = StochasticPolicy::uniform(12, 2);
    MarkovChain chain = induce_chain(inst.mdp, pi);
    // Freeze targets so they become absorbing for both computations.
    for (int t : inst.mdp.targets) chain.rows[t] = {{t, 1.0}};
    double exact = reach_probability(chain, inst.mdp.targets);

    oracle::OracleBudget budget;
    budget.rollouts = 1000000;
    budget.horizon = 500;
    budget.seed = 5;
    auto [estimate, se] = oracle::monte_carlo_reach(chain, inst.mdp.targets, budget);
    CHECK(std::abs(estimate - exact) <= 3.0 * se + 1e-9);
}

TEST_CASE("kl_divergence of identical chains is zero") {
    MarkovChain chain = chain_of({{{1, 0.3}, {0, 0.7}}, {{1, 1.0}}}, {1.0, 0.0});
    CHECK(kl_divergence(chain, chain, 50) == doctest::Approx(0.0));
}

TEST_CASE("kl_divergence matches the hand value on a one-step coin") {
    MarkovChain p = chain_of({{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}, {1.0, 0.0});
    MarkovChain q = chain_of({{{0, 0.9}, {1, 0.1}}, {{1, 1.0}}}, {1.0, 0.0});
    const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(kl_divergence(p, q, 1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl_divergence is infinite when support leaks") {
    MarkovChain p = chain_of({{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}, {1.0, 0.0});
    MarkovChain q = chain_of({{{0, 1.0}}, {{1, 1.0}}}, {1.0, 0.0});
    CHECK(std::isinf(kl_divergence(p, q, 5)));
}

TEST_CASE("kl_divergence rejects mismatched state sets") {
    MarkovChain p = chain_of({{{0, 1.0}}}, {1.0});
    MarkovChain q = chain_of({{{0, 1.0}}, {{1, 1.0}}}, {1.0, 0.0});
    CHECK_THROWS_AS(kl_divergence(p, q, 5), std::invalid_argument);
}

TEST_CASE("kl_divergence is nonnegative on random chain pairs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance inst = random_attack_graph(6, 2, 3, 300 + seed, 1, 1);
        Rng rng(seed);
        auto random_policy = [&] {
            StochasticPolicy pi;
            pi.num_actions = 2;
            pi.probs.resize(12);
            for (int s = 0; s < 6; ++s) {
                double w = 0.1 + 0.8 * rng.next_double();
                pi.prob(s, 0) = w;
                pi.prob(s, 1) = 1.0 - w;
            }
            return pi;
        };
        MarkovChain p = induce_chain(inst.mdp, random_policy());
        MarkovChain q = induce_chain(inst.mdp, random_policy());
        double kl = kl_divergence(p, q, 50);
        CHECK(kl >= 0.0);
    }
}
