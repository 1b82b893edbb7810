#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "decoy/environments.hpp"
#include "decoy/irl.hpp"
#include "decoy/numeric.hpp"
#include "decoy/oracle.hpp"
#include "decoy/synthesis.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace decoy;

namespace {

// s0 branches to a decoy candidate d or the target f; one modifiable pair on
// the decoy-bound action.
Mdp branch_mdp() {
    Mdp mdp = decoy::testing::blank_mdp(4, 2, 3, 0.9);
    mdp.state_names = {"s0", "d", "f", "sink"};
    mdp.targets = {2};
    mdp.row(0, 0) = {{1, 1.0}};
    mdp.row(0, 1) = {{2, 1.0}};
    mdp.row(1, 0) = {{2, 1.0}};
    mdp.row(1, 1) = {{0, 1.0}};
    mdp.row(2, 0) = {{3, 1.0}};
    mdp.row(2, 1) = {{3, 1.0}};
    mdp.row(3, 0) = {{3, 1.0}};
    mdp.row(3, 1) = {{3, 1.0}};
    mdp.reward2[mdp.sa_index(2, 0)] = 1.0;
    mdp.reward2[mdp.sa_index(2, 1)] = 1.0;
    return mdp;
}

DefenseDomain branch_domain() {
    DefenseDomain domain;
    domain.decoys = {1};
    domain.modifiable = {{0, 0}};
    return domain;
}

StochasticPolicy decoy_seeking_target(double p) {
    StochasticPolicy target = StochasticPolicy::uniform(4, 2);
    target.prob(0, 0) = p;
    target.prob(0, 1) = 1.0 - p;
    return target;
}

StochasticPolicy soft_response(const Mdp& base, const DefenseDomain& domain,
                               const DefenseStrategy& strategy, double temperature) {
    Mdp dynamics = perceptual_dynamics(base, domain.decoys);
    std::vector<double> reward = perceived_reward_map(base, strategy);
    return soft_value_iteration(dynamics, reward, base.discount, temperature).policy;
}

} // namespace

TEST_CASE("objective diverges to -infinity as the allocation exhausts the budget") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 2.0;
    ProjectionConfig cfg;
    cfg.barrier_weight = 1.0; // undamped barrier exposes the limit directly
    OccupancyMeasure tocc = target_occupancy(mdp, domain, decoy_seeking_target(0.5), 0.9);
    std::vector<double> x = {0.0};
    double previous = irl_objective(mdp, domain, h, x, std::vector<double>{1.0}, tocc, cfg);
    for (double slack : {1e-3, 1e-6, 1e-9, 1e-12}) {
        double value = irl_objective(mdp, domain, h, x, std::vector<double>{h - slack}, tocc, cfg);
        CHECK(value < previous);
        previous = value;
    }
    CHECK(previous < -20.0);
    CHECK_THROWS_AS(irl_objective(mdp, domain, h, x, std::vector<double>{h}, tocc, cfg),
                    std::invalid_argument);
}

TEST_CASE("likelihood term peaks where the target is already soft-optimal") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 5.0;
    ProjectionConfig cfg;
    cfg.barrier_weight = 1e12; // barrier negligible, objective = likelihood term
    std::vector<double> x0 = {-0.2}, y0 = {1.0};
    DefenseStrategy anchor = make_strategy(mdp, domain, x0, y0, h);
    StochasticPolicy target = soft_response(mdp, domain, anchor, cfg.temperature);
    OccupancyMeasure tocc = target_occupancy(mdp, domain, target, 0.9);

    const double at_anchor = irl_objective(mdp, domain, h, x0, y0, tocc, cfg);
    for (double y = 0.5; y <= 1.51; y += 0.05) {
        double value = irl_objective(mdp, domain, h, x0, std::vector<double>{y}, tocc, cfg);
        CHECK(value <= at_anchor + 1e-12);
    }
}

TEST_CASE("large barrier weights recover the unbarriered objective") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 2.0;
    OccupancyMeasure tocc = target_occupancy(mdp, domain, decoy_seeking_target(0.7), 0.9);
    std::vector<double> x = {-0.1}, y = {0.6};

    ProjectionConfig small_t;
    small_t.barrier_weight = 1000.0;
    ProjectionConfig big_t;
    big_t.barrier_weight = 1e12;
    const double with_barrier = irl_objective(mdp, domain, h, x, y, tocc, small_t);
    const double nearly_bare = irl_objective(mdp, domain, h, x, y, tocc, big_t);
    const double bare = with_barrier - std::log(h - 0.6) / 1000.0;
    CHECK(nearly_bare == doctest::Approx(bare).epsilon(1e-9));
}

TEST_CASE("matched occupancies leave only the barrier pull") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 5.0;
    ProjectionConfig cfg;
    std::vector<double> x = {-0.4}, y = {1.2};
    DefenseStrategy anchor = make_strategy(mdp, domain, x, y, h);
    StochasticPolicy target = soft_response(mdp, domain, anchor, cfg.temperature);
    OccupancyMeasure tocc = target_occupancy(mdp, domain, target, 0.9);

    auto [gx, gy] = irl_gradient(mdp, domain, h, x, y, tocc, cfg);
    CHECK(std::abs(gx[0]) <= 1e-10);
    const double pull = 1.0 / (cfg.barrier_weight * (h - 1.2));
    CHECK(gy[0] == doctest::Approx(-pull).epsilon(1e-6));
}

TEST_CASE("gradient matches central finite differences on seeded instances") {
    ProjectionConfig cfg;
    cfg.temperature = 0.5; // smooth regime keeps difference quotients well scaled
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance inst = random_attack_graph(7 + static_cast<int>(seed % 4), 2 + seed % 2, 3,
                                            400 + seed, 1 + seed % 2, 1);
        const std::size_t nw = inst.domain.modifiable.size();
        const std::size_t nd = inst.domain.decoys.size();
        Rng rng(seed);
        std::vector<double> x(nw), y(nd);
        for (auto& v : x) v = -0.2 - 0.4 * rng.next_double();
        for (auto& v : y) v = 0.3 + 0.5 * rng.next_double();

        StochasticPolicy target =
            make_initial_policy(inst.mdp, inst.domain.decoys, InitPolicyKind::Random, seed);
        OccupancyMeasure tocc =
            target_occupancy(inst.mdp, inst.domain, target, inst.mdp.discount);
        auto [gx, gy] = irl_gradient(inst.mdp, inst.domain, inst.budget, x, y, tocc, cfg);

        std::vector<double> point = x;
        point.insert(point.end(), y.begin(), y.end());
        std::vector<double> grad = gx;
        grad.insert(grad.end(), gy.begin(), gy.end());
        auto objective = [&](std::span<const double> p) {
            std::vector<double> px(p.begin(), p.begin() + nw);
            std::vector<double> py(p.begin() + nw, p.end());
            return irl_objective(inst.mdp, inst.domain, inst.budget, px, py, tocc, cfg);
        };
        double err = oracle::finite_difference_check(objective, grad, point, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("a nearly exhausted budget pushes every decoy reward down") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 2.0;
    ProjectionConfig cfg;
    OccupancyMeasure tocc = target_occupancy(mdp, domain, decoy_seeking_target(0.9), 0.9);
    std::vector<double> x = {0.0}, y = {h - 1e-6};
    auto [gx, gy] = irl_gradient(mdp, domain, h, x, y, tocc, cfg);
    CHECK(gy[0] < -900.0); // barrier pull 1/(t * 1e-6) = 1000 dominates
}

TEST_CASE("projection terminates immediately at a fixed point with slack budget") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    const double h = 300.0; // pull 1/(t (h - 1'y)) sits far below the tolerance
    ProjectionConfig cfg;
    std::vector<double> x0 = {-0.2}, y0 = {1.0};
    DefenseStrategy anchor = make_strategy(mdp, domain, x0, y0, h);
    StochasticPolicy target = soft_response(mdp, domain, anchor, cfg.temperature);

    ProjectionResult res = project_policy(mdp, domain, h, target, cfg, &anchor);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.strategy.y[0] == doctest::Approx(1.0));
    CHECK(res.strategy.x[0] == doctest::Approx(-0.2));
}

TEST_CASE("projection reproduces the target's branch choice") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    ProjectionResult res = project_policy(mdp, domain, 5.0, decoy_seeking_target(0.9), cfg);
    CHECK(std::abs(res.attacker_policy.prob(0, 0) - 0.9) <= 0.05);
    CHECK(res.strategy.budget_used() < 5.0);
}

TEST_CASE("projection on the graph fixture respects the budget with slack") {
    Instance inst = fig1_analog();
    StochasticPolicy lure =
        make_initial_policy(inst.mdp, inst.domain.decoys, InitPolicyKind::DefenderIdeal, 0);
    ProjectionConfig cfg;
    ProjectionResult res = project_policy(inst.mdp, inst.domain, inst.budget, lure, cfg);
    const double used = res.strategy.budget_used();
    CHECK(used <= inst.budget);
    CHECK(used < inst.budget - 1e-6); // barrier keeps allocations strictly interior
    for (double v : res.strategy.y) CHECK(v >= kYMin);
    for (double v : res.strategy.x) {
        CHECK(v <= 0.0);
        CHECK(v >= cfg.x_min);
    }
}

TEST_CASE("objective trace is non-decreasing under backtracking") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    ProjectionResult res = project_policy(mdp, domain, 5.0, decoy_seeking_target(0.8), cfg);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
        CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-9);

    Instance fig1 = fig1_analog();
    StochasticPolicy lure =
        make_initial_policy(fig1.mdp, fig1.domain.decoys, InitPolicyKind::DefenderIdeal, 0);
    ProjectionResult on_graph = project_policy(fig1.mdp, fig1.domain, fig1.budget, lure, cfg);
    for (std::size_t i = 1; i < on_graph.objective_trace.size(); ++i)
        CHECK(on_graph.objective_trace[i] >= on_graph.objective_trace[i - 1] - 1e-9);
}

TEST_CASE("projection is deterministic") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    ProjectionResult a = project_policy(mdp, domain, 5.0, decoy_seeking_target(0.85), cfg);
    ProjectionResult b = project_policy(mdp, domain, 5.0, decoy_seeking_target(0.85), cfg);
    CHECK(a.strategy.y == b.strategy.y);
    CHECK(a.strategy.x == b.strategy.x);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("projection rejects a floor-tight budget") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    CHECK_THROWS_AS(project_policy(mdp, domain, cfg.y_min, decoy_seeking_target(0.9), cfg),
                    InfeasibleBudgetError);
}

TEST_CASE("kl_report vanishes when the projection already matches") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    std::vector<double> x = {-0.1}, y = {1.1};
    DefenseStrategy strategy = make_strategy(mdp, domain, x, y, 5.0);
    StochasticPolicy target = soft_response(mdp, domain, strategy, 0.05);
    CHECK(kl_report(mdp, strategy, target) <= 1e-10);
}

TEST_CASE("kl_report is infinite when the attacker cannot follow the target") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    std::vector<double> x = {0.0}, y = {2.0};
    DefenseStrategy strategy = make_strategy(mdp, domain, x, y, 5.0);
    // At temperature 1e-4 the soft response underflows to a deterministic
    // decoy run, so a target insisting on the other branch leaves its support.
    StochasticPolicy to_target = decoy_seeking_target(0.0);
    CHECK(std::isinf(kl_report(mdp, strategy, to_target, 50, 1e-4)));
}

TEST_CASE("kl_report does not grow across a projection") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    StochasticPolicy target = decoy_seeking_target(0.9);

    std::vector<double> x0 = {0.0}, y0 = {std::max(kYMin, 0.5 * 5.0)};
    DefenseStrategy start = make_strategy(mdp, domain, x0, y0, 5.0);
    ProjectionResult res = project_policy(mdp, domain, 5.0, target, cfg);
    const double before = kl_report(mdp, start, target, kDefaultKlHorizon, cfg.temperature);
    const double after = kl_report(mdp, res.strategy, target, kDefaultKlHorizon, cfg.temperature);
    CHECK(after <= before + 1e-9);
}

TEST_CASE("projection trace lines are well formed") {
    Mdp mdp = branch_mdp();
    DefenseDomain domain = branch_domain();
    ProjectionConfig cfg;
    cfg.max_iterations = 5;
    ProjectionResult res = project_policy(mdp, domain, 5.0, decoy_seeking_target(0.9), cfg);
    std::string text = write_projection_trace(res);
    CHECK(text.find("iter,objective,grad_norm,budget_used\n") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(res.trace.size()) + 1);
}
