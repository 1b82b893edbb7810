#include "decoy/irl.hpp"

#include "decoy/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace decoy {

namespace {

/// Improvement below which an accepted ascent step counts as stalled; three
/// stalled steps in a row end the run. With a fixed base step the projected
/// gradient can hover just above the tolerance for thousands of iterations
/// while the objective no longer moves at double precision.
constexpr double kStallImprovement = 1e-11;
constexpr int kStallRuns = 3;

/// Shared state for repeated objective/gradient evaluations at different
/// (x, y): fixed perceptual dynamics, a reusable reward buffer and the last
/// soft value function as a warm start for the next solve.
struct Workspace {
    Mdp dynamics; // decoys terminating, targets = F union D
    const DefenseDomain& domain;
    double budget;
    const ProjectionConfig& config;
    std::vector<double> reward;
    ValueVector warm_values;

    Workspace(const Mdp& base, const DefenseDomain& dom, double h, const ProjectionConfig& cfg)
        : dynamics(perceptual_dynamics(base, dom.decoys)),
          domain(dom),
          budget(h),
          config(cfg),
          reward(dynamics.reward2) {}

    void load_rewards(std::span<const double> x, std::span<const double> y) {
        // Perceived rewards: y on decoy states (all actions), x on modifiable
        // pairs; base target rewards are already in place, zero elsewhere.
        const int m = dynamics.num_actions();
        for (std::size_t i = 0; i < domain.decoys.size(); ++i)
            for (int a = 0; a < m; ++a) reward[dynamics.sa_index(domain.decoys[i], a)] = y[i];
        for (std::size_t i = 0; i < domain.modifiable.size(); ++i) {
            auto [s, a] = domain.modifiable[i];
            reward[dynamics.sa_index(s, a)] = std::min(x[i], 0.0);
        }
    }

    SoftSolution solve(std::span<const double> x, std::span<const double> y) {
        load_rewards(x, y);
        SoftSolution sol =
            soft_value_iteration(dynamics, reward, dynamics.discount, config.temperature,
                                 warm_values.empty() ? nullptr : &warm_values);
        warm_values = sol.values;
        return sol;
    }

    double slack(std::span<const double> y) const {
        double used = 0.0;
        for (double v : y) used += v;
        return budget - used;
    }

    double objective(std::span<const double> x, std::span<const double> y,
                     const OccupancyMeasure& target_occ) {
        const double gap = slack(y);
        if (gap <= 0.0)
            throw std::invalid_argument("allocation is outside the barrier domain (1'y >= h)");
        SoftSolution sol = solve(x, y);
        double likelihood = 0.0;
        for (std::size_t i = 0; i < target_occ.state_action_occ.size(); ++i) {
            const double w = target_occ.state_action_occ[i];
            if (w > 0.0) likelihood += w * sol.log_probs[i];
        }
        return config.temperature * likelihood + std::log(gap) / config.barrier_weight;
    }

    std::pair<std::vector<double>, std::vector<double>>
    gradient(std::span<const double> x, std::span<const double> y,
             const OccupancyMeasure& target_occ) {
        const double gap = slack(y);
        if (gap <= 0.0)
            throw std::invalid_argument("allocation is outside the barrier domain (1'y >= h)");
        SoftSolution sol = solve(x, y);
        OccupancyMeasure occ =
            occupancy(induce_chain(dynamics, sol.policy), sol.policy, dynamics.discount);

        const double barrier_pull = 1.0 / (config.barrier_weight * gap);
        std::vector<double> grad_y(domain.decoys.size());
        for (std::size_t i = 0; i < domain.decoys.size(); ++i) {
            const int d = domain.decoys[i];
            grad_y[i] = target_occ.state_occ[d] - occ.state_occ[d] - barrier_pull;
        }
        std::vector<double> grad_x(domain.modifiable.size());
        for (std::size_t i = 0; i < domain.modifiable.size(); ++i) {
            auto [s, a] = domain.modifiable[i];
            const int idx = dynamics.sa_index(s, a);
            grad_x[i] = target_occ.state_action_occ[idx] - occ.state_action_occ[idx];
        }
        return {std::move(grad_x), std::move(grad_y)};
    }
};

void check_shapes(const DefenseDomain& domain, std::span<const double> x,
                  std::span<const double> y) {
    if (x.size() != domain.modifiable.size() || y.size() != domain.decoys.size())
        throw std::invalid_argument("strategy vectors do not match the domain");
}

} // namespace

OccupancyMeasure target_occupancy(const Mdp& base, const DefenseDomain& domain,
                                  const StochasticPolicy& target, double discount) {
    Mdp dynamics = perceptual_dynamics(base, domain.decoys);
    return occupancy(induce_chain(dynamics, target), target, discount);
}

double irl_objective(const Mdp& base, const DefenseDomain& domain, double budget,
                     std::span<const double> x, std::span<const double> y,
                     const OccupancyMeasure& target_occ, const ProjectionConfig& config) {
    check_shapes(domain, x, y);
    Workspace ws(base, domain, budget, config);
    return ws.objective(x, y, target_occ);
}

std::pair<std::vector<double>, std::vector<double>>
irl_gradient(const Mdp& base, const DefenseDomain& domain, double budget,
             std::span<const double> x, std::span<const double> y,
             const OccupancyMeasure& target_occ, const ProjectionConfig& config) {
    check_shapes(domain, x, y);
    Workspace ws(base, domain, budget, config);
    return ws.gradient(x, y, target_occ);
}

ProjectionResult project_policy(const Mdp& base, const DefenseDomain& domain, double budget,
                                const StochasticPolicy& target, const ProjectionConfig& config,
                                const DefenseStrategy* warm_start) {
    const std::size_t nd = domain.decoys.size();
    const std::size_t nw = domain.modifiable.size();
    if (budget <= static_cast<double>(nd) * config.y_min)
        throw InfeasibleBudgetError("budget admits no interior allocation (h <= |D| y_min)");

    std::vector<double> x(nw, 0.0), y(nd, 0.0);
    if (warm_start) {
        check_shapes(domain, warm_start->x, warm_start->y);
        x = warm_start->x;
        y = warm_start->y;
    } else if (nd > 0) {
        std::fill(y.begin(), y.end(), std::max(config.y_min, 0.5 * budget / nd));
    }
    for (auto& v : x) v = std::clamp(v, config.x_min, 0.0);
    for (auto& v : y) v = std::max(v, config.y_min);

    Workspace ws(base, domain, budget, config);
    for (int guard = 0; ws.slack(y) <= 0.0 && guard < 10000; ++guard)
        for (auto& v : y) v = std::max(config.y_min, 0.99 * v);

    OccupancyMeasure target_occ =
        occupancy(induce_chain(ws.dynamics, target), target, ws.dynamics.discount);

    ProjectionResult result;
    result.objective_trace.push_back(ws.objective(x, y, target_occ));

    std::vector<double> nx(nw), ny(nd);
    int stalled = 0;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        auto [gx, gy] = ws.gradient(x, y, target_occ);

        // Projected-gradient norm: clamped step over base step. Coincides
        // with the raw gradient sup-norm at interior points and vanishes on
        // coordinates pinned by the clamps.
        double grad_norm = 0.0;
        for (std::size_t i = 0; i < nw; ++i) {
            const double moved = std::clamp(x[i] + config.step_x * gx[i], config.x_min, 0.0);
            grad_norm = std::max(grad_norm, std::abs(moved - x[i]) / config.step_x);
        }
        for (std::size_t i = 0; i < nd; ++i) {
            const double moved = std::max(y[i] + config.step_y * gy[i], config.y_min);
            grad_norm = std::max(grad_norm, std::abs(moved - y[i]) / config.step_y);
        }
        result.trace.push_back(
            {iter, result.objective_trace.back(), grad_norm, budget - ws.slack(y)});
        if (grad_norm < config.grad_tolerance) {
            result.converged = true;
            result.iterations = iter;
            break;
        }

        double scale = 1.0;
        bool accepted = false;
        const double current = result.objective_trace.back();
        double candidate = current;
        while (scale >= 1e-12) {
            for (std::size_t i = 0; i < nw; ++i)
                nx[i] = std::clamp(x[i] + scale * config.step_x * gx[i], config.x_min, 0.0);
            for (std::size_t i = 0; i < nd; ++i)
                ny[i] = std::max(y[i] + scale * config.step_y * gy[i], config.y_min);
            if (ws.slack(ny) > 0.0) {
                candidate = ws.objective(nx, ny, target_occ);
                if (!config.backtracking || candidate >= current - 1e-12) {
                    x = nx;
                    y = ny;
                    result.objective_trace.push_back(candidate);
                    accepted = true;
                    break;
                }
            }
            if (!config.backtracking) break;
            scale *= 0.5;
        }
        result.iterations = iter + 1;
        if (!accepted) break; // no ascent step remains at double precision

        if (config.backtracking) {
            const double gain = candidate - current;
            stalled = gain < kStallImprovement * (1.0 + std::abs(current)) ? stalled + 1 : 0;
            if (stalled >= kStallRuns) {
                result.converged = true; // stationary at working precision
                break;
            }
        }
    }

    result.strategy = make_strategy(base, domain, x, y, budget, config.y_min);
    SoftSolution final_sol = ws.solve(x, y);
    result.attacker_policy = std::move(final_sol.policy);
    return result;
}

double kl_report(const Mdp& base, const DefenseStrategy& strategy, const StochasticPolicy& target,
                 int horizon, double temperature) {
    PerceptualMdp perceptual = build_perceptual(base, strategy);
    SoftSolution sol = soft_value_iteration(perceptual.model, perceptual.model.reward2,
                                            perceptual.model.discount, temperature);
    MarkovChain target_chain = induce_chain(perceptual.model, target);
    MarkovChain soft_chain = induce_chain(perceptual.model, sol.policy);
    return kl_divergence(target_chain, soft_chain, horizon);
}

std::string write_projection_trace(const ProjectionResult& result) {
    std::ostringstream out;
    out << "iter,objective,grad_norm,budget_used\n";
    for (const auto& row : result.trace)
        out << row.iter << "," << format_double(row.objective) << ","
            << format_double(row.grad_norm) << "," << format_double(row.budget_used) << "\n";
    return out.str();
}

} // namespace decoy
