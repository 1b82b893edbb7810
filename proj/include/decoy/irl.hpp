#pragma once

#include "decoy/mdp.hpp"
#include "decoy/perception.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace decoy {

/// Budget too small to admit a strictly interior decoy allocation.
struct InfeasibleBudgetError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Knobs of the projection step (occupancy-matching gradient ascent with a
/// log-barrier on the decoy budget).
struct ProjectionConfig {
    double barrier_weight = 1000.0; // t
    double step_x = 0.05;
    double step_y = 0.05;
    bool backtracking = true;
    double temperature = 0.05; // attacker softness tau_2
    double grad_tolerance = 1e-5;
    int max_iterations = 2000;
    double y_min = kYMin;
    double x_min = -10.0;
};

struct ProjectionTraceRow {
    int iter;
    double objective;
    double grad_norm;
    double budget_used;
};

struct ProjectionResult {
    DefenseStrategy strategy;
    StochasticPolicy attacker_policy;
    std::vector<double> objective_trace;
    std::vector<ProjectionTraceRow> trace;
    bool converged = false;
    int iterations = 0;
};

/// Barriered projection objective: the soft attacker's log-likelihood of the
/// target occupancy, scaled by the attacker temperature so the occupancy
/// difference below is its exact gradient, plus (1/t) log(h - 1'y).
/// Requires a strictly interior allocation (1'y < h).
double irl_objective(const Mdp& base, const DefenseDomain& domain, double budget,
                     std::span<const double> x, std::span<const double> y,
                     const OccupancyMeasure& target_occ, const ProjectionConfig& config);

/// Occupancy-matching ascent direction:
///   grad_y(s)    = target_occ(s)    - occ(s)    - (1/t) / (h - 1'y)
///   grad_x(s, a) = target_occ(s, a) - occ(s, a)
/// where occ is the discounted occupancy of the soft-optimal attacker under
/// the current perceived rewards.
std::pair<std::vector<double>, std::vector<double>>
irl_gradient(const Mdp& base, const DefenseDomain& domain, double budget,
             std::span<const double> x, std::span<const double> y,
             const OccupancyMeasure& target_occ, const ProjectionConfig& config);

/// Discounted occupancy of a policy on the perceptual dynamics; the target
/// policy is measured on the same dynamics it is projected onto.
OccupancyMeasure target_occupancy(const Mdp& base, const DefenseDomain& domain,
                                  const StochasticPolicy& target, double discount);

/// Projected gradient ascent over (x, y): clamped steps, barrier-domain
/// backtracking that also keeps the objective non-decreasing, termination on
/// the projected-gradient sup-norm. Deterministic given inputs and config.
ProjectionResult project_policy(const Mdp& base, const DefenseDomain& domain, double budget,
                                const StochasticPolicy& target, const ProjectionConfig& config,
                                const DefenseStrategy* warm_start = nullptr);

/// Truncated path-space KL divergence from the target-induced chain to the
/// chain induced by the strategy's soft-optimal attacker. Diagnostic only.
double kl_report(const Mdp& base, const DefenseStrategy& strategy, const StochasticPolicy& target,
                 int horizon = kDefaultKlHorizon, double temperature = 0.05);

/// `iter,objective,grad_norm,budget_used` lines for a projection run.
std::string write_projection_trace(const ProjectionResult& result);

} // namespace decoy
