#pragma once

#include "decoy/mdp.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

namespace decoy {
namespace oracle {

/// Resource limits for the brute-force verifiers.
struct OracleBudget {
    long max_policies = 1000000;
    int rollouts = 100000;
    int horizon = 500;
    std::uint64_t seed = 0;
};

/// Evaluates every deterministic Markov policy with an internal Gaussian
/// solve and returns the best. Shares no solver code with the main library.
std::pair<double, StochasticPolicy> enumerate_best_response(const Mdp& mdp,
                                                            std::span<const double> reward,
                                                            double discount,
                                                            const OracleBudget& budget);

/// Seeded rollout estimate of the discounted value at the initial
/// distribution; returns (mean, standard error).
std::pair<double, double> monte_carlo_value(const Mdp& mdp, const StochasticPolicy& policy,
                                            std::span<const double> reward, double discount,
                                            const OracleBudget& budget);

/// Rollout estimate of the probability that a chain hits `targets`;
/// returns (mean, standard error). Rollouts are truncated at the horizon.
std::pair<double, double> monte_carlo_reach(const MarkovChain& chain, std::span<const int> targets,
                                            const OracleBudget& budget);

/// Worst relative disagreement between `grad` and central finite differences
/// of `objective` at `point`; denominators are floored at 1e-8.
double finite_difference_check(const std::function<double(std::span<const double>)>& objective,
                               std::span<const double> grad, std::span<const double> point,
                               double step);

} // namespace oracle
} // namespace decoy
