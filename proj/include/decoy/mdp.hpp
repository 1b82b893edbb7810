#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace decoy {

/// Absolute tolerance for probability checks (row sums, distribution entries).
inline constexpr double kProbTol = 1e-9;

/// Residual target for the linear and fixed-point solvers.
inline constexpr double kSolveTol = 1e-10;

/// Above this state count, linear systems fall back to damped iteration
/// instead of a dense LU factorization.
inline constexpr int kDenseSolveLimit = 2000;

/// Horizon used when a truncated path-space KL divergence is reported.
inline constexpr int kDefaultKlHorizon = 200;

using ValueVector = std::vector<double>;

struct ProbEntry {
    int state;
    double prob;
};

/// Sparse probability distribution over successor states.
using ProbRow = std::vector<ProbEntry>;

/// Finite discounted MDP over an attack graph. States in `targets` pay the
/// attacker reward `reward2` and must route to the absorbing `sink` under
/// every action; `reward2` is zero off the target set.
struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<ProbRow> trans; // indexed s * num_actions() + a
    std::vector<double> init;
    double discount = 0.95;
    std::vector<int> targets; // sorted ascending
    std::vector<double> reward2; // indexed s * num_actions() + a
    int sink = -1;

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_actions() const { return static_cast<int>(action_names.size()); }

    int sa_index(int s, int a) const { return s * num_actions() + a; }
    const ProbRow& row(int s, int a) const { return trans[sa_index(s, a)]; }
    ProbRow& row(int s, int a) { return trans[sa_index(s, a)]; }

    bool is_target(int s) const;
    int state_index(const std::string& name) const; // -1 when absent
    int action_index(const std::string& name) const;
};

/// Row-stochastic state -> action distribution map.
struct StochasticPolicy {
    int num_actions = 0;
    std::vector<double> probs; // indexed s * num_actions + a

    int num_states() const {
        return num_actions == 0 ? 0 : static_cast<int>(probs.size()) / num_actions;
    }
    double prob(int s, int a) const { return probs[s * num_actions + a]; }
    double& prob(int s, int a) { return probs[s * num_actions + a]; }

    static StochasticPolicy uniform(int n_states, int n_actions);
    static StochasticPolicy deterministic(std::span<const int> actions, int n_actions);
};

/// Markov chain induced by a policy on an MDP.
struct MarkovChain {
    std::vector<ProbRow> rows;
    std::vector<double> init;

    int num_states() const { return static_cast<int>(rows.size()); }
};

/// Discounted visitation frequencies of a policy-induced chain.
struct OccupancyMeasure {
    std::vector<double> state_occ;
    std::vector<double> state_action_occ; // indexed s * num_actions + a
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

struct SoftSolution {
    ValueVector values;
    StochasticPolicy policy;
    std::vector<double> log_probs; // log policy(s, a), computed without underflow
};

/// Checks row sums, sink absorption, target termination and reward support.
/// Never throws; an empty report means the model is well formed.
ValidationReport validate(const Mdp& mdp);

/// Mixes transition rows by the policy: kernel(s) = sum_a pi(s,a) P(.|s,a).
MarkovChain induce_chain(const Mdp& mdp, const StochasticPolicy& policy);

/// Fixed point of V = r_pi + gamma P_pi V, solved to residual kSolveTol.
ValueVector policy_evaluation(const Mdp& mdp, std::span<const double> reward,
                              const StochasticPolicy& policy, double discount);

/// Hard value iteration; greedy policy breaks ties by lowest action index.
std::pair<ValueVector, StochasticPolicy>
optimal_value(const Mdp& mdp, std::span<const double> reward, double discount);

/// Entropy-regularized value iteration: V(s) = tau log sum_a exp(Q(s,a)/tau),
/// evaluated with the max-shift trick. `warm_start` seeds the iteration and
/// does not change the fixed point.
SoftSolution soft_value_iteration(const Mdp& mdp, std::span<const double> reward,
                                  double discount, double temperature,
                                  const ValueVector* warm_start = nullptr);

/// Discounted state visitation: rho = nu + gamma P^T rho.
OccupancyMeasure occupancy(const MarkovChain& chain, const StochasticPolicy& policy,
                           double discount);

/// Undiscounted hitting probabilities of `absorbing_set` from every state.
/// States in the set must be absorbing in the chain.
ValueVector reach_probabilities(const MarkovChain& chain, std::span<const int> absorbing_set);

/// Hitting probability weighted by the chain's initial distribution.
double reach_probability(const MarkovChain& chain, std::span<const int> absorbing_set);

/// KL divergence between length-`horizon` path distributions of two chains
/// over the same state set. +infinity when absolute continuity fails on a
/// reachable state.
double kl_divergence(const MarkovChain& chain_p, const MarkovChain& chain_q, int horizon);

} // namespace decoy
