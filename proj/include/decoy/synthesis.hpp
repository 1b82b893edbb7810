#pragma once

#include "decoy/irl.hpp"
#include "decoy/mdp.hpp"
#include "decoy/perception.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace decoy {

enum class InitPolicyKind { DefenderIdeal, Random };

/// Outer-loop configuration: softmax improvement temperature, stopping
/// threshold on successive defender values, restart schedule.
struct SynthesisConfig {
    double improvement_temperature = 0.1; // tau
    double epsilon = 1e-4;
    int max_outer_iterations = 200;
    int restarts = 3;
    std::uint64_t seed = 0;
    ProjectionConfig projection;
    bool parallel_restarts = true;

    /// Restart r uses kinds[r % kinds.size()]; the first restart seeds the
    /// loop with the defender-ideal policy, the rest are random.
    std::vector<InitPolicyKind> kinds = {InitPolicyKind::DefenderIdeal, InitPolicyKind::Random};
};

struct OuterTraceRow {
    int iter;
    double defender_value;
    double attacker_value;
    double budget_used;
    double wall_ms; // measured; reported, never written to trace files
};

struct RestartRecord {
    int index = 0;
    InitPolicyKind kind = InitPolicyKind::DefenderIdeal;
    std::vector<OuterTraceRow> trace;
    bool converged = false;
    DefenseStrategy strategy;
    StochasticPolicy policy;
    double defender_value = 0.0;
};

struct SynthesisResult {
    DefenseStrategy strategy;
    StochasticPolicy policy; // converged soft attacker response
    double defender_value = 0.0;
    double attacker_reach_targets = 0.0; // probability the response reaches F
    double attacker_value = 0.0; // perceived discounted value
    double upper_bound = 0.0;
    int best_restart = 0;
    std::vector<RestartRecord> restarts;
    double wall_seconds = 0.0;
};

/// One smoothed greedy step on the defender's Q-values:
/// pi(s,a) proportional to exp((R1(s) + gamma E[V1(s')]) / tau).
StochasticPolicy policy_improvement(const Mdp& perceptual, std::span<const int> decoys,
                                    const ValueVector& v1, double tau);

/// Seed policies for the outer loop. The defender-ideal kind solves the
/// attacker's problem under a surrogate reward of 1 on decoys and 0 on true
/// targets; the random kind draws reproducible row-stochastic rows.
StochasticPolicy make_initial_policy(const Mdp& base, std::span<const int> decoys,
                                     InitPolicyKind kind, std::uint64_t seed);

/// Best decoy-reach probability over all policies in the perceptual
/// dynamics; an upper bound on any achievable defender value.
double defender_upper_bound(const Mdp& base, std::span<const int> decoys);

/// Per-state decoy-reach probabilities of a policy in the perceptual chain
/// with F union D frozen; the defender's state values for improvement.
ValueVector defender_state_values(const Mdp& perceptual_dynamics, std::span<const int> decoys,
                                  const StochasticPolicy& policy);

/// Alternates IRL projection with softmax policy improvement per restart,
/// stops on |V1(k+1) - V1(k)| <= epsilon and keeps the best restart.
SynthesisResult synthesize(const Mdp& base, const DefenseDomain& domain, double budget,
                           const SynthesisConfig& config);

/// Metrics of the attacker's hard best response under a given strategy, or
/// under the no-resource transform (decoys terminate with zero reward) when
/// `strategy` is null.
struct ScenarioReport {
    double attacker_reach_targets = 0.0;
    double defender_value = 0.0;
    double attacker_value = 0.0;
    double budget_used = 0.0;
    StochasticPolicy attacker_policy;
};

ScenarioReport evaluate_scenario(const Mdp& base, const DefenseDomain& domain, double budget,
                                 const DefenseStrategy* strategy);

/// `iter,defender_value,attacker_value,budget_used` lines for one restart.
/// Wall time stays out of trace files so identical runs are byte-identical.
std::string write_outer_trace(const RestartRecord& record);

} // namespace decoy
