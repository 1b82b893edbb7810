#pragma once

#include "decoy/mdp.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace decoy {

/// Floor implementing the strict positivity of decoy rewards.
inline constexpr double kYMin = 1e-6;

/// Domain descriptor for a defense problem: decoy candidate states D and
/// modifiable state-action pairs W.
struct DefenseDomain {
    std::vector<int> decoys; // sorted ascending
    std::vector<std::pair<int, int>> modifiable; // sorted (state, action) pairs

    bool is_decoy(int s) const;
    int decoy_slot(int s) const; // -1 when absent
    int modifiable_slot(int s, int a) const; // -1 when absent
};

/// Defense strategy (x, y): nonpositive action-reward modifications on W and
/// positive decoy rewards on D, with 1'y bounded by `budget`.
struct DefenseStrategy {
    DefenseDomain domain;
    std::vector<double> x; // aligned with domain.modifiable, entries <= 0
    std::vector<double> y; // aligned with domain.decoys, entries >= y_floor
    double budget = 0.0;
    double y_floor = kYMin;

    double x_value(int s, int a) const;
    double y_value(int s) const;
    double budget_used() const;

    /// Strategy with no decoy allocation and no modifications over `domain`.
    /// Used by the no-resource scenario; y sits at zero, off the usual floor.
    static DefenseStrategy zero(DefenseDomain domain, double budget);
};

/// Validates domains and bounds; throws std::invalid_argument on violations
/// (W overlapping targets or decoys, negative y, positive x, budget overflow).
DefenseStrategy make_strategy(const Mdp& base, DefenseDomain domain, std::vector<double> x,
                              std::vector<double> y, double budget, double y_floor = kYMin);

/// The attack planning problem as the attacker perceives it: decoys terminate
/// (routed to the sink) and rewards are overridden by the strategy.
struct PerceptualMdp {
    Mdp model; // targets = F union D, reward2 = perceived rewards
    DefenseDomain domain;
    DefenseStrategy strategy;
};

/// Reward the attacker perceives at (s, a) under the strategy: y(s) on decoy
/// states, x(s, a) on modified pairs, the base target reward elsewhere.
double perceived_reward(const Mdp& base, const DefenseStrategy& strategy, int s, int a);

/// Dense perceived-reward map over all state-action pairs.
std::vector<double> perceived_reward_map(const Mdp& base, const DefenseStrategy& strategy);

/// Applies the perceptual transformation. Requires a clean validate(base).
PerceptualMdp build_perceptual(const Mdp& base, const DefenseStrategy& strategy);

/// Transition structure of the perceptual problem only (decoys terminating,
/// targets = F union D); rewards are the base map with zeros on D. This is
/// both the no-allocation scenario model and the fixed dynamics used by the
/// projection, whose reward map is swapped per iterate.
Mdp perceptual_dynamics(const Mdp& base, std::span<const int> decoys);

/// Defender reward: 1 on decoy states, 0 elsewhere.
double defender_reward(std::span<const int> decoys, int s);

/// Probability that the attacker's policy enters a decoy before a true
/// target, evaluated on the perceptual chain with F union D frozen.
double defender_value(const Mdp& base, const DefenseStrategy& strategy,
                      const StochasticPolicy& policy);

/// Attacker's perceived discounted value at the initial distribution.
double attacker_value(const Mdp& base, const DefenseStrategy& strategy,
                      const StochasticPolicy& policy);

/// Copy of the chain with every state in `frozen` replaced by a self-loop.
/// Turns terminate-on-entry states into proper absorbing states so hitting
/// probabilities can be read off them.
MarkovChain freeze_states(const MarkovChain& chain, std::span<const int> frozen);

/// Line-oriented strategy file: `BUDGET h`, `Y state value`, `X state action
/// value`, shortest round-trip decimals.
std::string write_strategy(const Mdp& base, const DefenseStrategy& strategy);
DefenseStrategy parse_strategy(const Mdp& base, const DefenseDomain& domain,
                               const std::string& text);

} // namespace decoy
