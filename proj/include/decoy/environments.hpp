#pragma once

#include "decoy/mdp.hpp"
#include "decoy/perception.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace decoy {

struct GridCell {
    int row = 0;
    int col = 0;
    bool operator==(const GridCell&) const = default;
    auto operator<=>(const GridCell&) const = default;
};

/// Gridworld layout with compass actions and slip dynamics: the intended
/// cell is entered with probability 1 - 2*alpha, the two lateral neighbours
/// with alpha each; off-grid mass folds back into the current cell.
struct GridSpec {
    int rows = 0;
    int cols = 0;
    double alpha = 0.1;
    GridCell init;
    std::vector<GridCell> sensors;
    std::vector<std::pair<GridCell, double>> targets;
    std::vector<GridCell> decoys;
    std::vector<std::pair<GridCell, int>> modifiable; // (cell, action index)
    double budget = 0.0;
    double discount = 0.95;
};

/// A complete problem instance: model plus defense domain and budget.
struct Instance {
    Mdp mdp;
    DefenseDomain domain;
    double budget = 0.0;
};

/// Builds the gridworld MDP. Throws std::invalid_argument on malformed specs,
/// naming the offending cell. Sensors and targets route to the sink.
Mdp build_gridworld(const GridSpec& spec);

/// build_gridworld plus the defense domain read off the spec.
Instance build_grid_instance(const GridSpec& spec);

/// Parses the line-oriented instance grammar (explicit records or GRID
/// shorthand). Errors carry line numbers.
Instance parse_instance(const std::string& text);

/// Canonical explicit-record serialization; parse(serialize(parse(t))) is the
/// identity, and explicit-form fixtures round-trip bit-exactly.
std::string serialize_instance(const Instance& instance);

/// GRID-shorthand serialization of a gridworld spec.
std::string serialize_grid(const GridSpec& spec);

/// 14-state analog of a published probabilistic attack graph: one transition
/// row is reproduced exactly, the remaining rows follow a documented
/// preferred-successor convention. F = {10}, D = {11, 13}, budget 3.
Instance fig1_analog();

/// Chain instance whose only path from the initial state to the target runs
/// through the single decoy candidate.
Instance only_path_instance();

/// Seeded random attack-graph generator; `n_states` counts the sink.
/// Guarantees init-to-target reachability and a validated model.
Instance random_attack_graph(int n_states, int n_actions, int branching, std::uint64_t seed,
                             int decoy_count, int target_count);

/// Built-in gridworld layouts used by the experiment fixtures and the
/// benchmark: size 6 and 10 follow the published scenario shapes, other
/// sizes scale the same pattern.
GridSpec canonical_grid_spec(int size);

/// Alternate 6x6 decoy placement (second published configuration).
GridSpec grid6_alt_spec();

} // namespace decoy
