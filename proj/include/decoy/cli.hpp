#pragma once

#include "decoy/environments.hpp"
#include "decoy/synthesis.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace decoy {
namespace cli {

/// Exit codes are a stable contract: 0 success, 2 input error, 3 infeasible.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInfeasible = 3;

struct SolveOptions {
    std::string instance_path;
    std::string mode = "decoy"; // no-decoy | decoy | decoy-action
    std::optional<double> budget;
    std::optional<double> gamma;
    double tau = 0.1;
    double tau2 = 0.05;
    double barrier_t = 1000.0;
    double epsilon = 1e-4;
    int restarts = 3;
    std::uint64_t seed = 0;
    int max_iters = 200;
    std::string out_path; // strategy file; derived from the instance when empty
    std::string trace_prefix; // per-restart trace files when set
};

struct EvaluateOptions {
    std::string instance_path;
    std::string strategy_path;
};

struct GenerateOptions {
    std::string kind = "gridworld"; // gridworld | random
    std::string out_path;
    // gridworld parameters
    int rows = 6;
    int cols = 6;
    double alpha = 0.1;
    double gamma = 0.95;
    double budget = 4.0;
    std::string init_cell;
    std::vector<std::string> targets; // "r,c=reward"
    std::vector<std::string> sensors; // "r,c"
    std::vector<std::string> decoys; // "r,c"
    std::vector<std::string> modifiable; // "r,c:ACTION"
    bool canonical = false; // built-in layout for the given size
    // random-graph parameters
    int states = 20;
    int actions = 3;
    int branching = 3;
    int decoy_count = 2;
    int target_count = 1;
    std::uint64_t seed = 0;
};

struct BenchOptions {
    std::vector<int> sizes = {6, 10};
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

} // namespace cli
} // namespace decoy
