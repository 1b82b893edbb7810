#include "decoy/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Proactive defense synthesis on probabilistic attack graphs"};
    app.require_subcommand(1);

    decoy::cli::SolveOptions solve;
    auto* solve_cmd = app.add_subcommand(
        "solve", "Evaluate the no-decoy scenario or synthesize a defense strategy");
    solve_cmd->add_option("instance", solve.instance_path, "instance file")->required();
    solve_cmd->add_option("--mode", solve.mode, "no-decoy | decoy | decoy-action");
    solve_cmd->add_option("--budget", solve.budget, "override the instance budget");
    solve_cmd->add_option("--gamma", solve.gamma, "override the discount factor");
    solve_cmd->add_option("--tau", solve.tau, "policy-improvement temperature");
    solve_cmd->add_option("--tau2", solve.tau2, "attacker softness");
    solve_cmd->add_option("--barrier-t", solve.barrier_t, "log-barrier weight");
    solve_cmd->add_option("--epsilon", solve.epsilon, "outer stopping threshold");
    solve_cmd->add_option("--restarts", solve.restarts, "number of restarts");
    solve_cmd->add_option("--seed", solve.seed, "random seed");
    solve_cmd->add_option("--max-iters", solve.max_iters, "outer iteration cap");
    solve_cmd->add_option("--out", solve.out_path, "strategy file path");
    solve_cmd->add_option("--trace", solve.trace_prefix, "per-restart trace file prefix");

    decoy::cli::EvaluateOptions evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a saved strategy on an instance");
    eval_cmd->add_option("instance", evaluate.instance_path, "instance file")->required();
    eval_cmd->add_option("strategy", evaluate.strategy_path, "strategy file")->required();

    decoy::cli::GenerateOptions generate;
    auto* gen_cmd = app.add_subcommand("generate", "Write a gridworld or random instance");
    gen_cmd->add_option("kind", generate.kind, "gridworld | random")->required();
    gen_cmd->add_option("--out", generate.out_path, "output path");
    gen_cmd->add_option("--rows", generate.rows, "grid rows");
    gen_cmd->add_option("--cols", generate.cols, "grid columns");
    gen_cmd->add_option("--alpha", generate.alpha, "slip probability");
    gen_cmd->add_option("--gamma", generate.gamma, "discount factor");
    gen_cmd->add_option("--budget", generate.budget, "decoy budget");
    gen_cmd->add_option("--init", generate.init_cell, "initial cell r,c");
    gen_cmd->add_option("--target", generate.targets, "target cell r,c=reward (repeatable)");
    gen_cmd->add_option("--sensor", generate.sensors, "sensor cell r,c (repeatable)");
    gen_cmd->add_option("--decoy", generate.decoys, "decoy cell r,c (repeatable)");
    gen_cmd->add_option("--modifiable", generate.modifiable, "pair r,c:ACTION (repeatable)");
    gen_cmd->add_flag("--canonical", generate.canonical, "use the built-in layout for --rows");
    gen_cmd->add_option("--states", generate.states, "random graph: state count");
    gen_cmd->add_option("--actions", generate.actions, "random graph: action count");
    gen_cmd->add_option("--branching", generate.branching, "random graph: successors per row");
    gen_cmd->add_option("--decoys", generate.decoy_count, "random graph: decoy count");
    gen_cmd->add_option("--targets", generate.target_count, "random graph: target count");
    gen_cmd->add_option("--seed", generate.seed, "random graph: seed");

    decoy::cli::BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time synthesis across gridworld sizes");
    bench_cmd->add_option("--sizes", bench.sizes, "grid sizes to run");
    bench_cmd->add_option("--seed", bench.seed, "random seed");
    bench_cmd->add_option("--out", bench.out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    if (solve_cmd->parsed()) return decoy::cli::cmd_solve(solve, std::cout, std::cerr);
    if (eval_cmd->parsed()) return decoy::cli::cmd_evaluate(evaluate, std::cout, std::cerr);
    if (gen_cmd->parsed()) return decoy::cli::cmd_generate(generate, std::cout, std::cerr);
    if (bench_cmd->parsed()) return decoy::cli::cmd_bench(bench, std::cout, std::cerr);
    return decoy::cli::kExitInputError;
}
