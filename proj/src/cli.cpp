#include "decoy/cli.hpp"

#include "decoy/numeric.hpp"
#include "decoy/oracle.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace decoy {
namespace cli {

namespace {

bool verbose() {
    const char* env = std::getenv("DECOY_SYNTH_LOG");
    return env && *env && std::string(env) != "0";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct ManifestWriter {
    nlohmann::json doc;
    std::vector<std::string> outputs;

    ManifestWriter(const std::string& command, const nlohmann::json& options) {
        doc["command"] = command;
        doc["options"] = options;
    }

    void emit(const std::string& path, const std::string& bytes) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << bytes;
        doc["outputs"].push_back({{"path", path}, {"fnv1a64", fnv1a_hex(bytes)}});
        outputs.push_back(path);
    }

    void finish(double wall_seconds) {
        if (outputs.empty()) return;
        doc["wall_seconds"] = wall_seconds;
        std::ofstream out(outputs.front() + ".manifest.json");
        out << doc.dump(2) << "\n";
    }
};

Instance load_instance(const std::string& path, const std::optional<double>& budget,
                       const std::optional<double>& gamma) {
    Instance inst = parse_instance(read_file(path));
    if (budget) inst.budget = *budget;
    if (gamma) inst.mdp.discount = *gamma;
    ValidationReport report = validate(inst.mdp);
    if (!report.ok()) {
        std::string what = "invalid instance " + path;
        for (const auto& v : report.violations) what += "\n  " + v;
        throw std::invalid_argument(what);
    }
    return inst;
}

void print_scenario(std::ostream& out, const ScenarioReport& report) {
    out << "attacker_reach_F: " << format_sig6(report.attacker_reach_targets) << "\n";
    out << "defender_value: " << format_sig6(report.defender_value) << "\n";
    out << "attacker_value: " << format_sig6(report.attacker_value) << "\n";
    out << "budget_used: " << format_sig6(report.budget_used) << "\n";
}

GridCell parse_cell_arg(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("malformed cell " + text + " (expected r,c)");
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

int action_index_arg(const std::string& name) {
    const std::string names[4] = {"N", "S", "E", "W"};
    for (int a = 0; a < 4; ++a)
        if (names[a] == name) return a;
    throw std::invalid_argument("unknown action " + name);
}

} // namespace

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Instance inst = load_instance(options.instance_path, options.budget, options.gamma);
        out << "instance: " << options.instance_path << "\n";
        out << "mode: " << options.mode << "\n";
        out << "states: " << inst.mdp.num_states() << "\n";

        if (options.mode == "no-decoy") {
            ScenarioReport report = evaluate_scenario(inst.mdp, inst.domain, inst.budget, nullptr);
            print_scenario(out, report);
            return kExitOk;
        }
        if (options.mode != "decoy" && options.mode != "decoy-action")
            throw std::invalid_argument("unknown mode " + options.mode);

        DefenseDomain domain = inst.domain;
        if (options.mode == "decoy") domain.modifiable.clear();

        SynthesisConfig config;
        config.improvement_temperature = options.tau;
        config.epsilon = options.epsilon;
        config.max_outer_iterations = options.max_iters;
        config.restarts = options.restarts;
        config.seed = options.seed;
        config.projection.temperature = options.tau2;
        config.projection.barrier_weight = options.barrier_t;

        SynthesisResult result = synthesize(inst.mdp, domain, inst.budget, config);
        ScenarioReport hard = evaluate_scenario(inst.mdp, domain, inst.budget, &result.strategy);

        out << "defender_value: " << format_sig6(result.defender_value) << "\n";
        out << "attacker_reach_F: " << format_sig6(result.attacker_reach_targets) << "\n";
        out << "attacker_value: " << format_sig6(result.attacker_value) << "\n";
        out << "budget_used: " << format_sig6(result.strategy.budget_used()) << "\n";
        out << "upper_bound: " << format_sig6(result.upper_bound) << "\n";
        out << "hard_br_defender_value: " << format_sig6(hard.defender_value) << "\n";
        out << "hard_br_reach_F: " << format_sig6(hard.attacker_reach_targets) << "\n";
        out << "best_restart: " << result.best_restart << "\n";
        out << "restart_values:";
        for (const auto& rec : result.restarts)
            out << " " << format_sig6(rec.defender_value);
        out << "\n";
        out << "restart_iterations:";
        for (const auto& rec : result.restarts)
            out << " " << (rec.trace.empty() ? 0 : rec.trace.back().iter);
        out << "\n";
        out << "converged:";
        for (const auto& rec : result.restarts) out << " " << (rec.converged ? "yes" : "no");
        out << "\n";
        out << "wall_seconds: " << format_sig6(result.wall_seconds) << "\n";
        if (verbose())
            for (const auto& rec : result.restarts)
                err << "restart " << rec.index << ": " << rec.trace.size()
                    << " outer iterations, defender value "
                    << format_sig6(rec.defender_value) << "\n";

        nlohmann::json opts{{"mode", options.mode},         {"seed", options.seed},
                            {"restarts", options.restarts}, {"tau", options.tau},
                            {"tau2", options.tau2},         {"barrier_t", options.barrier_t},
                            {"epsilon", options.epsilon},   {"budget", inst.budget},
                            {"gamma", inst.mdp.discount},   {"max_iters", options.max_iters},
                            {"instance", options.instance_path}};
        ManifestWriter manifest("solve", opts);
        std::string out_path = options.out_path;
        if (out_path.empty()) out_path = options.instance_path + "." + options.mode + ".strategy";
        manifest.emit(out_path, write_strategy(inst.mdp, result.strategy));
        if (!options.trace_prefix.empty())
            for (const auto& rec : result.restarts)
                manifest.emit(options.trace_prefix + ".restart" + std::to_string(rec.index) +
                                  ".csv",
                              write_outer_trace(rec));
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest.finish(wall);
        return kExitOk;
    } catch (const InfeasibleBudgetError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
    try {
        Instance inst = load_instance(options.instance_path, std::nullopt, std::nullopt);
        DefenseStrategy strategy =
            parse_strategy(inst.mdp, inst.domain, read_file(options.strategy_path));
        if (strategy.budget_used() > inst.budget + 1e-9)
            throw std::invalid_argument("strategy spends " +
                                        format_sig6(strategy.budget_used()) +
                                        " but the instance budget is " +
                                        format_sig6(inst.budget));
        ScenarioReport report = evaluate_scenario(inst.mdp, inst.domain, inst.budget, &strategy);
        out << "instance: " << options.instance_path << "\n";
        out << "strategy: " << options.strategy_path << "\n";
        print_scenario(out, report);
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    try {
        std::string text;
        Instance inst;
        if (options.kind == "gridworld") {
            GridSpec spec;
            if (options.canonical) {
                spec = canonical_grid_spec(options.rows);
            } else {
                spec.rows = options.rows;
                spec.cols = options.cols;
                spec.alpha = options.alpha;
                spec.discount = options.gamma;
                spec.budget = options.budget;
                if (options.init_cell.empty())
                    throw std::invalid_argument("gridworld generation needs --init");
                spec.init = parse_cell_arg(options.init_cell);
                for (const auto& t : options.targets) {
                    auto eq = t.find('=');
                    if (eq == std::string::npos)
                        throw std::invalid_argument("target " + t + " needs r,c=reward");
                    spec.targets.push_back(
                        {parse_cell_arg(t.substr(0, eq)), std::stod(t.substr(eq + 1))});
                }
                for (const auto& s : options.sensors) spec.sensors.push_back(parse_cell_arg(s));
                for (const auto& d : options.decoys) spec.decoys.push_back(parse_cell_arg(d));
                for (const auto& w : options.modifiable) {
                    auto colon = w.find(':');
                    if (colon == std::string::npos)
                        throw std::invalid_argument("modifiable " + w + " needs r,c:ACTION");
                    spec.modifiable.push_back({parse_cell_arg(w.substr(0, colon)),
                                               action_index_arg(w.substr(colon + 1))});
                }
            }
            inst = build_grid_instance(spec);
            text = serialize_grid(spec);
        } else if (options.kind == "random") {
            inst = random_attack_graph(options.states, options.actions, options.branching,
                                       options.seed, options.decoy_count, options.target_count);
            text = serialize_instance(inst);
        } else {
            throw std::invalid_argument("unknown kind " + options.kind);
        }

        ValidationReport report = validate(inst.mdp);
        if (!report.ok())
            throw std::invalid_argument("generated instance failed validation: " +
                                        report.violations.front());

        nlohmann::json opts{{"kind", options.kind}, {"seed", options.seed}};
        ManifestWriter manifest("generate", opts);
        std::string path = options.out_path.empty() ? "instance.pag" : options.out_path;
        manifest.emit(path, text);
        manifest.finish(0.0);
        out << "wrote: " << path << "\n";
        out << "states: " << inst.mdp.num_states() << "\n";
        out << "targets: " << inst.mdp.targets.size() << "\n";
        out << "decoys: " << inst.domain.decoys.size() << "\n";
        out << "modifiable: " << inst.domain.modifiable.size() << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    try {
        std::ostringstream csv;
        csv << "size,states,decoys,seconds,defender_value\n";
        for (int size : options.sizes) {
            Instance inst = build_grid_instance(canonical_grid_spec(size));
            DefenseDomain domain = inst.domain;
            domain.modifiable.clear(); // decoy allocation only, sizes stay comparable
            SynthesisConfig config;
            config.seed = options.seed;
            SynthesisResult result = synthesize(inst.mdp, domain, inst.budget, config);
            csv << size << "," << inst.mdp.num_states() << "," << domain.decoys.size() << ","
                << format_sig6(result.wall_seconds) << ","
                << format_sig6(result.defender_value) << "\n";
            if (verbose()) err << "bench " << size << "x" << size << " done\n";
        }
        out << csv.str();
        if (!options.out_path.empty()) {
            ManifestWriter manifest("bench", {{"seed", options.seed}});
            manifest.emit(options.out_path, csv.str());
            manifest.finish(0.0);
        }
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

} // namespace cli
} // namespace decoy
