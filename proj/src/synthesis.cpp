#include "decoy/synthesis.hpp"

#include "decoy/numeric.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace decoy {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double init_weighted(const Mdp& mdp, const ValueVector& v) {
    double out = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) out += mdp.init[s] * v[s];
    return out;
}

/// Reach probability of `targets` for the policy chain with F union D frozen.
double frozen_reach(const Mdp& dynamics, const StochasticPolicy& policy,
                    std::span<const int> targets) {
    MarkovChain chain = freeze_states(induce_chain(dynamics, policy), dynamics.targets);
    return reach_probability(chain, targets);
}

} // namespace

StochasticPolicy policy_improvement(const Mdp& perceptual, std::span<const int> decoys,
                                    const ValueVector& v1, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("improvement temperature must be positive");
    if (static_cast<int>(v1.size()) != perceptual.num_states())
        throw std::invalid_argument("value vector does not match the state space");
    for (double v : v1)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite defender value");

    const int n = perceptual.num_states();
    const int m = perceptual.num_actions();
    StochasticPolicy out;
    out.num_actions = m;
    out.probs.assign(static_cast<std::size_t>(n) * m, 0.0);
    std::vector<double> q(m);
    for (int s = 0; s < n; ++s) {
        const double r1 = defender_reward(decoys, s);
        double qmax = -1e300;
        for (int a = 0; a < m; ++a) {
            double next = 0.0;
            for (const auto& e : perceptual.row(s, a)) next += e.prob * v1[e.state];
            q[a] = r1 + perceptual.discount * next;
            qmax = std::max(qmax, q[a]);
        }
        double z = 0.0;
        for (int a = 0; a < m; ++a) z += std::exp((q[a] - qmax) / tau);
        for (int a = 0; a < m; ++a) out.prob(s, a) = std::exp((q[a] - qmax) / tau) / z;
    }
    return out;
}

StochasticPolicy make_initial_policy(const Mdp& base, std::span<const int> decoys,
                                     InitPolicyKind kind, std::uint64_t seed) {
    Mdp dynamics = perceptual_dynamics(base, decoys);
    const int n = dynamics.num_states();
    const int m = dynamics.num_actions();
    if (kind == InitPolicyKind::DefenderIdeal) {
        // Surrogate attacker reward: 1 on decoys, 0 on true targets.
        std::vector<double> surrogate(static_cast<std::size_t>(n) * m, 0.0);
        for (int d : decoys)
            for (int a = 0; a < m; ++a) surrogate[dynamics.sa_index(d, a)] = 1.0;
        return optimal_value(dynamics, surrogate, dynamics.discount).second;
    }
    if (kind != InitPolicyKind::Random) throw std::invalid_argument("unknown policy kind");
    Rng rng(seed);
    StochasticPolicy out;
    out.num_actions = m;
    out.probs.resize(static_cast<std::size_t>(n) * m);
    for (int s = 0; s < n; ++s) {
        double total = 0.0;
        for (int a = 0; a < m; ++a) {
            const double w = 0.05 + rng.next_double();
            out.prob(s, a) = w;
            total += w;
        }
        double acc = 0.0;
        for (int a = 0; a < m - 1; ++a) {
            out.prob(s, a) /= total;
            acc += out.prob(s, a);
        }
        out.prob(s, m - 1) = 1.0 - acc;
    }
    return out;
}

double defender_upper_bound(const Mdp& base, std::span<const int> decoys) {
    Mdp dynamics = perceptual_dynamics(base, decoys);
    const int n = dynamics.num_states();
    const int m = dynamics.num_actions();
    std::vector<char> is_decoy(n, 0);
    for (int d : decoys) is_decoy[d] = 1;

    // Maximal-reachability value iteration from below; converges to the best
    // decoy-hitting probability over all policies.
    ValueVector h(n, 0.0), next(n, 0.0);
    for (int d : decoys) h[d] = 1.0;
    for (int iter = 0; iter < 200000; ++iter) {
        double diff = 0.0;
        for (int s = 0; s < n; ++s) {
            if (is_decoy[s]) {
                next[s] = 1.0;
                continue;
            }
            if (s == dynamics.sink || dynamics.is_target(s)) {
                next[s] = is_decoy[s] ? 1.0 : 0.0;
                continue;
            }
            double best = 0.0;
            for (int a = 0; a < m; ++a) {
                double acc = 0.0;
                for (const auto& e : dynamics.row(s, a)) acc += e.prob * h[e.state];
                best = std::max(best, acc);
            }
            next[s] = best;
            diff = std::max(diff, std::abs(next[s] - h[s]));
        }
        h.swap(next);
        if (diff <= 1e-12) break;
    }
    return std::clamp(init_weighted(dynamics, h), 0.0, 1.0);
}

ValueVector defender_state_values(const Mdp& perceptual_dynamics_, std::span<const int> decoys,
                                  const StochasticPolicy& policy) {
    MarkovChain chain =
        freeze_states(induce_chain(perceptual_dynamics_, policy), perceptual_dynamics_.targets);
    return reach_probabilities(chain, decoys);
}

namespace {

RestartRecord run_restart(const Mdp& base, const DefenseDomain& domain, double budget,
                          const SynthesisConfig& config, int index) {
    const auto t0 = Clock::now();
    RestartRecord rec;
    rec.index = index;
    rec.kind = static_cast<std::size_t>(index) < config.kinds.size()
                   ? config.kinds[index]
                   : InitPolicyKind::Random;

    Mdp dynamics = perceptual_dynamics(base, domain.decoys);
    StochasticPolicy desired = make_initial_policy(base, domain.decoys, rec.kind,
                                                   config.seed + static_cast<std::uint64_t>(index));

    ProjectionResult proj =
        project_policy(base, domain, budget, desired, config.projection, nullptr);
    double value = defender_value(base, proj.strategy, proj.attacker_policy);
    rec.trace.push_back({0, value, attacker_value(base, proj.strategy, proj.attacker_policy),
                         proj.strategy.budget_used(), ms_since(t0)});

    for (int k = 1; k <= config.max_outer_iterations; ++k) {
        ValueVector v1 = defender_state_values(dynamics, domain.decoys, proj.attacker_policy);
        desired = policy_improvement(dynamics, domain.decoys, v1, config.improvement_temperature);
        proj = project_policy(base, domain, budget, desired, config.projection, &proj.strategy);

        const double next_value = defender_value(base, proj.strategy, proj.attacker_policy);
        rec.trace.push_back({k, next_value,
                             attacker_value(base, proj.strategy, proj.attacker_policy),
                             proj.strategy.budget_used(), ms_since(t0)});
        const bool settled = std::abs(next_value - value) <= config.epsilon;
        value = next_value;
        if (settled) {
            rec.converged = true;
            break;
        }
    }

    rec.strategy = proj.strategy;
    rec.policy = proj.attacker_policy;
    rec.defender_value = value;
    return rec;
}

} // namespace

SynthesisResult synthesize(const Mdp& base, const DefenseDomain& domain, double budget,
                           const SynthesisConfig& config) {
    ValidationReport report = validate(base);
    if (!report.ok())
        throw std::invalid_argument("invalid model: " + report.violations.front());
    if (budget <= static_cast<double>(domain.decoys.size()) * config.projection.y_min)
        throw InfeasibleBudgetError("budget admits no interior allocation (h <= |D| y_min)");
    if (config.restarts < 1) throw std::invalid_argument("need at least one restart");

    const auto t0 = Clock::now();
    SynthesisResult result;
    result.restarts.resize(config.restarts);

    if (config.parallel_restarts && config.restarts > 1) {
        std::vector<std::future<RestartRecord>> jobs;
        for (int r = 0; r < config.restarts; ++r)
            jobs.push_back(std::async(std::launch::async, run_restart, std::cref(base),
                                      std::cref(domain), budget, std::cref(config), r));
        for (int r = 0; r < config.restarts; ++r) result.restarts[r] = jobs[r].get();
    } else {
        for (int r = 0; r < config.restarts; ++r)
            result.restarts[r] = run_restart(base, domain, budget, config, r);
    }

    int best = 0;
    for (int r = 1; r < config.restarts; ++r)
        if (result.restarts[r].defender_value > result.restarts[best].defender_value) best = r;
    const RestartRecord& winner = result.restarts[best];

    result.best_restart = best;
    result.strategy = winner.strategy;
    result.policy = winner.policy;
    result.defender_value = winner.defender_value;
    result.attacker_value = attacker_value(base, winner.strategy, winner.policy);
    Mdp dynamics = perceptual_dynamics(base, domain.decoys);
    result.attacker_reach_targets = frozen_reach(dynamics, winner.policy, base.targets);
    result.upper_bound = defender_upper_bound(base, domain.decoys);
    result.wall_seconds = ms_since(t0) / 1000.0;
    return result;
}

ScenarioReport evaluate_scenario(const Mdp& base, const DefenseDomain& domain, double budget,
                                 const DefenseStrategy* strategy) {
    DefenseStrategy effective =
        strategy ? *strategy : DefenseStrategy::zero(domain, budget);

    Mdp dynamics = perceptual_dynamics(base, domain.decoys);
    std::vector<double> reward = perceived_reward_map(base, effective);
    auto [values, response] = optimal_value(dynamics, reward, dynamics.discount);

    ScenarioReport out;
    out.attacker_policy = response;
    out.attacker_reach_targets = frozen_reach(dynamics, response, base.targets);
    out.defender_value = defender_value(base, effective, response);
    out.attacker_value = init_weighted(dynamics, values);
    out.budget_used = effective.budget_used();
    return out;
}

std::string write_outer_trace(const RestartRecord& record) {
    std::ostringstream out;
    out << "iter,defender_value,attacker_value,budget_used\n";
    for (const auto& row : record.trace)
        out << row.iter << "," << format_double(row.defender_value) << ","
            << format_double(row.attacker_value) << "," << format_double(row.budget_used) << "\n";
    return out.str();
}

} // namespace decoy
