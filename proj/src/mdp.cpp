#include "decoy/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace decoy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_policy_shape(const Mdp& mdp, const StochasticPolicy& policy) {
    if (policy.num_actions != mdp.num_actions() || policy.num_states() != mdp.num_states())
        throw std::invalid_argument("policy does not cover the MDP's state/action space");
}

Eigen::MatrixXd dense_kernel(const MarkovChain& chain) {
    const int n = chain.num_states();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s)
        for (const auto& e : chain.rows[s]) p(s, e.state) += e.prob;
    return p;
}

/// Solves (I - gamma K) v = b where K is row-selected from `kernel`.
/// Dense LU up to kDenseSolveLimit states, damped fixed-point iteration above.
ValueVector solve_linear(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& b, double gamma) {
    const int n = static_cast<int>(b.size());
    if (n <= kDenseSolveLimit) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gamma * kernel;
        Eigen::VectorXd v = a.partialPivLu().solve(b);
        return {v.data(), v.data() + n};
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int iter = 0; iter < 1000000; ++iter) {
        Eigen::VectorXd next = b + gamma * (kernel * v);
        double diff = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        if (diff <= kSolveTol * (1.0 - gamma)) break;
    }
    return {v.data(), v.data() + n};
}

} // namespace

bool Mdp::is_target(int s) const {
    return std::binary_search(targets.begin(), targets.end(), s);
}

int Mdp::state_index(const std::string& name) const {
    for (int s = 0; s < num_states(); ++s)
        if (state_names[s] == name) return s;
    return -1;
}

int Mdp::action_index(const std::string& name) const {
    for (int a = 0; a < num_actions(); ++a)
        if (action_names[a] == name) return a;
    return -1;
}

StochasticPolicy StochasticPolicy::uniform(int n_states, int n_actions) {
    StochasticPolicy pi;
    pi.num_actions = n_actions;
    pi.probs.assign(static_cast<std::size_t>(n_states) * n_actions, 1.0 / n_actions);
    return pi;
}

StochasticPolicy StochasticPolicy::deterministic(std::span<const int> actions, int n_actions) {
    StochasticPolicy pi;
    pi.num_actions = n_actions;
    pi.probs.assign(actions.size() * n_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) pi.probs[s * n_actions + actions[s]] = 1.0;
    return pi;
}

ValidationReport validate(const Mdp& mdp) {
    ValidationReport report;
    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    auto name = [&](int s) { return mdp.state_names[s]; };

    if (n == 0 || m == 0) {
        report.violations.push_back("model has no states or no actions");
        return report;
    }
    if (mdp.sink < 0 || mdp.sink >= n) {
        report.violations.push_back("sink state is not a member of the state set");
        return report;
    }
    if (mdp.is_target(mdp.sink))
        report.violations.push_back("sink must not be a target state");
    if (!(mdp.discount > 0.0 && mdp.discount < 1.0))
        report.violations.push_back("discount outside (0,1)");

    double init_sum = 0.0;
    for (int s = 0; s < n; ++s) {
        if (mdp.init[s] < -kProbTol)
            report.violations.push_back("negative initial probability at state " + name(s));
        init_sum += mdp.init[s];
    }
    if (std::abs(init_sum - 1.0) > kProbTol)
        report.violations.push_back("initial distribution does not sum to 1");

    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < m; ++a) {
            const ProbRow& row = mdp.row(s, a);
            double sum = 0.0;
            double to_sink = 0.0;
            for (const auto& e : row) {
                if (e.state < 0 || e.state >= n) {
                    report.violations.push_back("transition to unknown state from (" + name(s) +
                                                ", " + mdp.action_names[a] + ")");
                    continue;
                }
                if (e.prob < -kProbTol)
                    report.violations.push_back("negative transition probability at (" + name(s) +
                                                ", " + mdp.action_names[a] + ")");
                sum += e.prob;
                if (e.state == mdp.sink) to_sink += e.prob;
            }
            if (std::abs(sum - 1.0) > kProbTol)
                report.violations.push_back("transition row does not sum to 1 at (" + name(s) +
                                            ", " + mdp.action_names[a] + ")");
            if (s == mdp.sink && std::abs(to_sink - 1.0) > kProbTol)
                report.violations.push_back("sink not absorbing under action " +
                                            mdp.action_names[a]);
            if (mdp.is_target(s) && std::abs(to_sink - 1.0) > kProbTol)
                report.violations.push_back("target not terminating: " + name(s) +
                                            " has a non-sink successor under action " +
                                            mdp.action_names[a]);
            if (!mdp.is_target(s) && mdp.reward2[mdp.sa_index(s, a)] != 0.0)
                report.violations.push_back("nonzero reward off the target set at (" + name(s) +
                                            ", " + mdp.action_names[a] + ")");
            if (mdp.reward2[mdp.sa_index(s, a)] < 0.0)
                report.violations.push_back("negative target reward at (" + name(s) + ", " +
                                            mdp.action_names[a] + ")");
        }
    }
    return report;
}

MarkovChain induce_chain(const Mdp& mdp, const StochasticPolicy& policy) {
    check_policy_shape(mdp, policy);
    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    MarkovChain chain;
    chain.init = mdp.init;
    chain.rows.resize(n);
    std::vector<double> dense(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (int a = 0; a < m; ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            for (const auto& e : mdp.row(s, a)) dense[e.state] += pa * e.prob;
        }
        ProbRow& row = chain.rows[s];
        for (int t = 0; t < n; ++t)
            if (dense[t] != 0.0) row.push_back({t, dense[t]});
    }
    return chain;
}

ValueVector policy_evaluation(const Mdp& mdp, std::span<const double> reward,
                              const StochasticPolicy& policy, double discount) {
    check_policy_shape(mdp, policy);
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("discount outside (0,1)");
    if (reward.size() != mdp.reward2.size())
        throw std::invalid_argument("reward map has the wrong shape");
    for (double r : reward)
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward entry");

    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    MarkovChain chain = induce_chain(mdp, policy);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) r(s) += policy.prob(s, a) * reward[mdp.sa_index(s, a)];
    return solve_linear(dense_kernel(chain), r, discount);
}

std::pair<ValueVector, StochasticPolicy>
optimal_value(const Mdp& mdp, std::span<const double> reward, double discount) {
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("discount outside (0,1)");
    if (reward.size() != mdp.reward2.size())
        throw std::invalid_argument("reward map has the wrong shape");
    for (double r : reward)
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward entry");

    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    ValueVector v(n, 0.0), next(n, 0.0);
    std::vector<int> best(n, 0);
    for (int iter = 0; iter < 1000000; ++iter) {
        double diff = 0.0;
        for (int s = 0; s < n; ++s) {
            double vmax = -kInf;
            int amax = 0;
            for (int a = 0; a < m; ++a) {
                double q = reward[mdp.sa_index(s, a)];
                for (const auto& e : mdp.row(s, a)) q += discount * e.prob * v[e.state];
                if (q > vmax) {
                    vmax = q;
                    amax = a;
                }
            }
            next[s] = vmax;
            best[s] = amax;
            diff = std::max(diff, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (diff <= kSolveTol) break;
    }
    return {v, StochasticPolicy::deterministic(best, m)};
}

SoftSolution soft_value_iteration(const Mdp& mdp, std::span<const double> reward,
                                  double discount, double temperature,
                                  const ValueVector* warm_start) {
    if (temperature <= 0.0) throw std::invalid_argument("temperature must be positive");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("discount outside (0,1)");
    if (reward.size() != mdp.reward2.size())
        throw std::invalid_argument("reward map has the wrong shape");

    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    ValueVector v = warm_start && static_cast<int>(warm_start->size()) == n
                        ? *warm_start
                        : ValueVector(n, 0.0);
    ValueVector next(n, 0.0);
    std::vector<double> q(static_cast<std::size_t>(n) * m, 0.0);

    for (int iter = 0; iter < 1000000; ++iter) {
        double diff = 0.0;
        for (int s = 0; s < n; ++s) {
            double qmax = -kInf;
            for (int a = 0; a < m; ++a) {
                double qa = reward[mdp.sa_index(s, a)];
                for (const auto& e : mdp.row(s, a)) qa += discount * e.prob * v[e.state];
                q[mdp.sa_index(s, a)] = qa;
                qmax = std::max(qmax, qa);
            }
            double acc = 0.0;
            for (int a = 0; a < m; ++a) acc += std::exp((q[mdp.sa_index(s, a)] - qmax) / temperature);
            next[s] = qmax + temperature * std::log(acc);
            diff = std::max(diff, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        // Tighter than kSolveTol: gradient checks difference the objective at
        // 1e-5 steps and must not see solver truncation noise.
        if (diff <= 1e-13) break;
    }

    SoftSolution out;
    out.values = v;
    out.policy.num_actions = m;
    out.policy.probs.assign(static_cast<std::size_t>(n) * m, 0.0);
    out.log_probs.assign(static_cast<std::size_t>(n) * m, 0.0);
    for (int s = 0; s < n; ++s) {
        double qmax = -kInf;
        for (int a = 0; a < m; ++a) {
            double qa = reward[mdp.sa_index(s, a)];
            for (const auto& e : mdp.row(s, a)) qa += discount * e.prob * v[e.state];
            q[mdp.sa_index(s, a)] = qa;
            qmax = std::max(qmax, qa);
        }
        double acc = 0.0;
        for (int a = 0; a < m; ++a) acc += std::exp((q[mdp.sa_index(s, a)] - qmax) / temperature);
        const double log_z = std::log(acc);
        for (int a = 0; a < m; ++a) {
            const double logit = (q[mdp.sa_index(s, a)] - qmax) / temperature - log_z;
            out.log_probs[mdp.sa_index(s, a)] = logit;
            out.policy.prob(s, a) = std::exp(logit);
        }
    }
    return out;
}

OccupancyMeasure occupancy(const MarkovChain& chain, const StochasticPolicy& policy,
                           double discount) {
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("discount outside (0,1)");
    const int n = chain.num_states();
    if (policy.num_states() != n)
        throw std::invalid_argument("policy does not cover the chain's state space");

    Eigen::VectorXd nu = Eigen::Map<const Eigen::VectorXd>(chain.init.data(), n);
    // rho = nu + gamma P^T rho
    ValueVector rho = solve_linear(dense_kernel(chain).transpose(), nu, discount);

    OccupancyMeasure occ;
    occ.state_occ = rho;
    const int m = policy.num_actions;
    occ.state_action_occ.assign(static_cast<std::size_t>(n) * m, 0.0);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) occ.state_action_occ[s * m + a] = rho[s] * policy.prob(s, a);
    return occ;
}

ValueVector reach_probabilities(const MarkovChain& chain, std::span<const int> absorbing_set) {
    const int n = chain.num_states();
    std::vector<char> is_target(n, 0);
    for (int s : absorbing_set) {
        if (s < 0 || s >= n) throw std::invalid_argument("absorbing state outside the chain");
        is_target[s] = 1;
    }
    for (int s : absorbing_set) {
        double self = 0.0;
        for (const auto& e : chain.rows[s])
            if (e.state == s) self += e.prob;
        if (std::abs(self - 1.0) > kProbTol)
            throw std::invalid_argument("absorbing set contains a non-absorbing state");
    }

    // Backward reachability over the support graph; states that cannot reach
    // the set get probability exactly zero, which also keeps the transient
    // block of the linear system nonsingular.
    std::vector<std::vector<int>> preds(n);
    for (int s = 0; s < n; ++s)
        for (const auto& e : chain.rows[s])
            if (e.prob > 0.0 && e.state != s) preds[e.state].push_back(s);
    std::vector<char> can_reach(n, 0);
    std::vector<int> stack(absorbing_set.begin(), absorbing_set.end());
    for (int s : absorbing_set) can_reach[s] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int p : preds[s])
            if (!can_reach[p]) {
                can_reach[p] = 1;
                stack.push_back(p);
            }
    }

    std::vector<int> transient;
    std::vector<int> pos(n, -1);
    for (int s = 0; s < n; ++s)
        if (can_reach[s] && !is_target[s]) {
            pos[s] = static_cast<int>(transient.size());
            transient.push_back(s);
        }

    ValueVector h(n, 0.0);
    for (int s : absorbing_set) h[s] = 1.0;
    const int k = static_cast<int>(transient.size());
    if (k > 0) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
        for (int i = 0; i < k; ++i) {
            for (const auto& e : chain.rows[transient[i]]) {
                if (is_target[e.state])
                    b(i) += e.prob;
                else if (pos[e.state] >= 0)
                    a(i, pos[e.state]) -= e.prob;
            }
        }
        Eigen::VectorXd sol = a.partialPivLu().solve(b);
        for (int i = 0; i < k; ++i) h[transient[i]] = std::clamp(sol(i), 0.0, 1.0);
    }
    return h;
}

double reach_probability(const MarkovChain& chain, std::span<const int> absorbing_set) {
    ValueVector h = reach_probabilities(chain, absorbing_set);
    double p = 0.0;
    for (int s = 0; s < chain.num_states(); ++s) p += chain.init[s] * h[s];
    return std::clamp(p, 0.0, 1.0);
}

double kl_divergence(const MarkovChain& chain_p, const MarkovChain& chain_q, int horizon) {
    const int n = chain_p.num_states();
    if (chain_q.num_states() != n)
        throw std::invalid_argument("chains are defined on different state sets");
    for (int s = 0; s < n; ++s)
        if (std::abs(chain_p.init[s] - chain_q.init[s]) > kProbTol)
            throw std::invalid_argument("chains have different initial distributions");

    // Per-state KL between transition rows; +inf marks a support violation.
    ValueVector row_kl(n, 0.0);
    std::vector<double> q_dense(n);
    for (int s = 0; s < n; ++s) {
        std::fill(q_dense.begin(), q_dense.end(), 0.0);
        for (const auto& e : chain_q.rows[s]) q_dense[e.state] += e.prob;
        double acc = 0.0;
        for (const auto& e : chain_p.rows[s]) {
            if (e.prob <= 0.0) continue;
            if (q_dense[e.state] <= 0.0) {
                acc = kInf;
                break;
            }
            acc += e.prob * std::log(e.prob / q_dense[e.state]);
        }
        row_kl[s] = std::isinf(acc) ? acc : std::max(acc, 0.0);
    }

    ValueVector dist = chain_p.init, next(n);
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
        for (int s = 0; s < n; ++s) {
            if (dist[s] <= 0.0) continue;
            if (std::isinf(row_kl[s])) return kInf;
            total += dist[s] * row_kl[s];
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            if (dist[s] <= 0.0) continue;
            for (const auto& e : chain_p.rows[s]) next[e.state] += dist[s] * e.prob;
        }
        dist.swap(next);
    }
    return total;
}

} // namespace decoy
