#include "decoy/oracle.hpp"

#include "decoy/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace decoy {
namespace oracle {

namespace {

/// Plain Gauss-Jordan with partial pivoting; deliberately independent of the
/// library's Eigen-based solvers.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular system in oracle solve");
        const double inv = 1.0 / a[col][col];
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

double evaluate_deterministic(const Mdp& mdp, const std::vector<int>& choice,
                              std::span<const double> reward, double discount) {
    const int n = mdp.num_states();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int s = 0; s < n; ++s) {
        a[s][s] = 1.0;
        const int act = choice[s];
        b[s] = reward[mdp.sa_index(s, act)];
        for (const auto& e : mdp.row(s, act)) a[s][e.state] -= discount * e.prob;
    }
    std::vector<double> v = gauss_solve(std::move(a), std::move(b));
    double out = 0.0;
    for (int s = 0; s < n; ++s) out += mdp.init[s] * v[s];
    return out;
}

int sample_row(const ProbRow& row, double u) {
    double acc = 0.0;
    for (const auto& e : row) {
        acc += e.prob;
        if (u < acc) return e.state;
    }
    return row.back().state;
}

} // namespace

std::pair<double, StochasticPolicy> enumerate_best_response(const Mdp& mdp,
                                                            std::span<const double> reward,
                                                            double discount,
                                                            const OracleBudget& budget) {
    const int n = mdp.num_states();
    const int m = mdp.num_actions();
    double count = std::pow(static_cast<double>(m), n);
    if (count > static_cast<double>(budget.max_policies))
        throw std::invalid_argument("instance too large to enumerate");

    std::vector<int> choice(n, 0), best_choice(n, 0);
    double best = -1e300;
    while (true) {
        double v = evaluate_deterministic(mdp, choice, reward, discount);
        if (v > best) {
            best = v;
            best_choice = choice;
        }
        int pos = n - 1;
        while (pos >= 0) {
            if (++choice[pos] < m) break;
            choice[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return {best, StochasticPolicy::deterministic(best_choice, m)};
}

std::pair<double, double> monte_carlo_value(const Mdp& mdp, const StochasticPolicy& policy,
                                            std::span<const double> reward, double discount,
                                            const OracleBudget& budget) {
    Rng rng(budget.seed);
    const int n = mdp.num_states();
    const int m = mdp.num_actions();

    std::vector<double> init_cdf(n);
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
        acc += mdp.init[s];
        init_cdf[s] = acc;
    }

    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < budget.rollouts; ++k) {
        double u = rng.next_double();
        int s = static_cast<int>(std::lower_bound(init_cdf.begin(), init_cdf.end(), u) -
                                 init_cdf.begin());
        s = std::min(s, n - 1);
        double ret = 0.0, weight = 1.0;
        for (int t = 0; t < budget.horizon; ++t) {
            if (s == mdp.sink) break;
            double ua = rng.next_double();
            int a = 0;
            double pa = 0.0;
            for (; a < m - 1; ++a) {
                pa += policy.prob(s, a);
                if (ua < pa) break;
            }
            ret += weight * reward[mdp.sa_index(s, a)];
            s = sample_row(mdp.row(s, a), rng.next_double());
            weight *= discount;
            if (weight < 1e-14) break;
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    const double mean = sum / budget.rollouts;
    const double var = std::max(0.0, sum_sq / budget.rollouts - mean * mean);
    const double se = std::sqrt(var / budget.rollouts);
    return {mean, se};
}

std::pair<double, double> monte_carlo_reach(const MarkovChain& chain, std::span<const int> targets,
                                            const OracleBudget& budget) {
    Rng rng(budget.seed);
    const int n = chain.num_states();
    std::vector<char> is_target(n, 0);
    for (int t : targets) is_target[t] = 1;

    std::vector<double> init_cdf(n);
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
        acc += chain.init[s];
        init_cdf[s] = acc;
    }

    long hits = 0;
    for (int k = 0; k < budget.rollouts; ++k) {
        double u = rng.next_double();
        int s = static_cast<int>(std::lower_bound(init_cdf.begin(), init_cdf.end(), u) -
                                 init_cdf.begin());
        s = std::min(s, n - 1);
        for (int t = 0; t < budget.horizon; ++t) {
            if (is_target[s]) {
                ++hits;
                break;
            }
            const ProbRow& row = chain.rows[s];
            if (row.size() == 1 && row[0].state == s) break; // absorbed elsewhere
            s = sample_row(row, rng.next_double());
        }
    }
    const double mean = static_cast<double>(hits) / budget.rollouts;
    const double se = std::sqrt(std::max(0.0, mean * (1.0 - mean)) / budget.rollouts);
    return {mean, se};
}

double finite_difference_check(const std::function<double(std::span<const double>)>& objective,
                               std::span<const double> grad, std::span<const double> point,
                               double step) {
    if (step <= 0.0) throw std::invalid_argument("step must be positive");
    std::vector<double> probe(point.begin(), point.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + step;
        const double up = objective(probe);
        probe[i] = saved - step;
        const double down = objective(probe);
        probe[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
        worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
    }
    return worst;
}

} // namespace oracle
} // namespace decoy
