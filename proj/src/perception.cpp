#include "decoy/perception.hpp"

#include "decoy/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace decoy {

bool DefenseDomain::is_decoy(int s) const {
    return std::binary_search(decoys.begin(), decoys.end(), s);
}

int DefenseDomain::decoy_slot(int s) const {
    auto it = std::lower_bound(decoys.begin(), decoys.end(), s);
    if (it == decoys.end() || *it != s) return -1;
    return static_cast<int>(it - decoys.begin());
}

int DefenseDomain::modifiable_slot(int s, int a) const {
    auto it = std::lower_bound(modifiable.begin(), modifiable.end(), std::pair<int, int>{s, a});
    if (it == modifiable.end() || *it != std::pair<int, int>{s, a}) return -1;
    return static_cast<int>(it - modifiable.begin());
}

double DefenseStrategy::x_value(int s, int a) const {
    int slot = domain.modifiable_slot(s, a);
    return slot < 0 ? 0.0 : x[slot];
}

double DefenseStrategy::y_value(int s) const {
    int slot = domain.decoy_slot(s);
    return slot < 0 ? 0.0 : y[slot];
}

double DefenseStrategy::budget_used() const {
    double sum = 0.0;
    for (double v : y) sum += v;
    return sum;
}

DefenseStrategy DefenseStrategy::zero(DefenseDomain domain, double budget) {
    DefenseStrategy s;
    s.x.assign(domain.modifiable.size(), 0.0);
    s.y.assign(domain.decoys.size(), 0.0);
    s.domain = std::move(domain);
    s.budget = budget;
    s.y_floor = 0.0;
    return s;
}

DefenseStrategy make_strategy(const Mdp& base, DefenseDomain domain, std::vector<double> x,
                              std::vector<double> y, double budget, double y_floor) {
    if (!std::is_sorted(domain.decoys.begin(), domain.decoys.end()))
        std::sort(domain.decoys.begin(), domain.decoys.end());
    if (!std::is_sorted(domain.modifiable.begin(), domain.modifiable.end()))
        std::sort(domain.modifiable.begin(), domain.modifiable.end());

    for (int d : domain.decoys) {
        if (d < 0 || d >= base.num_states())
            throw std::invalid_argument("decoy state outside the model");
        if (base.is_target(d)) throw std::invalid_argument("decoy overlaps the target set");
        if (d == base.sink) throw std::invalid_argument("decoy placed on the sink");
    }
    for (auto [s, a] : domain.modifiable) {
        if (s < 0 || s >= base.num_states() || a < 0 || a >= base.num_actions())
            throw std::invalid_argument("modifiable pair outside the model");
        if (base.is_target(s) || domain.is_decoy(s))
            throw std::invalid_argument("modifiable pair on a target or decoy state");
    }
    if (x.size() != domain.modifiable.size() || y.size() != domain.decoys.size())
        throw std::invalid_argument("strategy vectors do not match the domain");
    for (double v : x)
        if (!(v <= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("action modification must be nonpositive and finite");
    for (double v : y)
        if (!(v >= y_floor) || !std::isfinite(v))
            throw std::invalid_argument("decoy reward below the positivity floor");
    if (budget < 0.0) throw std::invalid_argument("budget must be nonnegative");
    double used = 0.0;
    for (double v : y) used += v;
    if (used > budget + 1e-12) throw std::invalid_argument("decoy allocation exceeds the budget");

    DefenseStrategy s;
    s.domain = std::move(domain);
    s.x = std::move(x);
    s.y = std::move(y);
    s.budget = budget;
    s.y_floor = y_floor;
    return s;
}

double perceived_reward(const Mdp& base, const DefenseStrategy& strategy, int s, int a) {
    double y = strategy.y_value(s);
    if (strategy.domain.is_decoy(s)) return y;
    double x = strategy.x_value(s, a);
    if (x < 0.0) return x;
    return base.reward2[base.sa_index(s, a)];
}

std::vector<double> perceived_reward_map(const Mdp& base, const DefenseStrategy& strategy) {
    const int n = base.num_states();
    const int m = base.num_actions();
    std::vector<double> r(static_cast<std::size_t>(n) * m, 0.0);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) r[base.sa_index(s, a)] = perceived_reward(base, strategy, s, a);
    return r;
}

Mdp perceptual_dynamics(const Mdp& base, std::span<const int> decoys) {
    // Decoys already in the target set are left alone so that re-applying
    // the transform is a no-op; overlap with true targets is rejected when
    // the strategy or instance is constructed.
    Mdp out = base;
    for (int d : decoys) {
        if (d < 0 || d >= base.num_states())
            throw std::invalid_argument("decoy state outside the model");
        for (int a = 0; a < base.num_actions(); ++a) {
            out.row(d, a) = {{base.sink, 1.0}};
            out.reward2[out.sa_index(d, a)] = 0.0;
        }
    }
    std::set<int> targets(base.targets.begin(), base.targets.end());
    targets.insert(decoys.begin(), decoys.end());
    out.targets.assign(targets.begin(), targets.end());
    return out;
}

PerceptualMdp build_perceptual(const Mdp& base, const DefenseStrategy& strategy) {
    PerceptualMdp out;
    out.model = perceptual_dynamics(base, strategy.domain.decoys);
    out.model.reward2 = perceived_reward_map(base, strategy);
    out.domain = strategy.domain;
    out.strategy = strategy;
    return out;
}

double defender_reward(std::span<const int> decoys, int s) {
    return std::binary_search(decoys.begin(), decoys.end(), s) ? 1.0 : 0.0;
}

MarkovChain freeze_states(const MarkovChain& chain, std::span<const int> frozen) {
    MarkovChain out = chain;
    for (int s : frozen) out.rows[s] = {{s, 1.0}};
    return out;
}

namespace {

std::vector<int> frozen_set(const Mdp& perceptual) {
    // Target set of the perceptual model already contains both F and D.
    return perceptual.targets;
}

} // namespace

double defender_value(const Mdp& base, const DefenseStrategy& strategy,
                      const StochasticPolicy& policy) {
    Mdp dyn = perceptual_dynamics(base, strategy.domain.decoys);
    MarkovChain chain = freeze_states(induce_chain(dyn, policy), frozen_set(dyn));
    return reach_probability(chain, strategy.domain.decoys);
}

double attacker_value(const Mdp& base, const DefenseStrategy& strategy,
                      const StochasticPolicy& policy) {
    Mdp dyn = perceptual_dynamics(base, strategy.domain.decoys);
    std::vector<double> reward = perceived_reward_map(base, strategy);
    ValueVector v = policy_evaluation(dyn, reward, policy, base.discount);
    double out = 0.0;
    for (int s = 0; s < base.num_states(); ++s) out += base.init[s] * v[s];
    return out;
}

std::string write_strategy(const Mdp& base, const DefenseStrategy& strategy) {
    std::ostringstream out;
    out << "BUDGET " << format_double(strategy.budget) << "\n";
    for (std::size_t i = 0; i < strategy.domain.decoys.size(); ++i)
        out << "Y " << base.state_names[strategy.domain.decoys[i]] << " "
            << format_double(strategy.y[i]) << "\n";
    for (std::size_t i = 0; i < strategy.domain.modifiable.size(); ++i) {
        auto [s, a] = strategy.domain.modifiable[i];
        out << "X " << base.state_names[s] << " " << base.action_names[a] << " "
            << format_double(strategy.x[i]) << "\n";
    }
    return out.str();
}

DefenseStrategy parse_strategy(const Mdp& base, const DefenseDomain& domain,
                               const std::string& text) {
    std::vector<double> x(domain.modifiable.size(), 0.0);
    std::vector<double> y(domain.decoys.size(), 0.0);
    std::vector<char> y_seen(domain.decoys.size(), 0);
    double budget = -1.0;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("strategy line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw) || kw[0] == '#') continue;
        if (kw == "BUDGET") {
            if (!(ls >> budget)) fail("malformed budget");
        } else if (kw == "Y") {
            std::string state;
            double value;
            if (!(ls >> state >> value)) fail("malformed decoy allocation");
            int s = base.state_index(state);
            if (s < 0) fail("unknown state " + state);
            int slot = domain.decoy_slot(s);
            if (slot < 0) fail("state " + state + " is not a decoy of this instance");
            y[slot] = value;
            y_seen[slot] = 1;
        } else if (kw == "X") {
            std::string state, action;
            double value;
            if (!(ls >> state >> action >> value)) fail("malformed action modification");
            int s = base.state_index(state);
            int a = base.action_index(action);
            if (s < 0) fail("unknown state " + state);
            if (a < 0) fail("unknown action " + action);
            int slot = domain.modifiable_slot(s, a);
            if (slot < 0) fail("pair (" + state + ", " + action + ") is not modifiable here");
            x[slot] = value;
        } else {
            fail("unknown keyword " + kw);
        }
    }
    if (budget < 0.0) throw std::invalid_argument("strategy file is missing a BUDGET line");
    const std::size_t assigned =
        static_cast<std::size_t>(std::count(y_seen.begin(), y_seen.end(), 1));
    if (assigned == 0 && !domain.decoys.empty()) {
        // No allocation at all: the no-resource strategy (decoys stay at zero).
        DefenseStrategy s = DefenseStrategy::zero(domain, budget);
        s.x = std::move(x);
        for (double v : s.x)
            if (!(v <= 0.0)) throw std::invalid_argument("action modification must be nonpositive");
        return s;
    }
    if (assigned != domain.decoys.size())
        throw std::invalid_argument("strategy allocates only part of the decoy set");
    return make_strategy(base, domain, std::move(x), std::move(y), budget);
}

} // namespace decoy
