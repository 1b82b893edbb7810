#pragma once

#include "decoy/mdp.hpp"

#include <string>
#include <vector>

namespace decoy::testing {

/// Small-model builder: states named s0..s{n-1}, actions a0..a{m-1}; rows
/// default to self-loops so tests only fill what they use.
inline Mdp blank_mdp(int n, int m, int sink, double discount = 0.95) {
    Mdp mdp;
    for (int s = 0; s < n; ++s) mdp.state_names.push_back("s" + std::to_string(s));
    for (int a = 0; a < m; ++a) mdp.action_names.push_back("a" + std::to_string(a));
    mdp.sink = sink;
    mdp.discount = discount;
    mdp.init.assign(n, 0.0);
    mdp.init[0] = 1.0;
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < m; ++a) mdp.row(s, a) = {{s, 1.0}};
    return mdp;
}

inline MarkovChain chain_of(std::vector<ProbRow> rows, std::vector<double> init) {
    MarkovChain chain;
    chain.rows = std::move(rows);
    chain.init = std::move(init);
    return chain;
}

} // namespace decoy::testing
