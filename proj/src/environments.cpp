#include "decoy/environments.hpp"

#include "decoy/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace decoy {

namespace {

std::string cell_name(GridCell c) {
    return std::to_string(c.row) + "," + std::to_string(c.col);
}

// Compass actions; laterals of N/S are W/E, laterals of E/W are N/S.
constexpr int kNorth = 0, kSouth = 1, kEast = 2, kWest = 3;
constexpr int kRowDelta[4] = {-1, 1, 0, 0};
constexpr int kColDelta[4] = {0, 0, 1, -1};

std::pair<int, int> laterals(int action) {
    return (action == kNorth || action == kSouth) ? std::make_pair(kWest, kEast)
                                                  : std::make_pair(kNorth, kSouth);
}

} // namespace

Mdp build_gridworld(const GridSpec& spec) {
    if (spec.rows <= 0 || spec.cols <= 0)
        throw std::invalid_argument("grid must have positive dimensions");
    if (!(spec.alpha >= 0.0 && spec.alpha < 0.5))
        throw std::invalid_argument("slip probability must lie in [0, 0.5)");
    auto in_range = [&](GridCell c) {
        return c.row >= 0 && c.row < spec.rows && c.col >= 0 && c.col < spec.cols;
    };
    auto require_cell = [&](GridCell c, const char* what) {
        if (!in_range(c))
            throw std::invalid_argument(std::string(what) + " cell " + cell_name(c) +
                                        " outside a " + std::to_string(spec.rows) + "x" +
                                        std::to_string(spec.cols) + " grid");
    };
    require_cell(spec.init, "initial");
    for (auto c : spec.sensors) require_cell(c, "sensor");
    for (auto& [c, r] : spec.targets) {
        require_cell(c, "target");
        if (r < 0.0)
            throw std::invalid_argument("target cell " + cell_name(c) + " has a negative reward");
    }
    for (auto c : spec.decoys) require_cell(c, "decoy");
    for (auto& [c, a] : spec.modifiable) {
        require_cell(c, "modifiable");
        if (a < 0 || a >= 4)
            throw std::invalid_argument("modifiable cell " + cell_name(c) +
                                        " names an unknown action");
    }

    std::set<GridCell> sensor_set(spec.sensors.begin(), spec.sensors.end());
    std::set<GridCell> decoy_set(spec.decoys.begin(), spec.decoys.end());
    std::set<GridCell> target_set;
    for (auto& [c, r] : spec.targets) target_set.insert(c);
    for (auto c : spec.sensors)
        if (target_set.count(c) || decoy_set.count(c))
            throw std::invalid_argument("cell " + cell_name(c) + " declared with two roles");
    for (auto c : spec.decoys)
        if (target_set.count(c))
            throw std::invalid_argument("cell " + cell_name(c) + " is both target and decoy");
    for (auto& [c, a] : spec.modifiable)
        if (target_set.count(c) || decoy_set.count(c))
            throw std::invalid_argument("modifiable cell " + cell_name(c) +
                                        " overlaps a target or decoy");

    const int n_cells = spec.rows * spec.cols;
    const int n = n_cells + 1;
    const int m = 4;
    Mdp mdp;
    mdp.action_names = {"N", "S", "E", "W"};
    mdp.state_names.reserve(n);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) mdp.state_names.push_back(cell_name({r, c}));
    mdp.state_names.push_back("sink");
    mdp.sink = n_cells;
    mdp.discount = spec.discount;
    mdp.init.assign(n, 0.0);
    mdp.init[spec.init.row * spec.cols + spec.init.col] = 1.0;
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);

    auto index_of = [&](GridCell c) { return c.row * spec.cols + c.col; };
    for (auto& [c, r] : spec.targets) {
        mdp.targets.push_back(index_of(c));
        for (int a = 0; a < m; ++a) mdp.reward2[mdp.sa_index(index_of(c), a)] = r;
    }
    std::sort(mdp.targets.begin(), mdp.targets.end());

    const double straight = 1.0 - 2.0 * spec.alpha;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const GridCell here{r, c};
            const int s = index_of(here);
            if (sensor_set.count(here) || target_set.count(here)) {
                for (int a = 0; a < m; ++a) mdp.row(s, a) = {{mdp.sink, 1.0}};
                continue;
            }
            for (int a = 0; a < m; ++a) {
                // Integer coefficient accounting: each successor receives
                // `big` units of (1 - 2*alpha) and `small` units of alpha, so
                // mass conservation is checked exactly before float conversion.
                std::map<int, std::pair<int, int>> coeff;
                auto land = [&](int dir) {
                    GridCell dest{r + kRowDelta[dir], c + kColDelta[dir]};
                    return in_range(dest) ? index_of(dest) : s;
                };
                coeff[land(a)].first += 1;
                auto [l1, l2] = laterals(a);
                coeff[land(l1)].second += 1;
                coeff[land(l2)].second += 1;

                int big_total = 0, small_total = 0;
                ProbRow& row = mdp.row(s, a);
                for (auto& [dest, counts] : coeff) {
                    big_total += counts.first;
                    small_total += counts.second;
                    row.push_back({dest, counts.first * straight + counts.second * spec.alpha});
                }
                if (big_total != 1 || small_total != 2)
                    throw std::logic_error("slip mass not conserved at " + cell_name(here));
            }
        }
    }
    for (int a = 0; a < m; ++a) mdp.row(mdp.sink, a) = {{mdp.sink, 1.0}};
    return mdp;
}

Instance build_grid_instance(const GridSpec& spec) {
    Instance inst;
    inst.mdp = build_gridworld(spec);
    for (auto c : spec.decoys) inst.domain.decoys.push_back(c.row * spec.cols + c.col);
    for (auto& [c, a] : spec.modifiable)
        inst.domain.modifiable.push_back({c.row * spec.cols + c.col, a});
    std::sort(inst.domain.decoys.begin(), inst.domain.decoys.end());
    std::sort(inst.domain.modifiable.begin(), inst.domain.modifiable.end());
    inst.budget = spec.budget;
    return inst;
}

namespace {

struct Record {
    int line = 0;
    std::vector<std::string> fields;
};

[[noreturn]] void fail_at(int line, const std::string& what) {
    throw std::invalid_argument("line " + std::to_string(line) + ": " + what);
}

double parse_number(const Record& rec, const std::string& text) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) fail_at(rec.line, "malformed number " + text);
        return v;
    } catch (const std::invalid_argument&) {
        fail_at(rec.line, "malformed number " + text);
    } catch (const std::out_of_range&) {
        fail_at(rec.line, "number out of range " + text);
    }
}

std::vector<Record> tokenize(const std::string& text) {
    std::vector<Record> records;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        Record rec;
        rec.line = line_no;
        std::string tok;
        while (ls >> tok) rec.fields.push_back(tok);
        if (!rec.fields.empty()) records.push_back(std::move(rec));
    }
    return records;
}

GridCell parse_cell(const Record& rec, const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= text.size())
        fail_at(rec.line, "malformed cell " + text);
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (const std::exception&) {
        fail_at(rec.line, "malformed cell " + text);
    }
}

Instance parse_grid_records(const std::vector<Record>& records) {
    GridSpec spec;
    bool saw_grid = false, saw_init = false, saw_budget = false;
    std::map<GridCell, std::map<int, double>> target_rewards;
    const std::vector<std::string> grid_actions = {"N", "S", "E", "W"};
    auto action_of = [&](const Record& rec, const std::string& name) {
        auto it = std::find(grid_actions.begin(), grid_actions.end(), name);
        if (it == grid_actions.end()) fail_at(rec.line, "unknown action " + name);
        return static_cast<int>(it - grid_actions.begin());
    };

    for (const auto& rec : records) {
        const auto& kw = rec.fields[0];
        auto need = [&](std::size_t n) {
            if (rec.fields.size() != n + 1)
                fail_at(rec.line, kw + " expects " + std::to_string(n) + " fields");
        };
        if (kw == "GRID") {
            need(2);
            spec.rows = static_cast<int>(parse_number(rec, rec.fields[1]));
            spec.cols = static_cast<int>(parse_number(rec, rec.fields[2]));
            saw_grid = true;
        } else if (kw == "ALPHA") {
            need(1);
            spec.alpha = parse_number(rec, rec.fields[1]);
        } else if (kw == "GAMMA") {
            need(1);
            spec.discount = parse_number(rec, rec.fields[1]);
        } else if (kw == "INIT") {
            need(2);
            if (saw_init) fail_at(rec.line, "grid instances take a single INIT cell");
            if (parse_number(rec, rec.fields[2]) != 1.0)
                fail_at(rec.line, "grid INIT probability must be 1");
            spec.init = parse_cell(rec, rec.fields[1]);
            saw_init = true;
        } else if (kw == "TARGET") {
            need(3);
            target_rewards[parse_cell(rec, rec.fields[1])][action_of(rec, rec.fields[2])] =
                parse_number(rec, rec.fields[3]);
        } else if (kw == "SENSOR") {
            need(1);
            spec.sensors.push_back(parse_cell(rec, rec.fields[1]));
        } else if (kw == "DECOY") {
            need(1);
            spec.decoys.push_back(parse_cell(rec, rec.fields[1]));
        } else if (kw == "MODIFIABLE") {
            need(2);
            spec.modifiable.push_back(
                {parse_cell(rec, rec.fields[1]), action_of(rec, rec.fields[2])});
        } else if (kw == "BUDGET") {
            need(1);
            spec.budget = parse_number(rec, rec.fields[1]);
            saw_budget = true;
        } else {
            fail_at(rec.line, "record " + kw + " not allowed in grid instances");
        }
    }
    if (!saw_grid || !saw_init || !saw_budget)
        throw std::invalid_argument("grid instance needs GRID, INIT and BUDGET records");
    for (auto& [cell, per_action] : target_rewards) {
        double reward = per_action.begin()->second;
        for (auto& [a, r] : per_action)
            if (r != reward)
                throw std::invalid_argument("target cell " + cell_name(cell) +
                                            " has unequal per-action rewards");
        spec.targets.push_back({cell, reward});
    }
    std::sort(spec.targets.begin(), spec.targets.end());
    std::sort(spec.sensors.begin(), spec.sensors.end());
    std::sort(spec.decoys.begin(), spec.decoys.end());
    std::sort(spec.modifiable.begin(), spec.modifiable.end());
    try {
        return build_grid_instance(spec);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("grid instance: ") + e.what());
    }
}

Instance parse_explicit_records(const std::vector<Record>& records) {
    Mdp mdp;
    DefenseDomain domain;
    double budget = 0.0;
    bool saw_budget = false, saw_gamma = false;
    std::map<std::string, int> state_ids;
    std::map<std::string, int> action_ids;

    // Declaration pass: the grammar allows forward references only within a
    // record type, so states and actions are collected first.
    for (const auto& rec : records) {
        const auto& kw = rec.fields[0];
        static const char* known[] = {"ACTION", "STATE",  "GAMMA",      "SINK",   "INIT",
                                      "TRANS",  "TARGET", "SENSOR",     "DECOY",  "MODIFIABLE",
                                      "BUDGET", "GRID",   "ALPHA"};
        bool ok = false;
        for (const char* k : known) ok = ok || kw == k;
        if (!ok) fail_at(rec.line, "unknown keyword " + kw);
        if (kw == "ACTION" && rec.fields.size() == 2) {
            if (action_ids.count(rec.fields[1])) fail_at(rec.line, "duplicate action");
            action_ids[rec.fields[1]] = static_cast<int>(mdp.action_names.size());
            mdp.action_names.push_back(rec.fields[1]);
        } else if (kw == "STATE" && rec.fields.size() == 2) {
            if (state_ids.count(rec.fields[1])) fail_at(rec.line, "duplicate state");
            state_ids[rec.fields[1]] = static_cast<int>(mdp.state_names.size());
            mdp.state_names.push_back(rec.fields[1]);
        }
    }
    const int n = static_cast<int>(mdp.state_names.size());
    const int m = static_cast<int>(mdp.action_names.size());
    if (n == 0 || m == 0) throw std::invalid_argument("instance declares no states or actions");
    mdp.init.assign(n, 0.0);
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);
    mdp.sink = -1;

    auto state_of = [&](const Record& rec, const std::string& name) {
        auto it = state_ids.find(name);
        if (it == state_ids.end()) fail_at(rec.line, "undeclared state " + name);
        return it->second;
    };
    auto action_of = [&](const Record& rec, const std::string& name) {
        auto it = action_ids.find(name);
        if (it == action_ids.end()) fail_at(rec.line, "undeclared action " + name);
        return it->second;
    };

    std::set<int> targets, sensors;
    std::set<std::tuple<int, int, int>> seen_edges;
    std::vector<int> row_line(static_cast<std::size_t>(n) * m, 0);

    for (const auto& rec : records) {
        const auto& kw = rec.fields[0];
        auto need = [&](std::size_t k) {
            if (rec.fields.size() != k + 1)
                fail_at(rec.line, kw + " expects " + std::to_string(k) + " fields");
        };
        if (kw == "ACTION" || kw == "STATE") {
            need(1);
        } else if (kw == "GAMMA") {
            need(1);
            mdp.discount = parse_number(rec, rec.fields[1]);
            saw_gamma = true;
        } else if (kw == "SINK") {
            need(1);
            mdp.sink = state_of(rec, rec.fields[1]);
        } else if (kw == "INIT") {
            need(2);
            mdp.init[state_of(rec, rec.fields[1])] = parse_number(rec, rec.fields[2]);
        } else if (kw == "TRANS") {
            need(4);
            int s = state_of(rec, rec.fields[1]);
            int a = action_of(rec, rec.fields[2]);
            int t = state_of(rec, rec.fields[3]);
            double p = parse_number(rec, rec.fields[4]);
            if (!seen_edges.insert({s, a, t}).second)
                fail_at(rec.line, "duplicate transition " + rec.fields[1] + " " + rec.fields[2] +
                                      " " + rec.fields[3]);
            if (p < 0.0) fail_at(rec.line, "negative probability");
            mdp.row(s, a).push_back({t, p});
            if (row_line[mdp.sa_index(s, a)] == 0) row_line[mdp.sa_index(s, a)] = rec.line;
        } else if (kw == "TARGET") {
            need(3);
            int s = state_of(rec, rec.fields[1]);
            int a = action_of(rec, rec.fields[2]);
            mdp.reward2[mdp.sa_index(s, a)] = parse_number(rec, rec.fields[3]);
            targets.insert(s);
        } else if (kw == "SENSOR") {
            need(1);
            sensors.insert(state_of(rec, rec.fields[1]));
        } else if (kw == "DECOY") {
            need(1);
            domain.decoys.push_back(state_of(rec, rec.fields[1]));
        } else if (kw == "MODIFIABLE") {
            need(2);
            domain.modifiable.push_back(
                {state_of(rec, rec.fields[1]), action_of(rec, rec.fields[2])});
        } else if (kw == "BUDGET") {
            need(1);
            budget = parse_number(rec, rec.fields[1]);
            saw_budget = true;
        } else if (kw == "GRID" || kw == "ALPHA") {
            fail_at(rec.line, "grid shorthand mixed into an explicit instance");
        } else {
            fail_at(rec.line, "unknown keyword " + kw);
        }
    }
    if (mdp.sink < 0) throw std::invalid_argument("instance is missing a SINK record");
    if (!saw_budget) throw std::invalid_argument("instance is missing a BUDGET record");
    if (!saw_gamma) throw std::invalid_argument("instance is missing a GAMMA record");

    mdp.targets.assign(targets.begin(), targets.end());

    // Terminating states (sink, targets, sensors) route to the sink
    // implicitly; explicit rows there are contradictions.
    for (int s : targets)
        for (int a = 0; a < m; ++a)
            if (!mdp.row(s, a).empty())
                throw std::invalid_argument("target state " + mdp.state_names[s] +
                                            " has explicit transitions");
    for (int s : sensors) {
        if (targets.count(s))
            throw std::invalid_argument("state " + mdp.state_names[s] +
                                        " is both sensor and target");
        for (int a = 0; a < m; ++a)
            if (!mdp.row(s, a).empty())
                throw std::invalid_argument("sensor state " + mdp.state_names[s] +
                                            " has explicit transitions");
    }
    for (int a = 0; a < m; ++a)
        if (!mdp.row(mdp.sink, a).empty())
            throw std::invalid_argument("sink state has explicit transitions");
    for (int s : targets)
        for (int a = 0; a < m; ++a) mdp.row(s, a) = {{mdp.sink, 1.0}};
    for (int s : sensors)
        for (int a = 0; a < m; ++a) mdp.row(s, a) = {{mdp.sink, 1.0}};
    for (int a = 0; a < m; ++a) mdp.row(mdp.sink, a) = {{mdp.sink, 1.0}};

    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < m; ++a) {
            double sum = 0.0;
            for (const auto& e : mdp.row(s, a)) sum += e.prob;
            if (std::abs(sum - 1.0) > kProbTol) {
                int line = row_line[mdp.sa_index(s, a)];
                if (line > 0)
                    fail_at(line, "transitions from " + mdp.state_names[s] + " under " +
                                      mdp.action_names[a] + " sum to " + format_double(sum));
                throw std::invalid_argument("state " + mdp.state_names[s] +
                                            " has no transitions under action " +
                                            mdp.action_names[a]);
            }
        }
    }

    std::sort(domain.decoys.begin(), domain.decoys.end());
    std::sort(domain.modifiable.begin(), domain.modifiable.end());
    for (int d : domain.decoys) {
        if (targets.count(d))
            throw std::invalid_argument("state " + mdp.state_names[d] +
                                        " is both decoy and target");
        if (d == mdp.sink)
            throw std::invalid_argument("the sink cannot be a decoy");
    }
    for (auto [s, a] : domain.modifiable)
        if (targets.count(s) || std::binary_search(domain.decoys.begin(), domain.decoys.end(), s))
            throw std::invalid_argument("modifiable state " + mdp.state_names[s] +
                                        " overlaps a target or decoy");
    Instance inst{std::move(mdp), std::move(domain), budget};
    return inst;
}

} // namespace

Instance parse_instance(const std::string& text) {
    std::vector<Record> records = tokenize(text);
    if (records.empty()) throw std::invalid_argument("empty instance");
    bool grid = std::any_of(records.begin(), records.end(),
                            [](const Record& r) { return r.fields[0] == "GRID"; });
    return grid ? parse_grid_records(records) : parse_explicit_records(records);
}

std::string serialize_instance(const Instance& instance) {
    const Mdp& mdp = instance.mdp;
    std::ostringstream out;
    out << "GAMMA " << format_double(mdp.discount) << "\n";
    for (const auto& a : mdp.action_names) out << "ACTION " << a << "\n";
    for (const auto& s : mdp.state_names) out << "STATE " << s << "\n";
    out << "SINK " << mdp.state_names[mdp.sink] << "\n";
    for (int s = 0; s < mdp.num_states(); ++s)
        if (mdp.init[s] != 0.0)
            out << "INIT " << mdp.state_names[s] << " " << format_double(mdp.init[s]) << "\n";
    for (int s = 0; s < mdp.num_states(); ++s) {
        if (s == mdp.sink || mdp.is_target(s)) continue;
        for (int a = 0; a < mdp.num_actions(); ++a) {
            ProbRow row = mdp.row(s, a);
            std::sort(row.begin(), row.end(),
                      [](const ProbEntry& l, const ProbEntry& r) { return l.state < r.state; });
            for (const auto& e : row)
                out << "TRANS " << mdp.state_names[s] << " " << mdp.action_names[a] << " "
                    << mdp.state_names[e.state] << " " << format_double(e.prob) << "\n";
        }
    }
    for (int s : mdp.targets)
        for (int a = 0; a < mdp.num_actions(); ++a)
            out << "TARGET " << mdp.state_names[s] << " " << mdp.action_names[a] << " "
                << format_double(mdp.reward2[mdp.sa_index(s, a)]) << "\n";
    for (int d : instance.domain.decoys) out << "DECOY " << mdp.state_names[d] << "\n";
    for (auto [s, a] : instance.domain.modifiable)
        out << "MODIFIABLE " << mdp.state_names[s] << " " << mdp.action_names[a] << "\n";
    out << "BUDGET " << format_double(instance.budget) << "\n";
    return out.str();
}

std::string serialize_grid(const GridSpec& spec) {
    std::ostringstream out;
    out << "GRID " << spec.rows << " " << spec.cols << "\n";
    out << "ALPHA " << format_double(spec.alpha) << "\n";
    out << "GAMMA " << format_double(spec.discount) << "\n";
    out << "INIT " << cell_name(spec.init) << " 1\n";
    auto targets = spec.targets;
    std::sort(targets.begin(), targets.end());
    const char* action_names[4] = {"N", "S", "E", "W"};
    for (auto& [c, r] : targets)
        for (int a = 0; a < 4; ++a)
            out << "TARGET " << cell_name(c) << " " << action_names[a] << " " << format_double(r)
                << "\n";
    auto sensors = spec.sensors;
    std::sort(sensors.begin(), sensors.end());
    for (auto c : sensors) out << "SENSOR " << cell_name(c) << "\n";
    auto decoys = spec.decoys;
    std::sort(decoys.begin(), decoys.end());
    for (auto c : decoys) out << "DECOY " << cell_name(c) << "\n";
    auto modifiable = spec.modifiable;
    std::sort(modifiable.begin(), modifiable.end());
    for (auto& [c, a] : modifiable)
        out << "MODIFIABLE " << cell_name(c) << " " << action_names[a] << "\n";
    out << "BUDGET " << format_double(spec.budget) << "\n";
    return out.str();
}

Instance fig1_analog() {
    Mdp mdp;
    mdp.action_names = {"a", "b", "c", "d"};
    for (int s = 0; s <= 13; ++s) mdp.state_names.push_back(std::to_string(s));
    mdp.state_names.push_back("sink");
    const int n = 15, m = 4;
    mdp.sink = 14;
    mdp.discount = 0.95;
    mdp.init.assign(n, 0.0);
    mdp.init[0] = 1.0;
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);
    mdp.targets = {10};

    // Successor lists in figure order, preferred (thick) edge first. Action k
    // shifts the preferred successor by k positions; the preferred successor
    // takes probability 0.7 and the rest split 0.3 evenly. States 5 and 8 are
    // dead ends in the figure and terminate like sensors.
    const std::vector<std::vector<int>> successors = {
        {1, 2, 3, 4}, // 0
        {5, 8, 6},    // 1
        {6, 7},       // 2
        {5, 7},       // 3
        {5, 7},       // 4
        {},           // 5
        {9, 10},      // 6
        {9, 8},       // 7
        {},           // 8
        {11, 13},     // 9
        {},           // 10 (target)
        {12, 13},     // 11
        {11, 13},     // 12
        {12, 11},     // 13
    };
    for (int s = 0; s <= 13; ++s) {
        const auto& succ = successors[s];
        if (s == 10 || succ.empty()) {
            for (int a = 0; a < m; ++a) mdp.row(s, a) = {{mdp.sink, 1.0}};
            continue;
        }
        const int deg = static_cast<int>(succ.size());
        for (int a = 0; a < m; ++a) {
            ProbRow& row = mdp.row(s, a);
            if (deg == 1) {
                row = {{succ[0], 1.0}};
                continue;
            }
            const int preferred = a % deg;
            const double rest = 3.0 / (10.0 * (deg - 1));
            for (int i = 0; i < deg; ++i) row.push_back({succ[i], i == preferred ? 0.7 : rest});
        }
    }
    for (int a = 0; a < m; ++a) {
        mdp.row(14, a) = {{14, 1.0}};
        mdp.reward2[mdp.sa_index(10, a)] = 1.0;
    }

    Instance inst;
    inst.mdp = std::move(mdp);
    inst.domain.decoys = {11, 13};
    for (int a = 0; a < m; ++a) inst.domain.modifiable.push_back({6, a});
    inst.budget = 3.0;
    return inst;
}

Instance only_path_instance() {
    Mdp mdp;
    mdp.action_names = {"go", "stay"};
    mdp.state_names = {"s0", "s1", "d", "s2", "f", "sink"};
    const int n = 6, m = 2;
    mdp.sink = 5;
    mdp.discount = 0.95;
    mdp.init.assign(n, 0.0);
    mdp.init[0] = 1.0;
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);
    mdp.targets = {4};

    for (int s = 0; s < 4; ++s) {
        mdp.row(s, 0) = {{s + 1, 1.0}};
        mdp.row(s, 1) = {{s, 1.0}};
    }
    for (int a = 0; a < m; ++a) {
        mdp.row(4, a) = {{mdp.sink, 1.0}};
        mdp.row(5, a) = {{mdp.sink, 1.0}};
        mdp.reward2[mdp.sa_index(4, a)] = 1.0;
    }

    Instance inst;
    inst.mdp = std::move(mdp);
    inst.domain.decoys = {2};
    inst.budget = 2.0;
    return inst;
}

Instance random_attack_graph(int n_states, int n_actions, int branching, std::uint64_t seed,
                             int decoy_count, int target_count) {
    if (n_states < 4) throw std::invalid_argument("need at least 4 states");
    if (n_actions < 1 || branching < 1) throw std::invalid_argument("bad generator parameters");
    if (decoy_count < 0 || target_count < 1)
        throw std::invalid_argument("need at least one target");
    if (1 + decoy_count + target_count + 1 > n_states)
        throw std::invalid_argument("decoys and targets do not fit the state count");

    Rng rng(seed);
    const int n = n_states;
    const int m = n_actions;
    const int sink = n - 1;

    // Special roles drawn among states 1 .. n-2 (0 is the initial state).
    std::vector<int> pool;
    for (int s = 1; s < sink; ++s) pool.push_back(s);
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.next_below(i)]);
    std::vector<int> targets(pool.begin(), pool.begin() + target_count);
    std::vector<int> decoys(pool.begin() + target_count, pool.begin() + target_count + decoy_count);
    std::sort(targets.begin(), targets.end());
    std::sort(decoys.begin(), decoys.end());

    Mdp mdp;
    for (int s = 0; s < sink; ++s) mdp.state_names.push_back("s" + std::to_string(s));
    mdp.state_names.push_back("sink");
    for (int a = 0; a < m; ++a) mdp.action_names.push_back("a" + std::to_string(a));
    mdp.sink = sink;
    mdp.discount = 0.95;
    mdp.init.assign(n, 0.0);
    mdp.init[0] = 1.0;
    mdp.trans.resize(static_cast<std::size_t>(n) * m);
    mdp.reward2.assign(static_cast<std::size_t>(n) * m, 0.0);
    mdp.targets = targets;

    auto fill_row = [&](ProbRow& row, const std::vector<int>& succ) {
        std::vector<double> w(succ.size());
        double total = 0.0;
        for (auto& v : w) {
            v = 0.1 + 0.9 * rng.next_double();
            total += v;
        }
        row.clear();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < succ.size(); ++i) {
            double p = w[i] / total;
            row.push_back({succ[i], p});
            acc += p;
        }
        row.push_back({succ.back(), 1.0 - acc});
    };

    for (int s = 0; s < n; ++s) {
        const bool terminal = s == sink || mdp.is_target(s);
        for (int a = 0; a < m; ++a) {
            if (terminal) {
                mdp.row(s, a) = {{sink, 1.0}};
                continue;
            }
            std::vector<int> succ;
            int want = std::min(branching, n - 1);
            while (static_cast<int>(succ.size()) < want) {
                int cand = static_cast<int>(rng.next_below(n - 1)); // anything but the sink
                if (cand == s) continue;
                if (std::find(succ.begin(), succ.end(), cand) == succ.end()) succ.push_back(cand);
            }
            std::sort(succ.begin(), succ.end());
            fill_row(mdp.row(s, a), succ);
        }
    }
    for (int t : targets)
        for (int a = 0; a < m; ++a) mdp.reward2[mdp.sa_index(t, a)] = 0.5 + rng.next_double();

    // Ensure every target is reachable from the initial state: splice an edge
    // from a reached state toward any stranded target.
    auto reached_set = [&]() {
        std::vector<char> reached(n, 0);
        std::vector<int> stack = {0};
        reached[0] = 1;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int a = 0; a < m; ++a)
                for (const auto& e : mdp.row(s, a))
                    if (!reached[e.state]) {
                        reached[e.state] = 1;
                        stack.push_back(e.state);
                    }
        }
        return reached;
    };
    for (int guard = 0; guard < n + 1; ++guard) {
        std::vector<char> reached = reached_set();
        int stranded = -1;
        for (int t : targets)
            if (!reached[t]) stranded = t;
        for (int d : decoys)
            if (!reached[d]) stranded = d;
        if (stranded < 0) break;
        std::vector<int> sources;
        for (int s = 0; s < sink; ++s)
            if (reached[s] && !mdp.is_target(s)) sources.push_back(s);
        int src = sources[rng.next_below(sources.size())];
        int act = static_cast<int>(rng.next_below(m));
        ProbRow& row = mdp.row(src, act);
        for (auto& e : row) e.prob *= 0.5;
        row.push_back({stranded, 0.5});
    }

    DefenseDomain domain;
    domain.decoys = decoys;
    std::set<std::pair<int, int>> mods;
    const int mod_count = std::max(1, n / 3);
    int attempts = 0;
    while (static_cast<int>(mods.size()) < mod_count && attempts++ < 200) {
        int s = static_cast<int>(rng.next_below(sink));
        if (mdp.is_target(s) || std::binary_search(decoys.begin(), decoys.end(), s)) continue;
        mods.insert({s, static_cast<int>(rng.next_below(m))});
    }
    domain.modifiable.assign(mods.begin(), mods.end());

    Instance inst{std::move(mdp), std::move(domain), 1.5 * std::max(1, decoy_count) + 0.5};
    ValidationReport report = validate(inst.mdp);
    if (!report.ok())
        throw std::logic_error("generator produced an invalid model: " + report.violations[0]);
    return inst;
}

GridSpec canonical_grid_spec(int size) {
    if (size < 4) throw std::invalid_argument("canonical layouts start at 4x4");
    GridSpec spec;
    spec.rows = spec.cols = size;
    spec.alpha = 0.1;
    spec.discount = 0.95;
    spec.budget = 4.0;
    if (size == 6) {
        // Decoys sit two rows off the attacker's best corridor (row 3), so
        // accidental decoy hits are rare until resources make them tempting.
        spec.init = {2, 0};
        spec.targets = {{{3, 5}, 1.0}};
        spec.decoys = {{1, 4}, {4, 5}};
        spec.sensors = {{0, 1}, {5, 1}};
        spec.modifiable = {{{4, 0}, kNorth}, {{4, 1}, kNorth}, {{4, 2}, kNorth},
                           {{4, 4}, kNorth}, {{4, 4}, kSouth}, {{4, 4}, kEast},
                           {{4, 4}, kWest}};
        return spec;
    }
    if (size == 10) {
        spec.init = {5, 1};
        spec.targets = {{{4, 9}, 1.0}};
        spec.decoys = {{2, 8}, {6, 8}};
        spec.sensors = {{0, 0}, {9, 9}, {7, 3}, {0, 5}};
        return spec;
    }
    spec.init = {size / 2, 0};
    spec.targets = {{{size / 2, size - 1}, 1.0}};
    spec.decoys = {{1, size - 2}, {size - 2, size - 2}};
    spec.sensors = {{0, 0}, {size - 1, 0}};
    return spec;
}

GridSpec grid6_alt_spec() {
    GridSpec spec = canonical_grid_spec(6);
    spec.decoys = {{0, 2}, {5, 3}};
    return spec;
}

} // namespace decoy
