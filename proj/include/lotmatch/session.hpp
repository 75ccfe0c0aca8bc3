#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lotmatch/config.hpp"
#include "lotmatch/log.hpp"
#include "lotmatch/rng.hpp"
#include "lotmatch/stats.hpp"
#include "lotmatch/strategy.hpp"

namespace lotmatch {

/// One group-round world: everything drawn before decisions are made.
struct World {
    std::vector<int> type_indices;               // into market.types; empty for draw-based
    std::vector<std::vector<int>> utilities;     // per student
    std::vector<std::string> type_labels;        // "v", "v'", or "rand"
    Lottery lottery;
};

/// Draws the (types, lottery) world for one group-round. The substream depends only
/// on (seed, round, group), so every session and every treatment sharing the seed
/// faces the identical sequence of worlds; treatments differ only in what students
/// observe and decide.
inline World draw_world(const Market& market, std::uint64_t seed, int round, int group) {
    SubstreamRng rng(seed, world_stream(round, group));
    World w;
    w.utilities.resize(market.n);
    w.type_labels.resize(market.n);
    if (!market.types.empty()) {
        const detail::TypeSampler sample_type(market);
        w.type_indices.resize(market.n);
        for (int i = 0; i < market.n; ++i) {
            int t = sample_type(rng);
            w.type_indices[i] = t;
            w.utilities[i] = market.types[t].utilities;
            w.type_labels[i] = market.types[t].label;
        }
    } else {
        for (int i = 0; i < market.n; ++i) {
            for (auto [lo, hi] : market.utility_ranges)
                w.utilities[i].push_back(rng.int_in(lo, hi));
            w.type_labels[i] = "rand";
        }
    }
    w.lottery = rng.lottery(market.n);
    return w;
}

/// Decision rules available to the generator besides the treatment equilibrium
/// tables. They exist to produce synthetic logs with recognizable patterns, not to
/// model behavior: `naive-best` always lists the top schools, `neighborhood-first`
/// leads with the home school, `quartile` targets the school whose seat block covers
/// the student's disclosed rank (falling back to neighborhood-first under Cover).
inline StrategyProfile heuristic_profile(const std::string& name, const Market& market,
                                         Policy policy) {
    StrategyProfile profile;
    profile.policy = policy;
    const int m = market.schools();
    const int limit = market.rol_limit;

    // Pads a singleton with the adjacent school when two entries are allowed.
    auto pad = [m, limit](Rol rol) {
        if (limit >= 2 && m >= 2) rol.push_back(rol[0] + 1 < m ? rol[0] + 1 : rol[0] - 1);
        return rol;
    };
    auto home_or_best = [pad](const InfoSet& info) {
        return pad(Rol{info.own_role == kNoSchool ? 0 : info.own_role});
    };

    if (name == "naive-best") {
        profile.act = [m, limit](int, const InfoSet&) {
            Rol rol;
            for (int s = 0; s < m && s < limit; ++s) rol.push_back(s);
            return rol;
        };
    } else if (name == "neighborhood-first") {
        profile.act = [home_or_best](int, const InfoSet& info) { return home_or_best(info); };
    } else if (name == "quartile") {
        const int block = std::max(1, market.n / m);
        profile.act = [m, block, pad, home_or_best](int, const InfoSet& info) {
            if (!info.own_rank) return home_or_best(info);  // Cover: no rank to act on
            return pad(Rol{std::min((*info.own_rank - 1) / block, m - 1)});
        };
    } else {
        throw std::invalid_argument("unknown strategy '" + name + "'");
    }
    return profile;
}

/// Synthetic session generation following the experiment protocol: worlds are drawn
/// once per (round, group) and applied to every session; with a strategy the rows
/// carry submitted lists and realized outcomes, without one they form a world log.
inline DecisionLog generate_sessions(const SessionConfig& cfg) {
    cfg.validate();
    Market market = session_market(cfg);
    if (market.n != cfg.group_size)
        throw std::invalid_argument("group size must equal the market's student count");
    Policy policy = session_policy(cfg);

    const bool play = cfg.strategy != "none";
    StrategyProfile profile;
    if (play) {
        if (cfg.strategy == "equilibrium") {
            if (cfg.robustness)
                throw std::invalid_argument(
                    "no equilibrium table for the robustness environment; pick a heuristic");
            profile = equilibrium_table(*cfg.treatment);
        } else {
            profile = heuristic_profile(cfg.strategy, market, policy);
        }
    }

    DecisionLog log;
    log.schools = market.schools();
    log.has_outcomes = play;
    const int groups = cfg.participants / cfg.group_size;
    for (int session = 1; session <= cfg.sessions; ++session) {
        for (int round = 1; round <= cfg.rounds; ++round) {
            for (int group = 1; group <= groups; ++group) {
                World w = draw_world(market, cfg.seed, round, group);
                std::vector<Rol> rols(market.n);
                Matching matching;
                if (play) {
                    for (int i = 0; i < market.n; ++i)
                        rols[i] = profile.act(
                            i, observe(policy, market, w.lottery, i, w.utilities[i]));
                    matching = run_da(market, rols, w.lottery);
                }
                for (int i = 0; i < market.n; ++i) {
                    DecisionRow r;
                    r.session = session;
                    r.round = round;
                    r.group = group;
                    r.student_id = i + 1;
                    r.neighborhood_school = market.neighborhood[i];
                    r.type_label = w.type_labels[i];
                    r.utilities = w.utilities[i];
                    r.lottery_rank = w.lottery[i];
                    if (play) {
                        r.rol = rols[i];
                        int a = matching.assigned[i];
                        r.assigned = a;
                        r.payoff = a == kUnmatched ? 0 : w.utilities[i][a];
                    }
                    log.rows.push_back(std::move(r));
                }
            }
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// Replay: rebuild each group-round from the log and recompute the matching.

struct ReplayResult {
    int groups_replayed = 0;
    std::vector<std::string> disagreements;  // rows whose recorded outcome differs
    OutcomeStats realized;                   // frequencies over replayed rows

    bool clean() const { return disagreements.empty(); }
};

namespace detail {

struct GroupKey {
    int session, round, group;
    auto operator<=>(const GroupKey&) const = default;
};

}  // namespace detail

/// Re-runs the mechanism for every group-round in the log. Schema violations
/// (wrong group size, lottery collisions, bad lists, unknown types) throw with the
/// offending row numbers; recorded assignments/payoffs that fail to reproduce are
/// returned as disagreement flags. Realized match rates and mean payoffs are
/// tallied per role and type alongside.
inline ReplayResult replay(const Market& market, const DecisionLog& log) {
    market.validate();
    if (log.schools != market.schools())
        throw std::invalid_argument("log school count does not match the market");

    std::map<detail::GroupKey, std::vector<int>> groups;  // row indices per group-round
    for (std::size_t r = 0; r < log.rows.size(); ++r)
        groups[{log.rows[r].session, log.rows[r].round, log.rows[r].group}].push_back(
            static_cast<int>(r));

    ReplayResult result;
    const int m = market.schools();
    // Tallies per (role, type index; -1 when the market has no finite type list).
    std::map<std::pair<int, int>, std::vector<long long>> counts;
    std::map<std::pair<int, int>, long long> pay;
    auto row_no = [](int idx) { return std::to_string(idx + 2); };  // 1 header + 1-based

    for (const auto& [key, rows] : groups) {
        if (static_cast<int>(rows.size()) != market.n)
            throw std::invalid_argument("group at row " + row_no(rows.front()) + " has " +
                                        std::to_string(rows.size()) + " rows, expected " +
                                        std::to_string(market.n));
        Lottery lottery(market.n, 0);
        std::vector<Rol> rols(market.n);
        std::vector<int> type_of(market.n, -1);
        for (int idx : rows) {
            const DecisionRow& row = log.rows[idx];
            int i = row.student_id - 1;
            if (i < 0 || i >= market.n)
                throw std::invalid_argument("row " + row_no(idx) + ": student id out of range");
            if (lottery[i] != 0)
                throw std::invalid_argument("row " + row_no(idx) + ": duplicate student id");
            if (row.neighborhood_school != market.neighborhood[i])
                throw std::invalid_argument("row " + row_no(idx) +
                                            ": neighborhood does not match the market");
            if (row.lottery_rank < 1 || row.lottery_rank > market.n)
                throw std::invalid_argument("row " + row_no(idx) + ": lottery rank out of range");
            lottery[i] = row.lottery_rank;
            if (!market.types.empty()) {
                type_of[i] = market.type_index_of(row.utilities);
                if (type_of[i] < 0)
                    throw std::invalid_argument("row " + row_no(idx) +
                                                ": utilities match no market type");
            } else {
                for (int s = 0; s < m; ++s)
                    if (row.utilities[s] < market.utility_ranges[s].first ||
                        row.utilities[s] > market.utility_ranges[s].second)
                        throw std::invalid_argument("row " + row_no(idx) +
                                                    ": utilities outside the draw ranges");
            }
            try {
                validate_rol(market, row.rol, market.rol_limit);
            } catch (const std::exception& e) {
                throw std::invalid_argument("row " + row_no(idx) + ": " + e.what());
            }
            rols[i] = row.rol;
        }
        try {
            validate_lottery(market, lottery);
        } catch (const std::exception& e) {
            throw std::invalid_argument("group at row " + row_no(rows.front()) + ": " + e.what());
        }

        Matching matching = run_da(market, rols, lottery);
        ++result.groups_replayed;
        for (int idx : rows) {
            const DecisionRow& row = log.rows[idx];
            int i = row.student_id - 1;
            int got = matching.assigned[i];
            int expect_pay = got == kUnmatched ? 0 : row.utilities[got];
            if (row.assigned && *row.assigned != got)
                result.disagreements.push_back(
                    "row " + row_no(idx) + ": recorded assignment " +
                    (*row.assigned == kUnmatched ? std::string("-") : school_label(*row.assigned)) +
                    ", replay gives " +
                    (got == kUnmatched ? std::string("-") : school_label(got)));
            if (row.payoff && *row.payoff != expect_pay)
                result.disagreements.push_back("row " + row_no(idx) + ": recorded payoff " +
                                               std::to_string(*row.payoff) + ", replay gives " +
                                               std::to_string(expect_pay));
            auto key2 = std::make_pair(market.neighborhood[i], type_of[i]);
            auto& c = counts[key2];
            if (c.empty()) c.assign(m + 1, 0);
            ++c[got == kUnmatched ? m : got];
            pay[key2] += expect_pay;
        }
    }

    // Fold the integer tallies into frequency cells.
    auto cell_from = [m](const std::vector<long long>& c, long long pay_sum) {
        GroupOutcome cell;
        long long n = 0;
        for (long long v : c) n += v;
        cell.observations = n;
        cell.assignment.assign(m + 1, Rational(0));
        cell.match_rate = 0;
        cell.expected_payoff = 0;
        if (n == 0) return cell;
        for (int o = 0; o <= m; ++o) cell.assignment[o] = Rational(c[o], n);
        cell.match_rate = 1 - cell.assignment[m];
        cell.expected_payoff = Rational(pay_sum, n);
        return cell;
    };
    std::vector<long long> all(m + 1, 0);
    long long all_pay = 0;
    std::map<int, std::vector<long long>> role_counts;
    std::map<int, long long> role_pay;
    std::map<int, std::vector<long long>> type_counts;
    std::map<int, long long> type_pay;
    for (const auto& [key2, c] : counts) {
        result.realized.by_role_type[key2] = cell_from(c, pay[key2]);
        auto& rc = role_counts[key2.first];
        if (rc.empty()) rc.assign(m + 1, 0);
        auto& tc = type_counts[key2.second];
        if (tc.empty()) tc.assign(m + 1, 0);
        for (int o = 0; o <= m; ++o) {
            rc[o] += c[o];
            tc[o] += c[o];
            all[o] += c[o];
        }
        role_pay[key2.first] += pay[key2];
        type_pay[key2.second] += pay[key2];
        all_pay += pay[key2];
    }
    for (const auto& [role, c] : role_counts)
        result.realized.by_role[role] = cell_from(c, role_pay[role]);
    for (const auto& [t, c] : type_counts)
        result.realized.by_type[t] = cell_from(c, type_pay[t]);
    result.realized.aggregate = cell_from(all, all_pay);
    return result;
}

}  // namespace lotmatch
