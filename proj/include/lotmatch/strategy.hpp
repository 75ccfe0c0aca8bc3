#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lotmatch/info.hpp"
#include "lotmatch/market.hpp"
#include "lotmatch/rational.hpp"

namespace lotmatch {

/// A decision rule: the list a student submits given what they observe. Profiles used
/// here are symmetric in roles, so the rule reads everything it needs from the InfoSet;
/// the student index is carried for profiles that want per-identity behavior.
struct StrategyProfile {
    Policy policy = Policy::Cover;
    std::function<Rol(int student, const InfoSet& info)> act;

    Rol operator()(int student, const InfoSet& info) const { return act(student, info); }
};

/// Submitted lists for one fully drawn world: every student acts on their own InfoSet.
inline std::vector<Rol> play_profile(const Market& market, const StrategyProfile& profile,
                                     const std::vector<int>& type_indices,
                                     const Lottery& lottery) {
    std::vector<Rol> rols(market.n);
    for (int i = 0; i < market.n; ++i) {
        const auto& type = market.types.at(type_indices[i]).utilities;
        rols[i] = profile.act(i, observe(profile.policy, market, lottery, i, type));
    }
    return rols;
}

/// The school a student is sure to get by ranking it first when everyone plays the
/// rank-block rule: rank r falls in school k's block when r <= q_1 + ... + q_k.
/// Only defined for markets without neighborhood priorities.
inline int rank_block_school(const Market& market, int own_rank) {
    if (market.has_neighborhoods())
        throw std::invalid_argument("rank-block rule requires a market without neighborhoods");
    if (market.total_capacity() != market.n)
        throw std::invalid_argument("rank-block rule requires total capacity == n");
    if (own_rank < 1 || own_rank > market.n) throw std::invalid_argument("rank out of 1..n");
    int cum = 0;
    for (int s = 0; s < market.schools(); ++s) {
        cum += market.capacity[s];
        if (own_rank <= cum) return s;
    }
    throw std::logic_error("unreachable: capacities cover all ranks");
}

/// School admission thresholds for one drawn lottery: a non-neighborhood applicant
/// with rank in (ranks[k-1], ranks[k]] is sure of school k. Strictly increasing,
/// last entry equals n.
struct Cutoffs {
    std::vector<int> ranks;
};

/// Solves the per-school threshold equations by scanning ranks upward. Each
/// equation's left side moves by 0 or 1 per rank step, so the first rank that
/// balances seats is the unique solution.
///
/// For school 0:      x + n_0 - c_0(x) = q_0
/// for 0 < k < m-1:   (x - x_{k-1}) - sum_{y<k} [c_y(x) - c_y(x_{k-1})] + n_k - c_k(x) = q_k
/// and x_{m-1} = n,   where c_s(x) counts school-s neighbors with rank <= x.
inline Cutoffs solve_cutoffs_revealmore(const Market& market, const Lottery& lottery) {
    validate_lottery(market, lottery);
    const int m = market.schools();
    if (market.total_capacity() != market.n)
        throw std::invalid_argument("cutoffs require total capacity == n");

    // cum[s][x] = number of school-s neighbors with rank <= x (cum[s][0] = 0).
    std::vector<std::vector<int>> cum(m, std::vector<int>(market.n + 1, 0));
    for (int s = 0; s < m; ++s)
        for (int x = 1; x <= market.n; ++x) {
            int c = 0;
            for (int i = 0; i < market.n; ++i)
                if (market.neighborhood[i] == s && lottery[i] <= x) ++c;
            cum[s][x] = c;
        }

    Cutoffs cutoffs;
    cutoffs.ranks.resize(m);
    int prev = 0;
    for (int k = 0; k < m - 1; ++k) {
        int ns = market.neighborhood_size(k);
        bool found = false;
        for (int x = prev + 1; x <= market.n; ++x) {
            int crowded_out = 0;  // better-school neighbors holding ranks in (prev, x]
            for (int y = 0; y < k; ++y) crowded_out += cum[y][x] - cum[y][prev];
            int lhs = (x - prev) - crowded_out + (ns - cum[k][x]);
            if (lhs == market.capacity[k]) {
                cutoffs.ranks[k] = x;
                found = true;
                break;
            }
        }
        if (!found)
            throw std::logic_error("no cutoff solution for school " + std::to_string(k) +
                                   "; market violates the neighborhood invariants");
        prev = cutoffs.ranks[k];
    }
    cutoffs.ranks[m - 1] = market.n;
    return cutoffs;
}

/// The school a student can be sure of under the given cutoffs: the band their rank
/// falls in, improved to their own neighborhood school when their rank overshoots it.
inline int achievable_school(const Market& market, const Lottery& lottery,
                             const Cutoffs& cutoffs, int student) {
    if (student < 0 || student >= market.n)
        throw std::invalid_argument("student index out of range");
    int rank = lottery[student];
    int home = market.neighborhood[student];
    if (rank <= cutoffs.ranks[0] || home == 0) return 0;
    for (int k = 1; k < market.schools(); ++k) {
        if (rank <= cutoffs.ranks[k]) return k;
        if (home == k) return k;  // rank beyond the cutoff, but neighborhood admits anyway
    }
    throw std::logic_error("final cutoff must equal n");
}

/// Large-market limit of the cutoffs: with capacity and neighborhood masses
/// (q_k), (n_k) on a unit student continuum, the k-th cutoff fraction is
/// (sum_{y<=k} q_y - sum_{y<=k} n_y) / (1 - sum_{y<=k} n_y).
inline std::vector<Rational> continuum_cutoffs(const std::vector<Rational>& capacities,
                                               const std::vector<Rational>& neighborhood_masses) {
    if (capacities.size() != neighborhood_masses.size())
        throw std::invalid_argument("need one neighborhood mass per school");
    Rational total = 0;
    for (const auto& q : capacities) total += q;
    if (total != 1) throw std::invalid_argument("capacity masses must sum to 1");
    for (std::size_t k = 0; k < capacities.size(); ++k) {
        const auto& ns = neighborhood_masses[k];
        if (ns < 0 || ns >= capacities[k])
            throw std::invalid_argument("neighborhood masses must lie in [0, q_k)");
    }
    std::vector<Rational> out(capacities.size());
    Rational cq = 0, cn = 0;
    for (std::size_t k = 0; k < capacities.size(); ++k) {
        cq += capacities[k];
        cn += neighborhood_masses[k];
        out[k] = (cq - cn) / (1 - cn);
    }
    return out;
}

/// The profile in which every student ranks their achievable school first. The
/// disclosed cumulative tables pin down each neighborhood's rank set, and cutoffs
/// depend only on those sets, so any consistent completion of the lottery gives the
/// same answer.
inline StrategyProfile cutoff_profile(const Market& market) {
    market.validate_for_equilibrium();
    StrategyProfile profile;
    profile.policy = Policy::RevealMore;
    profile.act = [market](int /*student*/, const InfoSet& info) -> Rol {
        if (!info.own_rank || !info.neighborhood_stats)
            throw std::invalid_argument("cutoff play needs full lottery disclosure");
        const auto& stats = *info.neighborhood_stats;
        const int n = market.n;
        const int my_rank = *info.own_rank;
        std::vector<char> taken(n + 1, 0);
        std::vector<std::vector<int>> pinned(market.schools());
        for (int s = 0; s < market.schools(); ++s) {
            if (stats[s].empty()) continue;
            for (int x = 1; x <= n; ++x) {
                int fresh = stats[s][x - 1] - (x > 1 ? stats[s][x - 2] : 0);
                if (fresh == 1) {
                    pinned[s].push_back(x);
                    taken[x] = 1;
                } else if (fresh != 0) {
                    throw std::invalid_argument("malformed cumulative rank table");
                }
            }
        }
        if (info.own_role != kNoSchool) {
            auto& mine = pinned[info.own_role];
            auto it = std::find(mine.begin(), mine.end(), my_rank);
            if (it == mine.end())
                throw std::invalid_argument("own rank inconsistent with disclosed tables");
            mine.erase(it);
        } else if (taken[my_rank]) {
            throw std::invalid_argument("own rank inconsistent with disclosed tables");
        }
        std::vector<int> spare;
        for (int x = 1; x <= n; ++x)
            if (!taken[x] && x != my_rank) spare.push_back(x);
        Lottery lottery(n, 0);
        std::vector<std::size_t> used(market.schools(), 0);
        std::size_t spare_at = 0;
        int me = -1;
        for (int i = 0; i < n; ++i) {
            int home = market.neighborhood[i];
            if (me < 0 && home == info.own_role) {
                lottery[i] = my_rank;
                me = i;
            } else if (home != kNoSchool) {
                lottery[i] = pinned[home].at(used[home]++);
            } else {
                lottery[i] = spare.at(spare_at++);
            }
        }
        auto cutoffs = solve_cutoffs_revealmore(market, lottery);
        return {achievable_school(market, lottery, cutoffs, me)};
    };
    return profile;
}

/// Sufficient condition for a neighborhood student to report their home school under
/// Cover when z_u students without neighborhoods target each better school s_u:
/// v_home > (q_u - n_u)/z_u * v_u must hold for every better school u.
inline bool stay_home_condition(const Market& market, const std::vector<int>& z, int student,
                                const std::vector<int>& utilities) {
    int home = market.neighborhood.at(student);
    if (home == kNoSchool)
        throw std::invalid_argument("stay-home condition applies to neighborhood students");
    for (int u = 0; u < home; ++u) {
        int open = market.capacity[u] - market.neighborhood_size(u);
        if (z.at(u) <= open)
            throw std::invalid_argument("condition assumes each better school is over-demanded");
        if (!(Rational(utilities.at(home)) > Rational(open, z[u]) * utilities.at(u)))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Closed-form equilibrium play for the five treatments.

namespace detail {

inline bool is_type(const Market& market, const InfoSet& info, const char* label) {
    int t = market.type_index_of(info.own_utilities);
    if (t < 0) throw std::invalid_argument("utilities do not match any market type");
    return market.types[t].label == label;
}

}  // namespace detail

/// The treatment's equilibrium decision table. Reveal/RevealMore tables depend only
/// on roles and disclosed ranks; Cover tables depend on role and own type.
inline StrategyProfile equilibrium_table(Treatment treatment) {
    Market market = treatment_market(treatment);
    StrategyProfile profile;
    profile.policy = treatment_policy(treatment);

    switch (treatment) {
        case Treatment::NoNS_Cover:
            profile.act = [market](int, const InfoSet& info) -> Rol {
                return detail::is_type(market, info, "v") ? Rol{0} : Rol{1};
            };
            break;

        case Treatment::NoNS_Reveal:
            profile.act = [market](int, const InfoSet& info) -> Rol {
                return {rank_block_school(market, info.own_rank.value())};
            };
            break;

        case Treatment::NS_Cover:
            profile.act = [market](int, const InfoSet& info) -> Rol {
                if (info.own_role == 0) return {0};
                if (info.own_role == 1) return {1};
                return detail::is_type(market, info, "v") ? Rol{0} : Rol{1};
            };
            break;

        case Treatment::NS_Reveal:
            profile.act = [](int, const InfoSet& info) -> Rol {
                int rank = info.own_rank.value();
                switch (info.own_role) {
                    case 0: return {0};
                    case 1: return rank == 1 ? Rol{0} : Rol{1};
                    case 2:
                        if (rank == 1) return {0};
                        if (rank <= 3) return {1};
                        return {2};
                    default:
                        if (rank == 1) return {0};
                        if (rank <= 3) return {1};
                        if (rank == 5) return {0};  // the non-monotone row
                        return {2};
                }
            };
            break;

        case Treatment::NS_RevealMore:
            profile.act = [](int, const InfoSet& info) -> Rol {
                if (info.own_role == 0) return {0};
                int rank = info.own_rank.value();
                int r1 = info.neighbor_rank(0);
                int r2 = info.neighbor_rank(1);
                if (rank == 1) return {0};
                if (rank == 2 && r1 == 1) return {0};
                if (rank == 2) return {1};
                if (rank == 3 && r1 <= 2) return {1};
                if (rank == 3 && r2 <= 2) return {1};
                if (rank == 4 && r1 <= 3 && r2 <= 3) return {1};
                // other cases
                if (info.own_role == 1) return {1};
                return {2};
            };
            break;
    }
    return profile;
}

}  // namespace lotmatch
