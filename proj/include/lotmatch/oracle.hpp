#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "lotmatch/info.hpp"
#include "lotmatch/market.hpp"
#include "lotmatch/rational.hpp"
#include "lotmatch/strategy.hpp"

namespace lotmatch {

// Exact enumeration engine: expectations over opponent type draws and lottery
// permutations are computed as rational sums over every world, so probabilities like
// 361/729 come out as equalities rather than approximations. Markets beyond 8
// students are refused; sampling lives in stats.hpp.
inline constexpr int kMaxExactStudents = 8;

inline void require_enumerable(const Market& market) {
    if (market.n > kMaxExactStudents)
        throw std::invalid_argument("exact enumeration supports at most 8 students");
}

/// Calls fn once per lottery bijection (all n! of them).
template <typename Fn>
void for_each_lottery(int n, Fn&& fn) {
    Lottery lottery(n);
    std::iota(lottery.begin(), lottery.end(), 1);
    do {
        fn(const_cast<const Lottery&>(lottery));
    } while (std::next_permutation(lottery.begin(), lottery.end()));
}

/// Probability of drawing the given full type assignment, one factor per student.
inline Rational type_assignment_weight(const Market& market, const std::vector<int>& types,
                                       int skip_student = -1) {
    Rational w = 1;
    for (int i = 0; i < market.n; ++i) {
        if (i == skip_student) continue;
        w *= market.types.at(types[i]).prob;
    }
    return w;
}

/// Enumerates every (opponent types, lottery) world consistent with what `student`
/// observes, weighted so the weights sum to exactly 1: opponent types are i.i.d.
/// from the market distribution and lotteries are uniform among the consistent ones.
/// The callback receives the type vector with the student's own slot set to -1.
template <typename Fn>
void enumerate_contexts(const Market& market, Policy policy, int student, const InfoSet& info,
                        Fn&& fn) {
    require_enumerable(market);
    std::vector<Lottery> consistent;
    for_each_lottery(market.n, [&](const Lottery& lottery) {
        if (observe(policy, market, lottery, student, info.own_utilities) == info)
            consistent.push_back(lottery);
    });
    if (consistent.empty())
        throw std::invalid_argument("information set is not consistent with any lottery");
    const Rational lottery_weight(1, static_cast<long long>(consistent.size()));

    const int slots = market.n;
    const int num_types = static_cast<int>(market.types.size());
    std::vector<int> types(slots, 0);
    types[student] = -1;
    while (true) {
        Rational w = type_assignment_weight(market, types, student) * lottery_weight;
        for (const auto& lottery : consistent) fn(types, lottery, w);
        int pos = slots - 1;
        while (pos >= 0) {
            if (pos == student) {
                --pos;
                continue;
            }
            if (++types[pos] < num_types) break;
            types[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

/// Exact distribution over the student's outcome (schools, then unmatched last).
struct AdmissionDistribution {
    std::vector<Rational> prob;  // size m+1, prob[m] = unmatched

    Rational total() const {
        Rational t = 0;
        for (const auto& p : prob) t += p;
        return t;
    }
    const Rational& unmatched() const { return prob.back(); }

    Rational expected_utility(const std::vector<int>& utilities) const {
        Rational u = 0;
        for (std::size_t s = 0; s + 1 < prob.size(); ++s) u += prob[s] * utilities.at(s);
        return u;
    }
};

namespace detail {

/// Worlds are enumerated once; every candidate action for the student is evaluated
/// against the same opponent play, filling one distribution per action.
inline std::vector<AdmissionDistribution> action_distributions(
    const Market& market, Policy policy, const StrategyProfile& profile, int student,
    const InfoSet& info, const std::vector<Rol>& actions) {
    if (info.own_rank && (*info.own_rank < 1 || *info.own_rank > market.n))
        throw std::invalid_argument("own rank outside 1..n");
    for (const auto& action : actions) validate_rol(market, action, market.rol_limit);

    const int m = market.schools();
    std::vector<AdmissionDistribution> dists(actions.size());
    for (auto& d : dists) d.prob.assign(m + 1, Rational(0));

    std::vector<Rol> rols(market.n);
    enumerate_contexts(market, policy, student, info,
                       [&](const std::vector<int>& types, const Lottery& lottery,
                           const Rational& weight) {
                           for (int j = 0; j < market.n; ++j) {
                               if (j == student) continue;
                               const auto& tu = market.types[types[j]].utilities;
                               rols[j] = profile.act(j, observe(policy, market, lottery, j, tu));
                           }
                           for (std::size_t a = 0; a < actions.size(); ++a) {
                               rols[student] = actions[a];
                               Matching matching = run_da(market, rols, lottery);
                               int outcome = matching.assigned[student];
                               dists[a].prob[outcome == kUnmatched ? m : outcome] += weight;
                           }
                       });
    return dists;
}

}  // namespace detail

/// Outcome distribution for `student` when they submit `action` while everyone else
/// follows the profile, conditioning on exactly what the policy let the student see.
inline AdmissionDistribution admission_distribution(const Market& market, Policy policy,
                                                    const StrategyProfile& profile, int student,
                                                    const std::vector<int>& own_type,
                                                    const InfoSet& info, const Rol& action) {
    if (info.own_utilities != own_type)
        throw std::invalid_argument("information set does not carry the student's own type");
    return detail::action_distributions(market, policy, profile, student, info, {action})[0];
}

/// Every list of up to `limit` distinct schools, in submission order.
inline std::vector<Rol> all_rols(int schools, int limit) {
    std::vector<Rol> out;
    std::vector<int> current;
    std::vector<char> used(schools, 0);
    auto rec = [&](auto&& self) -> void {
        if (!current.empty()) out.push_back(current);
        if (static_cast<int>(current.size()) == limit) return;
        for (int s = 0; s < schools; ++s) {
            if (used[s]) continue;
            used[s] = 1;
            current.push_back(s);
            self(self);
            current.pop_back();
            used[s] = 0;
        }
    };
    rec(rec);
    return out;
}

struct BestResponse {
    Rol prescribed;
    Rational prescribed_value;
    Rol best;
    Rational best_value;
    Rational gain;  // best_value - prescribed_value; <= 0 means the prescription is optimal
};

/// Searches every feasible list for the highest expected utility against the profile.
inline BestResponse best_response_gain(const Market& market, Policy policy,
                                       const StrategyProfile& profile, int student,
                                       const std::vector<int>& own_type, const InfoSet& info) {
    if (info.own_utilities != own_type)
        throw std::invalid_argument("information set does not carry the student's own type");
    std::vector<Rol> actions = all_rols(market.schools(), market.rol_limit);
    Rol prescribed = profile.act(student, info);
    actions.push_back(prescribed);  // last entry, so ties resolve to exploratory actions
    auto dists = detail::action_distributions(market, policy, profile, student, info, actions);

    BestResponse r;
    r.prescribed = prescribed;
    r.prescribed_value = dists.back().expected_utility(own_type);
    r.best = prescribed;
    r.best_value = r.prescribed_value;
    for (std::size_t a = 0; a + 1 < actions.size(); ++a) {
        Rational v = dists[a].expected_utility(own_type);
        if (v > r.best_value) {
            r.best_value = v;
            r.best = actions[a];
        }
    }
    r.gain = r.best_value - r.prescribed_value;
    return r;
}

/// All information sets `student` can actually face under the policy, for one type.
inline std::vector<InfoSet> reachable_infosets(const Market& market, Policy policy, int student,
                                               const std::vector<int>& own_type) {
    require_enumerable(market);
    std::set<InfoSet> seen;
    for_each_lottery(market.n, [&](const Lottery& lottery) {
        seen.insert(observe(policy, market, lottery, student, own_type));
    });
    return {seen.begin(), seen.end()};
}

struct DeviationEntry {
    int student;
    int role;        // neighborhood school or kNoSchool
    int type_index;  // into market.types
    InfoSet info;
    BestResponse response;
};

struct DeviationReport {
    bool is_bne = true;
    Rational max_gain = 0;
    std::vector<DeviationEntry> entries;

    std::vector<const DeviationEntry*> violations() const {
        std::vector<const DeviationEntry*> v;
        for (const auto& e : entries)
            if (e.response.gain > 0) v.push_back(&e);
        return v;
    }
};

/// Exhaustive equilibrium check: one best-response search per student, type, and
/// reachable information set. The profile is a Bayesian Nash equilibrium exactly
/// when every gain is <= 0.
inline DeviationReport verify_bne(const Market& market, Policy policy,
                                  const StrategyProfile& profile) {
    market.validate();
    DeviationReport report;
    for (int student = 0; student < market.n; ++student) {
        for (std::size_t t = 0; t < market.types.size(); ++t) {
            const auto& type = market.types[t].utilities;
            for (const auto& info : reachable_infosets(market, policy, student, type)) {
                DeviationEntry entry;
                entry.student = student;
                entry.role = market.neighborhood[student];
                entry.type_index = static_cast<int>(t);
                entry.info = info;
                entry.response = best_response_gain(market, policy, profile, student, type, info);
                if (entry.response.gain > 0) report.is_bne = false;
                if (entry.response.gain > report.max_gain) report.max_gain = entry.response.gain;
                report.entries.push_back(std::move(entry));
            }
        }
    }
    return report;
}

}  // namespace lotmatch
