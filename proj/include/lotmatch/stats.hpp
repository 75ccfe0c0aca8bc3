#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lotmatch/info.hpp"
#include "lotmatch/market.hpp"
#include "lotmatch/oracle.hpp"
#include "lotmatch/rng.hpp"
#include "lotmatch/strategy.hpp"

namespace lotmatch {

/// Probability vector over schools plus an unmatched mass at the end.
using RandomAssignment = std::vector<Rational>;

enum class FosdResult { Dominates, Dominated, Equal, Incomparable };

/// First-order stochastic dominance over the common ordinal ranking (school 0 best,
/// unmatched worst): a dominates b when a's cumulative mass is weakly ahead at every
/// school and the vectors differ.
inline FosdResult fosd_compare(const RandomAssignment& a, const RandomAssignment& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("assignments must share the same school set");
    bool ge = true, le = true;
    Rational ca = 0, cb = 0;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        ca += a[k];
        cb += b[k];
        if (ca < cb) ge = false;
        if (ca > cb) le = false;
    }
    if (ge && le) return FosdResult::Equal;
    if (ge) return FosdResult::Dominates;
    if (le) return FosdResult::Dominated;
    return FosdResult::Incomparable;
}

struct GroupOutcome {
    RandomAssignment assignment;  // size m+1, unmatched last; sums to 1
    Rational match_rate;          // 1 - unmatched mass
    Rational expected_payoff;
    // Monte Carlo extras; zero in exact mode.
    double match_rate_se = 0.0;
    double payoff_se = 0.0;
    long long observations = 0;
};

struct ExactMode {};
struct MonteCarloMode {
    std::uint64_t seed = 0;
    long long reps = 100000;
};
using StatsMode = std::variant<ExactMode, MonteCarloMode>;

/// Match rates, payoffs and assignment distributions per (role, type), per role,
/// per type, and overall. Roles are neighborhood schools (kNoSchool = none).
struct OutcomeStats {
    std::map<std::pair<int, int>, GroupOutcome> by_role_type;
    std::map<int, GroupOutcome> by_role;
    std::map<int, GroupOutcome> by_type;
    std::map<int, GroupOutcome> by_student;  // ex-ante view per student index
    GroupOutcome aggregate;
    std::vector<Rational> expected_vacancies;  // per school
    std::optional<MonteCarloMode> mc;          // engaged when sampled
};

namespace detail {

struct Tally {
    // counts[i][t][outcome] as exact weights (exact mode) or draw counts (MC mode).
    std::vector<std::vector<std::vector<Rational>>> weight;
    std::vector<Rational> vacancy;
    Rational total = 0;

    Tally(int n, int num_types, int m)
        : weight(n, std::vector<std::vector<Rational>>(num_types,
                                                       std::vector<Rational>(m + 1, Rational(0)))),
          vacancy(m, Rational(0)) {}
};

inline void tally_world(const Market& market, const StrategyProfile& profile,
                        const std::vector<int>& types, const Lottery& lottery,
                        const Rational& w, Tally& tally) {
    auto rols = play_profile(market, profile, types, lottery);
    Matching matching = run_da(market, rols, lottery);
    const int m = market.schools();
    for (int i = 0; i < market.n; ++i) {
        int outcome = matching.assigned[i];
        tally.weight[i][types[i]][outcome == kUnmatched ? m : outcome] += w;
    }
    for (int s = 0; s < m; ++s)
        tally.vacancy[s] += w * (market.capacity[s] - matching.seats_filled(s));
    tally.total += w;
}

inline GroupOutcome finalize_cell(const RandomAssignment& dist,
                                  const std::vector<Rational>& payoff_mix) {
    GroupOutcome cell;
    cell.assignment = dist;
    cell.match_rate = 1 - dist.back();
    cell.expected_payoff = 0;
    for (std::size_t k = 0; k + 1 < dist.size(); ++k) cell.expected_payoff += payoff_mix[k] * dist[k];
    return cell;
}

/// Exact sampler for the rational type distribution.
struct TypeSampler {
    long long denom = 1;
    std::vector<long long> cum;

    explicit TypeSampler(const Market& market) {
        for (const auto& t : market.types) {
            long long d = boost::multiprecision::denominator(t.prob).convert_to<long long>();
            denom = std::lcm(denom, d);
        }
        long long c = 0;
        for (const auto& t : market.types) {
            c += (t.prob * denom).convert_to<long long>();
            cum.push_back(c);
        }
    }

    int operator()(SubstreamRng& rng) const {
        long long u = static_cast<long long>(rng.below(static_cast<std::uint64_t>(denom)));
        for (std::size_t t = 0; t < cum.size(); ++t)
            if (u < cum[t]) return static_cast<int>(t);
        return static_cast<int>(cum.size()) - 1;
    }
};

}  // namespace detail

/// Expectation over types, lotteries and profile play, all exact rationals.
/// Requires an enumerable market (n <= 8) with a finite type list.
inline OutcomeStats exante_stats_exact(const Market& market, Policy policy,
                                       const StrategyProfile& profile) {
    market.validate();
    require_enumerable(market);
    if (profile.policy != policy)
        throw std::invalid_argument("profile was built for a different disclosure policy");
    if (market.types.empty())
        throw std::invalid_argument("exact statistics need a finite type list");
    const int m = market.schools();
    const int nt = static_cast<int>(market.types.size());

    detail::Tally tally(market.n, nt, m);
    // Joint enumeration: every type assignment crossed with every lottery.
    std::vector<int> types(market.n, 0);
    Rational lottery_w = 1;
    {
        Rational fact = 1;
        for (int k = 2; k <= market.n; ++k) fact *= k;
        lottery_w = 1 / fact;
    }
    while (true) {
        Rational tw = type_assignment_weight(market, types) * lottery_w;
        for_each_lottery(market.n, [&](const Lottery& lottery) {
            detail::tally_world(market, profile, types, lottery, tw, tally);
        });
        int pos = market.n - 1;
        while (pos >= 0 && ++types[pos] == nt) types[pos--] = 0;
        if (pos < 0) break;
    }

    // Collapse per-student joint weights into the reported cells. A student's joint
    // cell (type t, outcome) carries mass f(t) * P(outcome | t), so the interim
    // distribution is the row divided by f(t).
    OutcomeStats stats;
    stats.expected_vacancies = tally.vacancy;
    std::map<int, int> role_count;
    for (int i = 0; i < market.n; ++i) ++role_count[market.neighborhood[i]];

    std::map<std::pair<int, int>, RandomAssignment> cell_dist;
    for (int i = 0; i < market.n; ++i) {
        int role = market.neighborhood[i];
        for (int t = 0; t < nt; ++t) {
            auto& acc = cell_dist[{role, t}];
            if (acc.empty()) acc.assign(m + 1, Rational(0));
            for (int o = 0; o <= m; ++o)
                acc[o] += tally.weight[i][t][o] / market.types[t].prob / role_count[role];
        }
        GroupOutcome own;
        own.assignment.assign(m + 1, Rational(0));
        own.match_rate = 0;
        own.expected_payoff = 0;
        for (int t = 0; t < nt; ++t)
            for (int o = 0; o <= m; ++o) {
                own.assignment[o] += tally.weight[i][t][o];
                if (o < m) own.expected_payoff += tally.weight[i][t][o] * market.types[t].utilities[o];
            }
        own.match_rate = 1 - own.assignment[m];
        stats.by_student[i] = own;
    }
    auto type_payoffs = [&](int t) {
        std::vector<Rational> u;
        for (int s = 0; s < m; ++s) u.emplace_back(market.types[t].utilities[s]);
        return u;
    };
    for (const auto& [key, dist] : cell_dist)
        stats.by_role_type[key] = detail::finalize_cell(dist, type_payoffs(key.second));

    for (const auto& [role, count] : role_count) {
        RandomAssignment dist(m + 1, Rational(0));
        GroupOutcome cell;
        cell.assignment.assign(m + 1, Rational(0));
        cell.match_rate = 0;
        cell.expected_payoff = 0;
        for (int t = 0; t < nt; ++t) {
            const auto& sub = stats.by_role_type[{role, t}];
            for (int o = 0; o <= m; ++o) cell.assignment[o] += market.types[t].prob * sub.assignment[o];
            cell.match_rate += market.types[t].prob * sub.match_rate;
            cell.expected_payoff += market.types[t].prob * sub.expected_payoff;
        }
        stats.by_role[role] = cell;
    }
    for (int t = 0; t < nt; ++t) {
        GroupOutcome cell;
        cell.assignment.assign(m + 1, Rational(0));
        cell.match_rate = 0;
        cell.expected_payoff = 0;
        for (const auto& [role, count] : role_count) {
            const auto& sub = stats.by_role_type[{role, t}];
            Rational share(count, market.n);
            for (int o = 0; o <= m; ++o) cell.assignment[o] += share * sub.assignment[o];
            cell.match_rate += share * sub.match_rate;
            cell.expected_payoff += share * sub.expected_payoff;
        }
        stats.by_type[t] = cell;
    }
    {
        GroupOutcome agg;
        agg.assignment.assign(m + 1, Rational(0));
        agg.match_rate = 0;
        agg.expected_payoff = 0;
        for (int t = 0; t < nt; ++t) {
            const auto& sub = stats.by_type[t];
            for (int o = 0; o <= m; ++o) agg.assignment[o] += market.types[t].prob * sub.assignment[o];
            agg.match_rate += market.types[t].prob * sub.match_rate;
            agg.expected_payoff += market.types[t].prob * sub.expected_payoff;
        }
        stats.aggregate = agg;
    }
    return stats;
}

/// Seeded sampling counterpart: every replication draws its world from an
/// independent substream, so results do not depend on evaluation order.
inline OutcomeStats exante_stats_mc(const Market& market, Policy policy,
                                    const StrategyProfile& profile, const MonteCarloMode& mode) {
    market.validate();
    if (profile.policy != policy)
        throw std::invalid_argument("profile was built for a different disclosure policy");
    if (market.types.empty())
        throw std::invalid_argument("sampled statistics need a finite type list");
    if (mode.reps <= 0) throw std::invalid_argument("need a positive replication count");
    const int m = market.schools();
    const int nt = static_cast<int>(market.types.size());

    // Integer tallies: draws[i][t][outcome], payoff sums and squares per (i, t).
    std::vector counts(market.n, std::vector(nt, std::vector<long long>(m + 1, 0)));
    std::vector pay(market.n, std::vector<long long>(nt, 0));
    std::vector pay2(market.n, std::vector<long long>(nt, 0));
    std::vector<long long> vacancy(m, 0);

    const detail::TypeSampler sample_type(market);
    std::vector<int> types(market.n);
    for (long long rep = 0; rep < mode.reps; ++rep) {
        SubstreamRng rng(mode.seed, static_cast<std::uint64_t>(rep));
        for (int i = 0; i < market.n; ++i) types[i] = sample_type(rng);
        Lottery lottery = rng.lottery(market.n);
        auto rols = play_profile(market, profile, types, lottery);
        Matching matching = run_da(market, rols, lottery);
        for (int i = 0; i < market.n; ++i) {
            int o = matching.assigned[i];
            int slot = o == kUnmatched ? m : o;
            ++counts[i][types[i]][slot];
            long long p = o == kUnmatched ? 0 : market.types[types[i]].utilities[o];
            pay[i][types[i]] += p;
            pay2[i][types[i]] += p * p;
        }
        for (int s = 0; s < m; ++s) vacancy[s] += market.capacity[s] - matching.seats_filled(s);
    }

    OutcomeStats stats;
    stats.mc = mode;
    for (int s = 0; s < m; ++s)
        stats.expected_vacancies.push_back(Rational(vacancy[s], mode.reps));

    std::map<int, int> role_count;
    for (int i = 0; i < market.n; ++i) ++role_count[market.neighborhood[i]];

    auto make_cell = [&](std::vector<long long> outcome_counts, long long pay_sum,
                         long long pay_sq) {
        GroupOutcome cell;
        long long nobs = 0;
        for (long long c : outcome_counts) nobs += c;
        cell.observations = nobs;
        cell.assignment.assign(m + 1, Rational(0));
        if (nobs == 0) {
            cell.match_rate = 0;
            cell.expected_payoff = 0;
            return cell;
        }
        for (int o = 0; o <= m; ++o) cell.assignment[o] = Rational(outcome_counts[o], nobs);
        cell.match_rate = 1 - cell.assignment[m];
        cell.expected_payoff = Rational(pay_sum, nobs);
        double p = to_double(cell.match_rate);
        cell.match_rate_se = std::sqrt(std::max(0.0, p * (1 - p) / nobs));
        double mean = to_double(cell.expected_payoff);
        double var = std::max(0.0, (double)pay_sq / nobs - mean * mean);
        cell.payoff_se = std::sqrt(var / nobs);
        return cell;
    };

    // Pooled draws: conditioning happens through the sampled own types.
    for (const auto& [role, count] : role_count) {
        for (int t = 0; t < nt; ++t) {
            std::vector<long long> oc(m + 1, 0);
            long long ps = 0, pq = 0;
            for (int i = 0; i < market.n; ++i) {
                if (market.neighborhood[i] != role) continue;
                for (int o = 0; o <= m; ++o) oc[o] += counts[i][t][o];
                ps += pay[i][t];
                pq += pay2[i][t];
            }
            stats.by_role_type[{role, t}] = make_cell(oc, ps, pq);
        }
        std::vector<long long> oc(m + 1, 0);
        long long ps = 0, pq = 0;
        for (int i = 0; i < market.n; ++i) {
            if (market.neighborhood[i] != role) continue;
            for (int t = 0; t < nt; ++t) {
                for (int o = 0; o <= m; ++o) oc[o] += counts[i][t][o];
                ps += pay[i][t];
                pq += pay2[i][t];
            }
        }
        stats.by_role[role] = make_cell(oc, ps, pq);
    }
    for (int t = 0; t < nt; ++t) {
        std::vector<long long> oc(m + 1, 0);
        long long ps = 0, pq = 0;
        for (int i = 0; i < market.n; ++i) {
            for (int o = 0; o <= m; ++o) oc[o] += counts[i][t][o];
            ps += pay[i][t];
            pq += pay2[i][t];
        }
        stats.by_type[t] = make_cell(oc, ps, pq);
    }
    for (int i = 0; i < market.n; ++i) {
        std::vector<long long> oc(m + 1, 0);
        long long ps = 0, pq = 0;
        for (int t = 0; t < nt; ++t) {
            for (int o = 0; o <= m; ++o) oc[o] += counts[i][t][o];
            ps += pay[i][t];
            pq += pay2[i][t];
        }
        stats.by_student[i] = make_cell(oc, ps, pq);
    }
    {
        std::vector<long long> oc(m + 1, 0);
        long long ps = 0, pq = 0;
        for (int i = 0; i < market.n; ++i)
            for (int t = 0; t < nt; ++t) {
                for (int o = 0; o <= m; ++o) oc[o] += counts[i][t][o];
                ps += pay[i][t];
                pq += pay2[i][t];
            }
        stats.aggregate = make_cell(oc, ps, pq);
    }
    return stats;
}

inline OutcomeStats exante_stats(const Market& market, Policy policy,
                                 const StrategyProfile& profile, const StatsMode& mode) {
    if (std::holds_alternative<ExactMode>(mode))
        return exante_stats_exact(market, policy, profile);
    return exante_stats_mc(market, policy, profile, std::get<MonteCarloMode>(mode));
}

/// Stats conditional on a student's role and own type, before the lottery draw.
inline GroupOutcome interim_stats(const Market& market, Policy policy,
                                  const StrategyProfile& profile, int role, int type_index,
                                  const StatsMode& mode) {
    OutcomeStats stats = exante_stats(market, policy, profile, mode);
    auto it = stats.by_role_type.find({role, type_index});
    if (it == stats.by_role_type.end())
        throw std::invalid_argument("no students with the requested role/type");
    return it->second;
}

}  // namespace lotmatch
