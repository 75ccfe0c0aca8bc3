#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "lotmatch/rational.hpp"

namespace lotmatch {

// Students and schools are dense 0-based indices. School k is the k-th school in the
// common ordinal ranking (everyone prefers a lower index). Lottery ranks run 1..n,
// lower is better. kUnmatched marks an empty assignment.
inline constexpr int kNoSchool = -1;
inline constexpr int kUnmatched = -1;

/// A rank-order list: distinct school indices, most preferred first.
using Rol = std::vector<int>;

/// lottery[i] is student i's rank in 1..n; a bijection.
using Lottery = std::vector<int>;

struct UtilityType {
    std::string label;
    std::vector<int> utilities;  // strictly decreasing across school index, 0-100 scale
    Rational prob;
};

struct Market {
    int n = 0;                      // number of students
    std::vector<int> capacity;      // per school, positive
    std::vector<int> neighborhood;  // per student: school index or kNoSchool
    int rol_limit = 1;
    std::vector<UtilityType> types;
    // Alternative to `types`: per-school inclusive integer ranges utilities are drawn
    // from uniformly and independently (the larger-market environment). Ranges must be
    // strictly decreasing school over school.
    std::vector<std::pair<int, int>> utility_ranges;

    int schools() const { return static_cast<int>(capacity.size()); }

    bool has_neighborhoods() const {
        return std::any_of(neighborhood.begin(), neighborhood.end(),
                           [](int s) { return s != kNoSchool; });
    }

    /// Students living in school s's neighborhood, ascending index.
    std::vector<int> neighbors_of(int school) const {
        std::vector<int> out;
        for (int i = 0; i < n; ++i)
            if (neighborhood[i] == school) out.push_back(i);
        return out;
    }

    int neighborhood_size(int school) const {
        return static_cast<int>(neighbors_of(school).size());
    }

    int total_capacity() const {
        int q = 0;
        for (int c : capacity) q += c;
        return q;
    }

    int type_index_of(const std::vector<int>& utilities) const {
        for (std::size_t t = 0; t < types.size(); ++t)
            if (types[t].utilities == utilities) return static_cast<int>(t);
        return -1;
    }

    void validate() const {
        const int m = schools();
        if (n <= 0 || m <= 0) throw std::invalid_argument("market needs students and schools");
        for (int q : capacity)
            if (q <= 0) throw std::invalid_argument("school capacity must be positive");
        if (static_cast<int>(neighborhood.size()) != n)
            throw std::invalid_argument("neighborhood vector must have one entry per student");
        for (int s : neighborhood)
            if (s != kNoSchool && (s < 0 || s >= m))
                throw std::invalid_argument("neighborhood school out of range");
        if (rol_limit < 1 || rol_limit > m)
            throw std::invalid_argument("rol_limit must be in 1..m");
        if (types.empty() && utility_ranges.empty())
            throw std::invalid_argument("market needs utility types or draw ranges");
        Rational total = 0;
        for (const auto& t : types) {
            if (static_cast<int>(t.utilities.size()) != m)
                throw std::invalid_argument("utility vector length must equal school count");
            for (int k = 1; k < m; ++k)
                if (t.utilities[k - 1] <= t.utilities[k])
                    throw std::invalid_argument("utilities must strictly decrease across schools");
            if (t.prob <= 0) throw std::invalid_argument("type probabilities must be positive");
            total += t.prob;
        }
        if (!types.empty() && total != 1)
            throw std::invalid_argument("type probabilities must sum to 1");
        if (types.empty()) {
            if (static_cast<int>(utility_ranges.size()) != m)
                throw std::invalid_argument("need one utility range per school");
            for (int k = 0; k < m; ++k) {
                if (utility_ranges[k].first > utility_ranges[k].second)
                    throw std::invalid_argument("empty utility range");
                if (k > 0 && utility_ranges[k - 1].first <= utility_ranges[k].second)
                    throw std::invalid_argument("utility ranges must strictly decrease");
            }
        }
    }

    /// The stronger invariants the equilibrium machinery relies on: seats exactly
    /// cover students, list length strictly constrained, neighborhoods leave open seats.
    void validate_for_equilibrium() const {
        validate();
        if (types.empty())
            throw std::invalid_argument("equilibrium analysis requires a finite type list");
        if (total_capacity() != n)
            throw std::invalid_argument("equilibrium analysis requires total capacity == n");
        if (rol_limit >= schools())
            throw std::invalid_argument("equilibrium analysis requires rol_limit < school count");
        for (int s = 0; s < schools(); ++s) {
            int ns = neighborhood_size(s);
            if (ns >= capacity[s])
                throw std::invalid_argument("neighborhood size must be below school capacity");
        }
    }
};

struct Matching {
    std::vector<int> assigned;  // per student: school index or kUnmatched

    bool operator==(const Matching& other) const = default;

    int matched_count() const {
        int c = 0;
        for (int a : assigned) c += (a != kUnmatched);
        return c;
    }

    int seats_filled(int school) const {
        int c = 0;
        for (int a : assigned) c += (a == school);
        return c;
    }
};

inline void validate_lottery(const Market& market, const Lottery& lottery) {
    if (static_cast<int>(lottery.size()) != market.n)
        throw std::invalid_argument("lottery size does not match student count");
    std::vector<char> seen(market.n + 1, 0);
    for (int r : lottery) {
        if (r < 1 || r > market.n || seen[r])
            throw std::invalid_argument("lottery must be a bijection onto 1..n");
        seen[r] = 1;
    }
}

inline void validate_rol(const Market& market, const Rol& rol, int limit) {
    if (rol.empty()) throw std::invalid_argument("rank-order list must be nonempty");
    if (static_cast<int>(rol.size()) > limit)
        throw std::invalid_argument("rank-order list exceeds length limit");
    std::vector<char> seen(market.schools(), 0);
    for (int s : rol) {
        if (s < 0 || s >= market.schools() || seen[s])
            throw std::invalid_argument("rank-order list entries must be distinct valid schools");
        seen[s] = 1;
    }
}

/// Per-school strict order over all students: neighborhood residents first, then
/// everyone else, each block sorted by lottery rank ascending.
inline std::vector<std::vector<int>> build_priorities(const Market& market,
                                                      const Lottery& lottery) {
    validate_lottery(market, lottery);
    std::vector<int> by_rank(market.n);
    for (int i = 0; i < market.n; ++i) by_rank[lottery[i] - 1] = i;
    std::vector<std::vector<int>> order(market.schools());
    for (int s = 0; s < market.schools(); ++s) {
        auto& list = order[s];
        list.reserve(market.n);
        for (int i : by_rank)
            if (market.neighborhood[i] == s) list.push_back(i);
        for (int i : by_rank)
            if (market.neighborhood[i] != s) list.push_back(i);
    }
    return order;
}

namespace detail {

inline Matching run_da_impl(const Market& market, const std::vector<Rol>& rols, int limit,
                            const Lottery& lottery) {
    if (static_cast<int>(rols.size()) != market.n)
        throw std::invalid_argument("need one rank-order list per student");
    for (const auto& rol : rols) validate_rol(market, rol, limit);
    auto priorities = build_priorities(market, lottery);
    // priority_rank[s][i]: position of student i in school s's order (lower wins).
    std::vector<std::vector<int>> priority_rank(market.schools(), std::vector<int>(market.n));
    for (int s = 0; s < market.schools(); ++s)
        for (int pos = 0; pos < market.n; ++pos) priority_rank[s][priorities[s][pos]] = pos;

    std::vector<int> next_choice(market.n, 0);
    std::vector<std::vector<int>> held(market.schools());
    std::vector<int> rejected;
    for (int i = 0; i < market.n; ++i) rejected.push_back(i);

    while (!rejected.empty()) {
        std::vector<int> applicants = std::move(rejected);
        rejected.clear();
        bool any_applied = false;
        for (int i : applicants) {
            if (next_choice[i] >= static_cast<int>(rols[i].size())) continue;  // list exhausted
            held[rols[i][next_choice[i]]].push_back(i);
            any_applied = true;
        }
        if (!any_applied) break;
        for (int s = 0; s < market.schools(); ++s) {
            auto& pool = held[s];
            if (static_cast<int>(pool.size()) <= market.capacity[s]) continue;
            std::sort(pool.begin(), pool.end(), [&](int a, int b) {
                return priority_rank[s][a] < priority_rank[s][b];
            });
            for (std::size_t k = market.capacity[s]; k < pool.size(); ++k) {
                int loser = pool[k];
                ++next_choice[loser];
                rejected.push_back(loser);
            }
            pool.resize(market.capacity[s]);
        }
    }

    Matching matching{std::vector<int>(market.n, kUnmatched)};
    for (int s = 0; s < market.schools(); ++s)
        for (int i : held[s]) matching.assigned[i] = s;
    return matching;
}

}  // namespace detail

/// Student-proposing deferred acceptance over the submitted constrained lists.
/// Deterministic: priorities are strict once the lottery is applied.
inline Matching run_da(const Market& market, const std::vector<Rol>& rols,
                       const Lottery& lottery) {
    return detail::run_da_impl(market, rols, market.rol_limit, lottery);
}

/// The benchmark outcome with unconstrained truthful lists (every student submits
/// the full common ordinal ranking).
inline Matching run_da_unconstrained_truthful(const Market& market, const Lottery& lottery) {
    Rol full(market.schools());
    for (int s = 0; s < market.schools(); ++s) full[s] = s;
    std::vector<Rol> rols(market.n, full);
    return detail::run_da_impl(market, rols, market.schools(), lottery);
}

/// Matched students earn their school's utility, unmatched students earn 0.
inline std::vector<int> payoff(const Matching& matching,
                               const std::vector<std::vector<int>>& utilities) {
    if (matching.assigned.size() != utilities.size())
        throw std::invalid_argument("payoff needs one utility vector per student");
    std::vector<int> out(matching.assigned.size(), 0);
    for (std::size_t i = 0; i < matching.assigned.size(); ++i) {
        int s = matching.assigned[i];
        if (s != kUnmatched) out[i] = utilities[i].at(s);
    }
    return out;
}

}  // namespace lotmatch
