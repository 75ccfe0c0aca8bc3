#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lotmatch/market.hpp"

namespace lotmatch {

enum class Policy { Cover, Reveal, RevealMore };

inline std::string to_string(Policy p) {
    switch (p) {
        case Policy::Cover: return "Cover";
        case Policy::Reveal: return "Reveal";
        case Policy::RevealMore: return "RevealMore";
    }
    return "?";
}

inline Policy parse_policy(const std::string& s) {
    if (s == "Cover") return Policy::Cover;
    if (s == "Reveal") return Policy::Reveal;
    if (s == "RevealMore") return Policy::RevealMore;
    throw std::invalid_argument("unknown policy '" + s + "'");
}

/// |{i in I_s : rank(i) <= x}|: the publicly disclosed cumulative table for school s.
inline int neighborhood_counts(const Market& market, const Lottery& lottery, int school,
                               int x) {
    validate_lottery(market, lottery);
    if (school < 0 || school >= market.schools())
        throw std::invalid_argument("school index out of range");
    if (market.neighborhood_size(school) == 0)
        throw std::invalid_argument("school has no neighborhood");
    if (x < 1 || x > market.n) throw std::invalid_argument("rank threshold out of 1..n");
    int count = 0;
    for (int i = 0; i < market.n; ++i)
        if (market.neighborhood[i] == school && lottery[i] <= x) ++count;
    return count;
}

/// What one student knows when submitting. Fields are populated strictly per policy:
/// Cover sees only own type and role, Reveal adds the own lottery rank, RevealMore
/// adds the cumulative rank tables of every school neighborhood.
struct InfoSet {
    std::vector<int> own_utilities;
    int own_role = kNoSchool;  // neighborhood school or kNoSchool
    std::optional<int> own_rank;
    // neighborhood_stats[s][x-1] = n^pi_s(x); empty vector for schools without one.
    std::optional<std::vector<std::vector<int>>> neighborhood_stats;

    bool operator==(const InfoSet& other) const = default;

    auto key() const {
        return std::tie(own_utilities, own_role, own_rank, neighborhood_stats);
    }
    bool operator<(const InfoSet& other) const { return key() < other.key(); }

    /// Rank of school s's single neighbor, for markets where each neighborhood has
    /// exactly one resident (the experiment case). Requires RevealMore stats.
    int neighbor_rank(int school) const {
        if (!neighborhood_stats) throw std::logic_error("no neighborhood statistics disclosed");
        const auto& table = neighborhood_stats->at(school);
        for (std::size_t x = 0; x < table.size(); ++x)
            if (table[x] == 1) return static_cast<int>(x) + 1;
        throw std::logic_error("school has no single-resident neighborhood table");
    }
};

inline InfoSet observe(Policy policy, const Market& market, const Lottery& lottery,
                       int student, const std::vector<int>& own_type) {
    if (student < 0 || student >= market.n)
        throw std::invalid_argument("student index out of range");
    validate_lottery(market, lottery);
    InfoSet info;
    info.own_utilities = own_type;
    info.own_role = market.neighborhood[student];
    if (policy == Policy::Reveal || policy == Policy::RevealMore)
        info.own_rank = lottery[student];
    if (policy == Policy::RevealMore) {
        std::vector<std::vector<int>> stats(market.schools());
        for (int s = 0; s < market.schools(); ++s) {
            if (market.neighborhood_size(s) == 0) continue;
            stats[s].resize(market.n);
            for (int x = 1; x <= market.n; ++x)
                stats[s][x - 1] = neighborhood_counts(market, lottery, s, x);
        }
        info.neighborhood_stats = std::move(stats);
    }
    return info;
}

// ---------------------------------------------------------------------------
// The five experiment treatments and their shared 6-student, 3-school market.

enum class Treatment { NoNS_Cover, NoNS_Reveal, NS_Cover, NS_Reveal, NS_RevealMore };

inline constexpr Treatment kAllTreatments[] = {
    Treatment::NoNS_Cover, Treatment::NoNS_Reveal, Treatment::NS_Cover, Treatment::NS_Reveal,
    Treatment::NS_RevealMore};

inline std::string to_string(Treatment t) {
    switch (t) {
        case Treatment::NoNS_Cover: return "NoNS_Cover";
        case Treatment::NoNS_Reveal: return "NoNS_Reveal";
        case Treatment::NS_Cover: return "NS_Cover";
        case Treatment::NS_Reveal: return "NS_Reveal";
        case Treatment::NS_RevealMore: return "NS_RevealMore";
    }
    return "?";
}

inline Treatment parse_treatment(const std::string& s) {
    for (Treatment t : kAllTreatments)
        if (to_string(t) == s) return t;
    throw std::invalid_argument("unknown treatment '" + s + "'");
}

inline Policy treatment_policy(Treatment t) {
    switch (t) {
        case Treatment::NoNS_Cover:
        case Treatment::NS_Cover: return Policy::Cover;
        case Treatment::NoNS_Reveal:
        case Treatment::NS_Reveal: return Policy::Reveal;
        case Treatment::NS_RevealMore: return Policy::RevealMore;
    }
    return Policy::Cover;
}

inline bool treatment_has_neighborhoods(Treatment t) {
    return t == Treatment::NS_Cover || t == Treatment::NS_Reveal ||
           t == Treatment::NS_RevealMore;
}

/// Six students, three schools with two seats each, single-school lists, and the
/// two utility types (90,40,20) w.p. 2/3 and (70,60,20) w.p. 1/3. With
/// neighborhoods enabled, students 0,1,2 live next to schools 0,1,2.
inline Market experiment_market(bool with_neighborhoods) {
    Market mkt;
    mkt.n = 6;
    mkt.capacity = {2, 2, 2};
    mkt.neighborhood.assign(6, kNoSchool);
    if (with_neighborhoods) {
        mkt.neighborhood[0] = 0;
        mkt.neighborhood[1] = 1;
        mkt.neighborhood[2] = 2;
    }
    mkt.rol_limit = 1;
    mkt.types = {{"v", {90, 40, 20}, Rational(2, 3)}, {"v'", {70, 60, 20}, Rational(1, 3)}};
    mkt.validate_for_equilibrium();
    return mkt;
}

inline Market treatment_market(Treatment t) {
    return experiment_market(treatment_has_neighborhoods(t));
}

}  // namespace lotmatch
