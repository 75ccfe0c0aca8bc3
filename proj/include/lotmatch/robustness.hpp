#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "lotmatch/log.hpp"
#include "lotmatch/market.hpp"
#include "lotmatch/rational.hpp"

namespace lotmatch {

struct Ratio {
    long long num = 0;
    long long den = 0;

    Rational value() const { return den ? Rational(num, den) : Rational(0); }
};

/// Lottery-quartile breakdowns for the larger draw-based environment: how often
/// neighborhood students list their home school (and at which rank when two entries
/// are allowed), the home-school bias restricted to students whose home school is
/// below the top two, the share of neighborhood students actually assigned home
/// (segregation), and mean payoffs. Quartile q covers ranks (q*n/4, (q+1)*n/4].
struct RobustnessReport {
    int rol_limit = 1;
    Ratio report_rate, report_rank1, report_rank2;
    Ratio bias;
    Ratio segregation;
    Ratio payoff;  // num = payoff sum, den = rows
    std::vector<Ratio> report_rate_q{4}, report_rank1_q{4}, report_rank2_q{4};
    std::vector<Ratio> bias_q{4};
    std::vector<Ratio> segregation_q{4};
    std::vector<Ratio> payoff_q{4};
};

inline RobustnessReport robustness_stats(const Market& market, const DecisionLog& log) {
    market.validate();
    if (!market.types.empty() || market.utility_ranges.empty() || !market.has_neighborhoods())
        throw std::invalid_argument(
            "robustness statistics apply to the draw-based neighborhood environment");
    if (log.schools != market.schools())
        throw std::invalid_argument("log school count does not match the market");
    if (market.n % 4 != 0) throw std::invalid_argument("student count must split into quartiles");
    if (!log.has_outcomes)
        throw std::invalid_argument("robustness statistics need recorded outcomes");

    RobustnessReport rep;
    rep.rol_limit = market.rol_limit;
    const int quarter = market.n / 4;

    for (std::size_t idx = 0; idx < log.rows.size(); ++idx) {
        const auto& row = log.rows[idx];
        int i = row.student_id - 1;
        if (i < 0 || i >= market.n || row.lottery_rank < 1 || row.lottery_rank > market.n)
            throw std::invalid_argument("row " + std::to_string(idx + 2) +
                                        ": malformed student id or lottery rank");
        if (row.neighborhood_school != market.neighborhood[i])
            throw std::invalid_argument("row " + std::to_string(idx + 2) +
                                        ": neighborhood does not match the environment");
        if (!row.assigned || !row.payoff)
            throw std::invalid_argument("row " + std::to_string(idx + 2) +
                                        ": missing recorded outcome");
        int q = (row.lottery_rank - 1) / quarter;
        int home = market.neighborhood[i];

        ++rep.payoff.den;
        rep.payoff.num += *row.payoff;
        ++rep.payoff_q[q].den;
        rep.payoff_q[q].num += *row.payoff;

        if (home == kNoSchool) continue;

        bool first = !row.rol.empty() && row.rol[0] == home;
        bool second = row.rol.size() > 1 && row.rol[1] == home;
        bool listed = std::find(row.rol.begin(), row.rol.end(), home) != row.rol.end();

        ++rep.report_rate.den;
        rep.report_rate.num += listed;
        ++rep.report_rank1.den;
        rep.report_rank1.num += first;
        ++rep.report_rank2.den;
        rep.report_rank2.num += second;
        ++rep.report_rate_q[q].den;
        rep.report_rate_q[q].num += listed;
        ++rep.report_rank1_q[q].den;
        rep.report_rank1_q[q].num += first;
        ++rep.report_rank2_q[q].den;
        rep.report_rank2_q[q].num += second;

        // Listing the home school is only a "bias" when its payoff rank is outside
        // the list length; with the band-ordered draws that means schools below the
        // top when one entry is allowed, below the top two when two are.
        if (market.rol_limit == 1 || home >= 2) {
            ++rep.bias.den;
            rep.bias.num += listed;
            ++rep.bias_q[q].den;
            rep.bias_q[q].num += listed;
        }

        bool home_assigned = row.assigned && *row.assigned == home;
        ++rep.segregation.den;
        rep.segregation.num += home_assigned;
        ++rep.segregation_q[q].den;
        rep.segregation_q[q].num += home_assigned;
    }
    return rep;
}

}  // namespace lotmatch
