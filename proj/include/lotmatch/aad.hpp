#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lotmatch/info.hpp"
#include "lotmatch/log.hpp"
#include "lotmatch/strategy.hpp"

namespace lotmatch {

struct AadCell {
    long long rows = 0;
    long long deviations = 0;

    Rational rate() const { return rows ? Rational(deviations, rows) : Rational(0); }
};

/// Average absolute deviation: the frequency with which submitted lists differ from
/// the treatment's equilibrium prescription. Cells follow the reporting convention
/// of the deviation tables: role x type under Cover, role x own-rank under the
/// reveal policies. Roles/types are as in the market (kNoSchool = no neighborhood).
struct AadReport {
    Treatment treatment;
    bool rank5_excluded = false;
    AadCell overall;
    std::map<std::pair<int, int>, AadCell> by_role_type;
    std::map<std::pair<int, int>, AadCell> by_role_rank;
    std::vector<std::string> unreachable;  // flagged rows, excluded from denominators
};

struct AadOptions {
    // The robustness filter: drop no-neighborhood students with lottery rank 5,
    // applied uniformly so treatments stay comparable.
    bool exclude_no_neighborhood_rank5 = false;
};

inline AadReport compute_aad(Treatment treatment, const DecisionLog& log,
                             const AadOptions& options = {}) {
    Market market = treatment_market(treatment);
    Policy policy = treatment_policy(treatment);
    StrategyProfile table = equilibrium_table(treatment);
    if (log.schools != market.schools())
        throw std::invalid_argument("log school count does not match the treatment market");

    AadReport report;
    report.treatment = treatment;
    report.rank5_excluded = options.exclude_no_neighborhood_rank5;

    // Group rows so RevealMore information sets can see the whole lottery.
    std::map<std::tuple<int, int, int>, std::vector<int>> groups;
    for (std::size_t r = 0; r < log.rows.size(); ++r)
        groups[{log.rows[r].session, log.rows[r].round, log.rows[r].group}].push_back(
            static_cast<int>(r));

    for (const auto& [key, rows] : groups) {
        bool group_ok = static_cast<int>(rows.size()) == market.n;
        Lottery lottery(market.n, 0);
        if (group_ok) {
            for (int idx : rows) {
                const auto& row = log.rows[idx];
                int i = row.student_id - 1;
                if (i < 0 || i >= market.n || lottery[i] != 0 || row.lottery_rank < 1 ||
                    row.lottery_rank > market.n) {
                    group_ok = false;
                    break;
                }
                lottery[i] = row.lottery_rank;
            }
        }
        if (group_ok) {
            std::vector<char> seen(market.n + 1, 0);
            for (int r : lottery) {
                if (r < 1 || seen[r]) group_ok = false;
                else seen[r] = 1;
            }
        }
        for (int idx : rows) {
            const auto& row = log.rows[idx];
            std::string where = "row " + std::to_string(idx + 2);
            if (!group_ok) {
                report.unreachable.push_back(where + ": group lottery is not a valid bijection");
                continue;
            }
            int i = row.student_id - 1;
            if (row.neighborhood_school != market.neighborhood[i]) {
                report.unreachable.push_back(where + ": role not reachable under treatment");
                continue;
            }
            int type = market.type_index_of(row.utilities);
            if (type < 0) {
                report.unreachable.push_back(where + ": utilities match no market type");
                continue;
            }
            if (row.rol.empty()) {
                report.unreachable.push_back(where + ": no submitted list");
                continue;
            }
            if (options.exclude_no_neighborhood_rank5 &&
                market.neighborhood[i] == kNoSchool && row.lottery_rank == 5)
                continue;

            InfoSet info = observe(policy, market, lottery, i, market.types[type].utilities);
            bool deviated = table.act(i, info) != row.rol;

            auto bump = [&](AadCell& cell) {
                ++cell.rows;
                cell.deviations += deviated;
            };
            bump(report.overall);
            if (policy == Policy::Cover)
                bump(report.by_role_type[{market.neighborhood[i], type}]);
            else
                bump(report.by_role_rank[{market.neighborhood[i], row.lottery_rank}]);
        }
    }
    return report;
}

}  // namespace lotmatch
