#include <catch2/catch_amalgamated.hpp>

#include "lotmatch/market.hpp"
#include "lotmatch/info.hpp"
#include "support/brute.hpp"

using namespace lotmatch;

namespace {

std::vector<int> ids(const std::vector<int>& indices) {  // 0-based -> 1-based for readability
    std::vector<int> out;
    for (int i : indices) out.push_back(i + 1);
    return out;
}

}  // namespace

TEST_CASE("priorities without neighborhoods follow the lottery everywhere") {
    Market mkt = experiment_market(false);
    Lottery lottery = {3, 1, 2, 6, 4, 5};
    auto order = build_priorities(mkt, lottery);
    std::vector<int> expected = {2, 3, 1, 5, 6, 4};
    for (int s = 0; s < mkt.schools(); ++s) CHECK(ids(order[s]) == expected);
}

TEST_CASE("priorities with neighborhoods match the worked instructions table") {
    Market mkt = experiment_market(true);
    // ranks: ID3=1, ID6=2, ID4=3, ID5=4, ID2=5, ID1=6
    Lottery lottery = {6, 5, 1, 3, 4, 2};
    auto order = build_priorities(mkt, lottery);
    CHECK(ids(order[0]) == std::vector<int>{1, 3, 6, 4, 5, 2});
    CHECK(ids(order[1]) == std::vector<int>{2, 3, 6, 4, 5, 1});
    CHECK(ids(order[2]) == std::vector<int>{3, 6, 4, 5, 2, 1});
}

TEST_CASE("single student single school") {
    Market mkt;
    mkt.n = 1;
    mkt.capacity = {1};
    mkt.neighborhood = {kNoSchool};
    mkt.rol_limit = 1;
    mkt.types = {{"t", {50}, Rational(1)}};
    mkt.validate();
    auto order = build_priorities(mkt, {1});
    CHECK(order[0] == std::vector<int>{0});
}

TEST_CASE("lottery validation") {
    Market mkt = experiment_market(false);
    CHECK_THROWS_AS(build_priorities(mkt, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(build_priorities(mkt, {1, 2, 3, 4, 5, 5}), std::invalid_argument);
    CHECK_THROWS_AS(build_priorities(mkt, {0, 1, 2, 3, 4, 5}), std::invalid_argument);
}

TEST_CASE("deferred acceptance reproduces the instructions example") {
    Market mkt = experiment_market(true);
    Lottery lottery = {6, 5, 1, 3, 4, 2};
    std::vector<Rol> rols = {{0}, {1}, {0}, {0}, {1}, {0}};  // A,B,A,A,B,A
    Matching got = run_da(mkt, rols, lottery);
    CHECK(got.assigned == std::vector<int>{0, 1, 0, kUnmatched, 1, kUnmatched});
}

TEST_CASE("distinct achievable schools leave everyone matched") {
    Market mkt = experiment_market(false);
    Lottery lottery = {2, 4, 6, 1, 3, 5};
    std::vector<Rol> rols(6);
    for (int i = 0; i < 6; ++i) {
        int cum = 0, school = -1;
        for (int s = 0; s < 3; ++s) {
            cum += mkt.capacity[s];
            if (lottery[i] <= cum) {
                school = s;
                break;
            }
        }
        rols[i] = {school};
    }
    Matching got = run_da(mkt, rols, lottery);
    for (int i = 0; i < 6; ++i) CHECK(got.assigned[i] == rols[i][0]);
}

TEST_CASE("everyone chasing the top school leaves four unmatched") {
    Market mkt = experiment_market(false);
    Lottery lottery = {1, 2, 3, 4, 5, 6};
    std::vector<Rol> rols(6, Rol{0});
    Matching got = run_da(mkt, rols, lottery);
    CHECK(got.seats_filled(0) == 2);
    CHECK(got.seats_filled(1) == 0);
    CHECK(got.seats_filled(2) == 0);
    CHECK(got.matched_count() == 2);
    CHECK(got.assigned[0] == 0);
    CHECK(got.assigned[1] == 0);
}

TEST_CASE("longer lists trigger propose-reject chains") {
    // Student 0 displaced from school 0 must displace someone at school 1 in turn.
    Market mkt;
    mkt.n = 3;
    mkt.capacity = {1, 1, 1};
    mkt.neighborhood = {kNoSchool, kNoSchool, kNoSchool};
    mkt.rol_limit = 2;
    mkt.types = {{"t", {90, 50, 20}, Rational(1)}};
    std::vector<Rol> rols = {{0, 1}, {0, 1}, {1, 2}};
    Matching got = run_da(mkt, rols, {2, 1, 3});
    CHECK(got.assigned == std::vector<int>{1, 0, 2});
}

TEST_CASE("payoffs follow the assignment") {
    Market mkt = experiment_market(false);
    std::vector<std::vector<int>> utilities = {
        {90, 40, 20}, {70, 60, 20}, {90, 40, 20}, {90, 40, 20}, {70, 60, 20}, {90, 40, 20}};
    Matching matching{std::vector<int>{0, 1, kUnmatched, 2, 1, 0}};
    auto pay = payoff(matching, utilities);
    CHECK(pay == std::vector<int>{90, 60, 0, 20, 60, 90});
}

TEST_CASE("rank-order list validation") {
    Market mkt = experiment_market(false);
    Lottery lottery = {1, 2, 3, 4, 5, 6};
    std::vector<Rol> rols(6, Rol{0});
    rols[2] = {};
    CHECK_THROWS_AS(run_da(mkt, rols, lottery), std::invalid_argument);
    rols[2] = {0, 1};  // longer than the limit
    CHECK_THROWS_AS(run_da(mkt, rols, lottery), std::invalid_argument);
    rols[2] = {7};
    CHECK_THROWS_AS(run_da(mkt, rols, lottery), std::invalid_argument);
}

TEST_CASE("market validation catches bad inputs") {
    Market mkt = experiment_market(true);
    mkt.types[0].prob = Rational(1, 2);  // probs now sum to 5/6
    CHECK_THROWS_AS(mkt.validate(), std::invalid_argument);

    Market inc = experiment_market(true);
    inc.types[0].utilities = {90, 90, 20};
    CHECK_THROWS_AS(inc.validate(), std::invalid_argument);

    Market nb = experiment_market(true);
    nb.neighborhood[3] = 0;
    nb.neighborhood[4] = 0;  // three residents for a two-seat school
    CHECK_THROWS_AS(nb.validate_for_equilibrium(), std::invalid_argument);
}

TEST_CASE("properties: capacity, list respect, stability within reports, determinism") {
    SubstreamRng rng(20240817, 1);
    for (int trial = 0; trial < 400; ++trial) {
        auto inst = brute::random_instance(rng);
        Matching a = run_da(inst.market, inst.rols, inst.lottery);
        Matching b = run_da(inst.market, inst.rols, inst.lottery);
        REQUIRE(a == b);

        for (int s = 0; s < inst.market.schools(); ++s)
            REQUIRE(a.seats_filled(s) <= inst.market.capacity[s]);

        auto priorities = build_priorities(inst.market, inst.lottery);
        std::vector<std::vector<int>> pos(inst.market.schools(),
                                          std::vector<int>(inst.market.n));
        for (int s = 0; s < inst.market.schools(); ++s)
            for (int p = 0; p < inst.market.n; ++p) pos[s][priorities[s][p]] = p;
        for (int i = 0; i < inst.market.n; ++i) {
            int got = a.assigned[i];
            bool listed = got == kUnmatched;
            for (int s : inst.rols[i]) {
                if (s == got) listed = true;
            }
            REQUIRE(listed);
            for (int s : inst.rols[i]) {
                if (s == got) break;
                // every school listed above the match must be full of higher-priority students
                REQUIRE(a.seats_filled(s) == inst.market.capacity[s]);
                for (int j = 0; j < inst.market.n; ++j)
                    if (a.assigned[j] == s) REQUIRE(pos[s][j] < pos[s][i]);
            }
        }
    }
}

TEST_CASE("properties: agreement with brute-force student-optimal stable matching") {
    SubstreamRng rng(987654, 2);
    int done = 0;
    while (done < 300) {
        auto inst = brute::random_instance(rng, 5);
        if (inst.market.schools() > 3) continue;
        ++done;
        auto expected = brute::student_optimal_stable(inst.market, inst.rols, inst.lottery);
        REQUIRE(expected.has_value());
        CHECK(run_da(inst.market, inst.rols, inst.lottery) == *expected);
    }
}

TEST_CASE("unconstrained truthful benchmark matches everyone when seats suffice") {
    Market mkt = experiment_market(true);
    SubstreamRng rng(5, 5);
    for (int trial = 0; trial < 50; ++trial) {
        Lottery lottery = rng.lottery(6);
        Matching got = run_da_unconstrained_truthful(mkt, lottery);
        CHECK(got.matched_count() == 6);
    }
}
