#include <catch2/catch_amalgamated.hpp>

#include "lotmatch/oracle.hpp"
#include "lotmatch/rng.hpp"
#include "lotmatch/strategy.hpp"
#include "support/brute.hpp"

using namespace lotmatch;

TEST_CASE("rank blocks pick the guaranteed school") {
    Market mkt = experiment_market(false);
    CHECK(rank_block_school(mkt, 1) == 0);
    CHECK(rank_block_school(mkt, 2) == 0);
    CHECK(rank_block_school(mkt, 4) == 1);
    CHECK(rank_block_school(mkt, 6) == 2);

    Market ladder;
    ladder.n = 4;
    ladder.capacity = {1, 1, 1, 1};
    ladder.neighborhood.assign(4, kNoSchool);
    ladder.rol_limit = 2;
    ladder.types = {{"t", {80, 60, 40, 20}, Rational(1)}};
    ladder.validate();
    CHECK(rank_block_school(ladder, 3) == 2);

    Market ns = experiment_market(true);
    CHECK_THROWS_AS(rank_block_school(ns, 1), std::invalid_argument);
    CHECK_THROWS_AS(rank_block_school(mkt, 7), std::invalid_argument);
}

TEST_CASE("rank blocks partition the lottery and clear the market") {
    Market mkt = experiment_market(false);
    std::vector<int> block_size(3, 0);
    for (int rank = 1; rank <= 6; ++rank) ++block_size[rank_block_school(mkt, rank)];
    CHECK(block_size == std::vector<int>{2, 2, 2});

    for_each_lottery(6, [&](const Lottery& lottery) {
        std::vector<Rol> rols(6);
        for (int i = 0; i < 6; ++i) rols[i] = {rank_block_school(mkt, lottery[i])};
        Matching got = run_da(mkt, rols, lottery);
        REQUIRE(got.matched_count() == 6);
        for (int i = 0; i < 6; ++i) REQUIRE(got.assigned[i] == rols[i][0]);
    });
}

TEST_CASE("cutoff solver on the experiment market") {
    Market mkt = experiment_market(true);

    // neighbors drawn at ranks 1, 2, 3
    CHECK(solve_cutoffs_revealmore(mkt, {1, 2, 3, 4, 5, 6}).ranks == std::vector<int>{2, 4, 6});
    // s1-neighbor at the bottom: one open seat at the top school
    CHECK(solve_cutoffs_revealmore(mkt, {6, 5, 1, 3, 4, 2}).ranks[0] == 1);
    // no neighborhoods: cutoffs reduce to cumulative capacities
    Market none = experiment_market(false);
    CHECK(solve_cutoffs_revealmore(none, {3, 1, 2, 6, 4, 5}).ranks == std::vector<int>{2, 4, 6});
}

TEST_CASE("achievable school bands and neighborhood overrides") {
    Market mkt = experiment_market(true);

    SECTION("home school is always within reach") {
        SubstreamRng rng(77, 0);
        for (int trial = 0; trial < 40; ++trial) {
            Lottery lottery = rng.lottery(6);
            auto cutoffs = solve_cutoffs_revealmore(mkt, lottery);
            int s1 = achievable_school(mkt, lottery, cutoffs, 0);
            CHECK(s1 == 0);  // the top school's resident never does better than home
            CHECK(achievable_school(mkt, lottery, cutoffs, 1) <= 1);
            CHECK(achievable_school(mkt, lottery, cutoffs, 2) <= 2);
        }
    }

    SECTION("rank 1 reaches the top school") {
        Lottery lottery = {6, 5, 1, 2, 3, 4};
        auto cutoffs = solve_cutoffs_revealmore(mkt, lottery);
        CHECK(achievable_school(mkt, lottery, cutoffs, 2) == 0);  // C-resident at rank 1
    }

    SECTION("neighbors at ranks 6,5,1: the rank-2 outsider lands the second school") {
        Lottery lottery = {6, 5, 1, 2, 3, 4};
        auto cutoffs = solve_cutoffs_revealmore(mkt, lottery);
        CHECK(cutoffs.ranks == std::vector<int>{1, 2, 6});
        // rank 1 (the s3-neighbor) takes the open top-school seat; rank 2 gets school B
        CHECK(achievable_school(mkt, lottery, cutoffs, 3) == 1);
    }
}

TEST_CASE("cutoff bands agree with mechanism outcomes on every lottery") {
    Market mkt = experiment_market(true);
    StrategyProfile profile = cutoff_profile(mkt);
    for_each_lottery(6, [&](const Lottery& lottery) {
        auto cutoffs = solve_cutoffs_revealmore(mkt, lottery);
        std::vector<Rol> rols(6);
        for (int i = 0; i < 6; ++i)
            rols[i] = profile.act(i, observe(Policy::RevealMore, mkt, lottery, i,
                                             mkt.types[0].utilities));
        Matching got = run_da(mkt, rols, lottery);
        for (int i = 0; i < 6; ++i) {
            int predicted = achievable_school(mkt, lottery, cutoffs, i);
            REQUIRE(rols[i] == Rol{predicted});
            REQUIRE(got.assigned[i] == predicted);
        }
    });
}

TEST_CASE("cutoff bands clear random markets, multi-resident neighborhoods included") {
    SubstreamRng rng(24601, 3);
    int done = 0, with_multi = 0;
    while (done < 120) {
        auto inst = brute::random_instance(rng, 7, /*force_exact_capacity=*/true);
        Market& mkt = inst.market;
        if (mkt.rol_limit >= mkt.schools()) continue;
        ++done;
        for (int s = 0; s < mkt.schools(); ++s) with_multi += mkt.neighborhood_size(s) > 1;

        Lottery lottery = rng.lottery(mkt.n);
        auto cutoffs = solve_cutoffs_revealmore(mkt, lottery);
        REQUIRE(cutoffs.ranks.back() == mkt.n);
        for (std::size_t k = 1; k < cutoffs.ranks.size(); ++k)
            REQUIRE(cutoffs.ranks[k] > cutoffs.ranks[k - 1]);

        auto profile = cutoff_profile(mkt);
        std::vector<Rol> rols(mkt.n);
        for (int i = 0; i < mkt.n; ++i)
            rols[i] = profile.act(
                i, observe(Policy::RevealMore, mkt, lottery, i, mkt.types[0].utilities));
        Matching got = run_da(mkt, rols, lottery);
        for (int i = 0; i < mkt.n; ++i) {
            REQUIRE(rols[i] == Rol{achievable_school(mkt, lottery, cutoffs, i)});
            REQUIRE(got.assigned[i] == rols[i][0]);
        }
    }
    CHECK(with_multi > 0);  // the sample must include multi-resident neighborhoods
}

TEST_CASE("continuum cutoffs") {
    using R = Rational;
    auto thirds = std::vector<R>{R(1, 3), R(1, 3), R(1, 3)};

    auto cut = continuum_cutoffs(thirds, {R(1, 6), R(1, 6), R(1, 6)});
    CHECK(cut == std::vector<R>{R(1, 5), R(1, 2), R(1)});

    auto nomass = continuum_cutoffs(thirds, {R(0), R(0), R(0)});
    CHECK(nomass == std::vector<R>{R(1, 3), R(2, 3), R(1)});

    auto uneven = continuum_cutoffs({R(1, 2), R(1, 4), R(1, 4)}, {R(1, 4), R(1, 8), R(1, 8)});
    CHECK(uneven.back() == 1);

    CHECK_THROWS_AS(continuum_cutoffs(thirds, {R(1, 3), R(0), R(0)}), std::invalid_argument);
    CHECK_THROWS_AS(continuum_cutoffs({R(1, 2), R(1, 4)}, {R(0), R(0)}), std::invalid_argument);
}

TEST_CASE("equilibrium tables row by row") {
    Market no_ns = experiment_market(false);
    Market ns = experiment_market(true);
    const auto& v = no_ns.types[0].utilities;
    const auto& vp = no_ns.types[1].utilities;

    SECTION("cover, no neighborhoods: types split across the top two schools") {
        auto table = equilibrium_table(Treatment::NoNS_Cover);
        Lottery any = {1, 2, 3, 4, 5, 6};
        CHECK(table.act(0, observe(Policy::Cover, no_ns, any, 0, v)) == Rol{0});
        CHECK(table.act(0, observe(Policy::Cover, no_ns, any, 0, vp)) == Rol{1});
    }

    SECTION("reveal, no neighborhoods: the rank-block rule") {
        auto table = equilibrium_table(Treatment::NoNS_Reveal);
        for_each_lottery(6, [&](const Lottery& lottery) {
            for (int i = 0; i < 6; ++i) {
                Rol got = table.act(i, observe(Policy::Reveal, no_ns, lottery, i, v));
                REQUIRE(got == Rol{rank_block_school(no_ns, lottery[i])});
            }
        });
    }

    SECTION("cover with neighborhoods") {
        auto table = equilibrium_table(Treatment::NS_Cover);
        Lottery any = {1, 2, 3, 4, 5, 6};
        CHECK(table.act(0, observe(Policy::Cover, ns, any, 0, vp)) == Rol{0});  // home A
        CHECK(table.act(1, observe(Policy::Cover, ns, any, 1, v)) == Rol{1});   // home B
        CHECK(table.act(2, observe(Policy::Cover, ns, any, 2, v)) == Rol{0});
        CHECK(table.act(2, observe(Policy::Cover, ns, any, 2, vp)) == Rol{1});
        CHECK(table.act(4, observe(Policy::Cover, ns, any, 4, v)) == Rol{0});
        CHECK(table.act(4, observe(Policy::Cover, ns, any, 4, vp)) == Rol{1});
    }

    SECTION("reveal with neighborhoods, including the non-monotone rank-5 row") {
        auto table = equilibrium_table(Treatment::NS_Reveal);
        auto act = [&](int student, int rank) {
            Lottery lottery(6);
            std::vector<int> rest;
            for (int r = 1; r <= 6; ++r)
                if (r != rank) rest.push_back(r);
            int at = 0;
            for (int i = 0; i < 6; ++i) lottery[i] = i == student ? rank : rest[at++];
            return table.act(student, observe(Policy::Reveal, ns, lottery, student, v));
        };
        for (int rank = 1; rank <= 6; ++rank) CHECK(act(0, rank) == Rol{0});
        CHECK(act(1, 1) == Rol{0});
        for (int rank = 2; rank <= 6; ++rank) CHECK(act(1, rank) == Rol{1});
        CHECK(act(2, 1) == Rol{0});
        CHECK(act(2, 2) == Rol{1});
        CHECK(act(2, 3) == Rol{1});
        for (int rank = 4; rank <= 6; ++rank) CHECK(act(2, rank) == Rol{2});
        CHECK(act(4, 1) == Rol{0});
        CHECK(act(4, 2) == Rol{1});
        CHECK(act(4, 3) == Rol{1});
        CHECK(act(4, 4) == Rol{2});
        CHECK(act(4, 5) == Rol{0});
        CHECK(act(4, 6) == Rol{2});
    }

    SECTION("full-disclosure table rows keyed on the top neighbors' ranks") {
        auto table = equilibrium_table(Treatment::NS_RevealMore);
        auto act = [&](int student, Lottery lottery) {
            return table.act(student, observe(Policy::RevealMore, ns, lottery, student, v));
        };
        // others at rank 4: school B when both top neighbors sit at rank <= 3
        CHECK(act(3, {1, 2, 3, 4, 5, 6}) == Rol{1});
        CHECK(act(3, {3, 2, 5, 4, 1, 6}) == Rol{1});
        // otherwise rank 4 falls through to school C
        CHECK(act(3, {5, 2, 3, 4, 1, 6}) == Rol{2});
        CHECK(act(3, {2, 5, 3, 4, 1, 6}) == Rol{2});
        // rank 2 with the top neighbor at rank 1 reaches school A
        CHECK(act(3, {1, 3, 4, 2, 5, 6}) == Rol{0});
        CHECK(act(3, {6, 3, 4, 2, 5, 1}) == Rol{1});
        // the B-resident only leaves home for a sure seat at A
        CHECK(act(1, {1, 2, 3, 4, 5, 6}) == Rol{0});
        CHECK(act(1, {3, 2, 1, 4, 5, 6}) == Rol{1});
        CHECK(act(1, {2, 5, 3, 4, 1, 6}) == Rol{1});  // "other cases" row stays home
        // the C-resident's fallthrough goes home as well
        CHECK(act(2, {5, 4, 6, 2, 1, 3}) == Rol{2});
    }
}

TEST_CASE("the full-disclosure table equals cutoff play everywhere") {
    Market ns = experiment_market(true);
    auto table = equilibrium_table(Treatment::NS_RevealMore);
    auto bands = cutoff_profile(ns);
    for_each_lottery(6, [&](const Lottery& lottery) {
        for (int i = 0; i < 6; ++i) {
            InfoSet info = observe(Policy::RevealMore, ns, lottery, i, ns.types[0].utilities);
            REQUIRE(table.act(i, info) == bands.act(i, info));
        }
    });
}

TEST_CASE("every reachable information set yields a valid submission") {
    for (Treatment t : kAllTreatments) {
        Market mkt = treatment_market(t);
        auto table = equilibrium_table(t);
        Policy policy = treatment_policy(t);
        for (std::size_t ti = 0; ti < mkt.types.size(); ++ti) {
            for (int i = 0; i < mkt.n; ++i) {
                for (const auto& info :
                     reachable_infosets(mkt, policy, i, mkt.types[ti].utilities)) {
                    Rol rol = table.act(i, info);
                    REQUIRE_NOTHROW(validate_rol(mkt, rol, mkt.rol_limit));
                }
            }
        }
    }
}

TEST_CASE("stay-home sufficient condition") {
    Market two;
    two.n = 6;
    two.capacity = {2, 4};
    two.neighborhood = {kNoSchool, kNoSchool, kNoSchool, kNoSchool, kNoSchool, 1};
    two.rol_limit = 1;
    two.types = {{"t", {90, 89}, Rational(1)}};
    two.validate();

    // (q - n)/z = 1/5 for the better school
    CHECK(stay_home_condition(two, {5, 0}, 5, {90, 89}));
    CHECK_FALSE(stay_home_condition(two, {5, 0}, 5, {90, 10}));
    CHECK_THROWS_AS(stay_home_condition(two, {5, 0}, 0, {90, 89}), std::invalid_argument);
    // precondition: each better school must be over-demanded
    CHECK_THROWS_AS(stay_home_condition(two, {1, 0}, 5, {90, 89}), std::invalid_argument);

    // the experiment market's B-resident under cover play: three outside students
    // target school A, leaving admission odds of 1/3 there
    Market ns = experiment_market(true);
    CHECK(stay_home_condition(ns, {3, 0, 0}, 1, ns.types[0].utilities));
    CHECK(stay_home_condition(ns, {3, 0, 0}, 1, ns.types[1].utilities));
    CHECK_FALSE(stay_home_condition(ns, {2, 0, 0}, 1, ns.types[0].utilities));
}
