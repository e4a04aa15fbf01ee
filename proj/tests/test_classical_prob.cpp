// Unit and property tests for the classical probability layer.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qcorr/classical_prob.hpp"

using namespace qcorr;
using namespace qcorr::cprob;

namespace {

std::mt19937_64 rng(0xc1a551ca1ULL);

JointTable random_table(int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> raw(static_cast<size_t>(1) << n);
    for (double& x : raw) x = -std::log(std::max(u(rng), 1e-300));
    return JointTable::normalized(n, std::move(raw));
}

// Extends a table with the complement of every variable: variable n + j is
// NOT variable j.
JointTable with_complements(const JointTable& t) {
    const int m = 2 * t.n;
    std::vector<double> out(static_cast<size_t>(1) << m, 0.0);
    const uint32_t all = (1u << t.n) - 1;
    for (size_t atom = 0; atom < t.probs.size(); ++atom) {
        const uint32_t lower = static_cast<uint32_t>(atom);
        const uint32_t upper = (~lower) & all;
        out[(static_cast<size_t>(upper) << t.n) | lower] = t.probs[atom];
    }
    return JointTable(m, std::move(out));
}

}  // namespace

TEST_CASE("marginal on basic subsets") {
    const JointTable uniform(2, {0.25, 0.25, 0.25, 0.25});
    CHECK(marginal(uniform, {0, 1}, {1, 0}) == Catch::Approx(0.25));
    CHECK(marginal(uniform, {}, {}) == Catch::Approx(1.0));
    CHECK(marginal(uniform, {0}, {1}) == Catch::Approx(0.5));

    CHECK_THROWS_AS(marginal(uniform, {0, 0}, {1, 1}), BadIndexError);
    CHECK_THROWS_AS(marginal(uniform, {2}, {1}), BadIndexError);
}

TEST_CASE("joint table validation") {
    CHECK_THROWS_AS(JointTable(1, {0.5, 0.6}), OutOfRangeError);
    CHECK_THROWS_AS(JointTable(1, {-0.1, 1.1}), OutOfRangeError);
    CHECK_THROWS_AS(JointTable(2, {1.0}), DimensionMismatchError);
}

TEST_CASE("distance function on canonical pairs") {
    // Variable 1 is the complement of variable 0.
    const JointTable comp(2, {0.0, 0.7, 0.3, 0.0});
    const PairMarginals m = pair_marginals_from_table(comp);
    CHECK(distance(m, 0, 0) == 0.0);
    CHECK(distance(m, 0, 1) == Catch::Approx(1.0));
    CHECK(distance(m, 1, 0) == Catch::Approx(1.0));

    const JointTable iid(2, {0.25, 0.25, 0.25, 0.25});
    CHECK(distance(pair_marginals_from_table(iid), 0, 1) == Catch::Approx(0.5));
}

TEST_CASE("distance requires a declared pair") {
    PairMarginals m(3, {0.5, 0.5, 0.5}, {{{0, 1}, 0.25}});
    CHECK(distance(m, 0, 1) == Catch::Approx(0.5));
    CHECK_THROWS_AS(distance(m, 0, 2), UndeclaredPairError);
    CHECK_THROWS_AS(triangle_check(m, 0, 1, 2), UndeclaredPairError);
}

TEST_CASE("pair marginals validate Frechet bounds") {
    CHECK_THROWS_AS(PairMarginals(2, {0.5, 0.5}, {{{0, 1}, 0.6}}), OutOfRangeError);
    CHECK_THROWS_AS(PairMarginals(2, {0.9, 0.9}, {{{0, 1}, 0.1}}), OutOfRangeError);
    CHECK_NOTHROW(PairMarginals(2, {0.9, 0.9}, {{{0, 1}, 0.8}}));
}

TEST_CASE("triangle slack on simple cases") {
    // Three perfectly correlated variables.
    const JointTable same(3, {0.4, 0, 0, 0, 0, 0, 0, 0.6});
    CHECK(triangle_check(pair_marginals_from_table(same), 0, 1, 2) ==
          Catch::Approx(0.0).margin(1e-15));

    const JointTable iid3 = JointTable(3, std::vector<double>(8, 0.125));
    CHECK(triangle_check(pair_marginals_from_table(iid3), 0, 1, 2) == Catch::Approx(0.5));
}

TEST_CASE("metric axioms hold for marginals of genuine tables") {
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 2;  // extended table has 2n <= 6 variables
        const JointTable ext = with_complements(random_table(n));
        const PairMarginals m = pair_marginals_from_table(ext);
        for (int j = 0; j < ext.n; ++j) {
            CHECK(distance(m, j, j) == 0.0);
            for (int k = 0; k < ext.n; ++k) {
                const double d = distance(m, j, k);
                CHECK(d >= 0.0);
                CHECK(d <= 1.0);
                CHECK(d == Catch::Approx(distance(m, k, j)).margin(1e-15));
            }
        }
        for (int j = 0; j < n; ++j)
            CHECK(distance(m, j, n + j) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("triangle and quadrilateral inequalities hold on genuine tables") {
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 3 + trial % 4;  // 3..6
        const JointTable t = random_table(n);
        const PairMarginals m = pair_marginals_from_table(t);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    if (j == k || k == l || j == l) continue;
                    CHECK(triangle_check(m, j, k, l) >= -1e-12);
                }
        for (int a1 = 0; a1 < n; ++a1)
            for (int b1 = 0; b1 < n; ++b1)
                for (int b2 = 0; b2 < n; ++b2)
                    for (int a2 = 0; a2 < n; ++a2) {
                        if (a1 == b1 || a1 == b2 || a1 == a2 || b1 == b2 || b1 == a2 ||
                            b2 == a2)
                            continue;
                        CHECK(quadrilateral_check(m, a1, b1, b2, a2) >= -1e-12);
                    }
    }
}

TEST_CASE("quadrilateral slack vanishes when all four variables coincide") {
    const JointTable t = random_table(2);
    const PairMarginals m = pair_marginals_from_table(t);
    CHECK(quadrilateral_check(m, 0, 0, 0, 0) == 0.0);
    CHECK(quadrilateral_check(m, 1, 1, 1, 1) == 0.0);
}

TEST_CASE("quadrilateral slack is the sum of its two generating triangles") {
    for (int trial = 0; trial < 40; ++trial) {
        const JointTable t = random_table(4);
        const PairMarginals m = pair_marginals_from_table(t);
        const double quad = quadrilateral_check(m, 0, 2, 3, 1);
        const double tri1 = triangle_check(m, 0, 1, 2);  // d(0,1)+d(1,2)-d(0,2)
        const double tri2 = triangle_check(m, 0, 3, 1);  // d(0,3)+d(3,1)-d(0,1)
        CHECK(quad == Catch::Approx(tri1 + tri2).margin(1e-12));
    }
}

TEST_CASE("ch_value on canonical tables") {
    // Deterministic: every variable always 1 (atom 1111 = index 15).
    std::vector<double> det(16, 0.0);
    det[15] = 1.0;
    const PairMarginals md = pair_marginals_from_table(JointTable(4, det));
    CHECK(ch_value(md, 0, 1, 2, 3) == Catch::Approx(0.0).margin(1e-15));

    // Independent fair bits: equals quadrilateral_check / 2 = 0.5.
    const PairMarginals mi =
        pair_marginals_from_table(JointTable(4, std::vector<double>(16, 1.0 / 16.0)));
    CHECK(ch_value(mi, 0, 1, 2, 3) == Catch::Approx(0.5));
    CHECK(ch_value(mi, 0, 1, 2, 3) ==
          Catch::Approx(quadrilateral_check(mi, 0, 2, 3, 1) / 2.0));
}

TEST_CASE("algebraic chain: quadrilateral -> CH -> CHSH") {
    for (int trial = 0; trial < 100; ++trial) {
        const JointTable t = random_table(4);
        const PairMarginals m = pair_marginals_from_table(t);
        const int a1 = 0, a2 = 1, b1 = 2, b2 = 3;

        // Eq. 15 -> Eq. CH: the quadrilateral over (a1,b1,b2,a2) is twice the
        // CH slack with both parties' settings swapped.
        CHECK(quadrilateral_check(m, a1, b1, b2, a2) ==
              Catch::Approx(2.0 * ch_value(m, a2, a1, b2, b1)).margin(1e-12));

        // Eq. CH -> Eq. CHSH via the {0,1} -> {-1,+1} conversion.
        auto e = [&](int x, int y) {
            return to_pm(m.pair(x, y), m.single(x), m.single(y));
        };
        const double chsh = chsh_value(e(a1, b1), e(a2, b1), e(a1, b2), e(a2, b2));
        CHECK(chsh == Catch::Approx(2.0 - 4.0 * ch_value(m, a1, a2, b1, b2)).margin(1e-12));
        CHECK(std::abs(chsh) <= 4.0 + 1e-12);
    }
}

TEST_CASE("to_pm conversions") {
    CHECK(to_pm(1.0) == Catch::Approx(1.0));
    CHECK(to_pm(0.0, 0.5, 0.5) == Catch::Approx(-1.0));
    CHECK(to_pm(0.25, 0.5, 0.5) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(to_pm(1.5), OutOfRangeError);
}

TEST_CASE("chsh_value on fixed expectation tuples") {
    CHECK(chsh_value(1, 1, 1, 1) == Catch::Approx(2.0));
    CHECK(chsh_value(0, 0, 0, 0) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(chsh_value(1.5, 0, 0, 0), OutOfRangeError);
}

TEST_CASE("correlation basics") {
    // A = B, fair: correlation 1.
    CHECK(correlation(0.0, 0.0, 1.0, 1.0, 1.0) == Catch::Approx(1.0));
    // Independent: correlation 0.
    CHECK(correlation(0.2, -0.3, 1.0, 1.0, 0.2 * -0.3) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(correlation(1.0, 0.0, 1.0, 1.0, 0.0), ZeroVarianceError);
}

TEST_CASE("shannon entropy in nats") {
    std::vector<double> point(4, 0.0);
    point[2] = 1.0;
    CHECK(shannon_entropy(JointTable(2, point)) == Catch::Approx(0.0).margin(1e-15));
    CHECK(shannon_entropy(JointTable(1, {0.5, 0.5})) == Catch::Approx(std::log(2.0)));

    const JointTable prod(2, {0.25, 0.25, 0.25, 0.25});
    const double s = shannon_entropy(prod);
    const double s0 = shannon_entropy(marginal_table(prod, {0}));
    const double s1 = shannon_entropy(marginal_table(prod, {1}));
    CHECK(s == Catch::Approx(2.0 * std::log(2.0)));
    CHECK(s == Catch::Approx(s0 + s1));
}

TEST_CASE("corr-substituted CHSH reaches 2.5 on the three-atom table") {
    // Atoms (a1,a2,b1,b2): (0,1,1,0) -> idx 6, (0,0,0,1) -> idx 8,
    // (1,0,1,1) -> idx 13, each weight 1/3.
    std::vector<double> atoms(16, 0.0);
    atoms[6] = atoms[8] = atoms[13] = 1.0 / 3.0;
    const JointTable t = JointTable::normalized(4, atoms);
    CHECK(corr_chsh_combination(t) == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("seeded search finds a classical Corr-CHSH violation and replays") {
    const CorrChshSearchResult r1 = search_corr_chsh_table(20240229ULL, 20000, 2.05);
    REQUIRE(r1.found);
    CHECK(r1.value > 2.05);
    CHECK(corr_chsh_combination(r1.table) == Catch::Approx(r1.value));

    const CorrChshSearchResult r2 = search_corr_chsh_table(20240229ULL, 20000, 2.05);
    REQUIRE(r2.found);
    CHECK(r2.value == r1.value);
    CHECK(r2.attempts_used == r1.attempts_used);
    for (size_t i = 0; i < r1.table.probs.size(); ++i)
        CHECK(r2.table.probs[i] == r1.table.probs[i]);
}
