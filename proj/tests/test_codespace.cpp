#include "doctest.h"

#include <cmath>
#include <set>

#include "ifslab/codespace.hpp"
#include "ifslab/specio.hpp"

using namespace ifslab;

namespace {

Word word_of(std::initializer_list<int> syms, int N) {
    Word w;
    w.alphabet = N;
    w.symbols = syms;
    return w;
}

// independent substring scan used as the oracle against is_disjunctive_upto
bool scan_all_blocks(const Word &prefix, int k) {
    const int N = prefix.alphabet;
    for (int len = 1; len <= k; ++len) {
        std::set<std::vector<int>> seen;
        for (size_t i = 0; i + static_cast<size_t>(len) <= prefix.symbols.size(); ++i)
            seen.insert(std::vector<int>(prefix.symbols.begin() + static_cast<long>(i),
                                         prefix.symbols.begin() + static_cast<long>(i) + len));
        size_t want = 1;
        for (int j = 0; j < len; ++j) want *= static_cast<size_t>(N);
        if (seen.size() != want) return false;
    }
    return true;
}

} // namespace

TEST_CASE("baire distance") {
    const Word a = word_of({1, 2, 2}, 2);
    const auto same = baire_distance(a, a);
    CHECK(same.distance == 0.0);
    CHECK(same.prefix_equal);

    CHECK(baire_distance(word_of({1, 2, 1}, 2), word_of({2, 2, 1}, 2)).distance ==
          doctest::Approx(0.5));
    CHECK(baire_distance(word_of({1, 2, 2}, 2), word_of({1, 1, 2}, 2)).distance ==
          doctest::Approx(0.25));

    CHECK_THROWS_AS(baire_distance(word_of({1}, 2), word_of({1}, 3)), ValidationError);
}

TEST_CASE("baire distance is an ultrametric on equal-length words") {
    Rng rng(101);
    for (int it = 0; it < 200; ++it) {
        Word a = word_of({}, 2), b = word_of({}, 2), c = word_of({}, 2);
        for (int i = 0; i < 8; ++i) {
            a.symbols.push_back(1 + static_cast<int>(rng.index(2)));
            b.symbols.push_back(1 + static_cast<int>(rng.index(2)));
            c.symbols.push_back(1 + static_cast<int>(rng.index(2)));
        }
        const double dab = baire_distance(a, b).distance;
        const double dbc = baire_distance(b, c).distance;
        const double dac = baire_distance(a, c).distance;
        CHECK(dac <= std::max(dab, dbc)); // exact, powers of two
    }
}

TEST_CASE("champernowne sequence") {
    CHECK(champernowne(2, 8).symbols == std::vector<int>{1, 2, 1, 1, 1, 2, 2, 1});
    CHECK(champernowne(1, 3).symbols == std::vector<int>{1, 1, 1});
    CHECK(champernowne(3, 3).symbols == std::vector<int>{1, 2, 3});

    // prefix stability
    const Word longer = champernowne(2, 4000);
    const Word shorter = champernowne(2, 1234);
    for (size_t i = 0; i < shorter.symbols.size(); ++i)
        CHECK(shorter.symbols[i] == longer.symbols[i]);
}

TEST_CASE("disjunctivity checks") {
    // periodic 1,2,1,2,... never contains the block (1,1)
    Word periodic = word_of({}, 2);
    for (int i = 0; i < 100; ++i) periodic.symbols.push_back(i % 2 == 0 ? 1 : 2);
    const auto rep = is_disjunctive_upto(periodic, 2);
    CHECK_FALSE(rep.ok);
    REQUIRE(!rep.missing.empty());
    CHECK(rep.missing[0].symbols == std::vector<int>{1, 1});

    // champernowne(2, 1000) holds every block of length <= 3; cross-checked
    // against the independent scan oracle
    const Word cham = champernowne(2, 1000);
    CHECK(is_disjunctive_upto(cham, 3).ok);
    CHECK(scan_all_blocks(cham, 3));

    // any prefix containing all letters passes k = 1
    CHECK(is_disjunctive_upto(word_of({2, 1}, 2), 1).ok);

    CHECK_THROWS_AS(is_disjunctive_upto(cham, 40), BudgetError);
}

TEST_CASE("champernowne disjunctivity depth grows with length") {
    auto depth = [](size_t L) {
        const Word w = champernowne(2, L);
        int k = 0;
        while (is_disjunctive_upto(w, k + 1).ok) ++k;
        return k;
    };
    // frozen from the enumeration oracle
    CHECK(depth(100) == 4);
    CHECK(depth(1000) == 6);
    CHECK(depth(10000) == 9);
}

TEST_CASE("minorant verdicts match the analytic lists") {
    CHECK(minorant_verdict(MinorantFamily::constant, 0.3).satisfies);
    CHECK(minorant_verdict(MinorantFamily::logpow, 2.0).satisfies);
    CHECK_FALSE(minorant_verdict(MinorantFamily::pow, 1.0).satisfies);
    CHECK_FALSE(minorant_verdict(MinorantFamily::sinpow, 1.0).satisfies);

    // illustration table: for the constant family p^{-1}/n^c shrinks with n
    const auto v = minorant_verdict(MinorantFamily::constant, 0.3);
    REQUIRE(v.table.size() == 9);
    CHECK(v.table[0].value > v.table[2].value);
    // for the power family with c = 0.5 < b = 1 the ratio grows
    const auto p = minorant_verdict(MinorantFamily::pow, 1.0);
    CHECK(p.table[2].value > p.table[0].value);
}

TEST_CASE("drivers are deterministic and clonable") {
    DriverSpec spec;
    spec.kind = DriverSpec::Kind::bernoulli;
    spec.N = 2;
    spec.weights = {0.5, 0.5};
    spec.seed = 99;
    Driver a(spec), b(spec);
    for (int i = 0; i < 200; ++i) CHECK(a.next() == b.next());

    Driver c = a.clone_with_seed(99);
    Driver d(spec);
    for (int i = 0; i < 50; ++i) CHECK(c.next() == d.next());

    // champernowne driver replays the sequence
    DriverSpec cham;
    cham.kind = DriverSpec::Kind::champernowne;
    cham.N = 3;
    Driver e(cham);
    const Word expect = champernowne(3, 100);
    for (int i = 0; i < 100; ++i) CHECK(e.next() == expect.symbols[static_cast<size_t>(i)]);

    // explicit prefix runs out loudly
    DriverSpec ex;
    ex.kind = DriverSpec::Kind::explicit_prefix;
    ex.N = 2;
    ex.pattern = word_of({1, 2, 1}, 2);
    Driver f(ex);
    CHECK(f.next() == 1);
    CHECK(f.next() == 2);
    CHECK(f.next() == 1);
    CHECK_THROWS_AS(f.next(), NumericError);
}

TEST_CASE("markov driver with an absorbing state starves a symbol") {
    DriverSpec spec;
    spec.kind = DriverSpec::Kind::markov;
    spec.N = 2;
    spec.rows = {{1.0, 0.0}, {0.5, 0.5}}; // state 1 absorbs
    spec.init = {0.0, 1.0};
    spec.seed = 5;
    Driver d(spec);
    Word prefix = word_of({}, 2);
    for (int i = 0; i < 400; ++i) prefix.symbols.push_back(d.next());
    // the tail is constant 1, so the tail alone fails k = 1 disjunctivity
    Word tail = word_of({}, 2);
    tail.symbols.assign(prefix.symbols.end() - 100, prefix.symbols.end());
    const auto rep = is_disjunctive_upto(tail, 1);
    CHECK_FALSE(rep.ok);
    REQUIRE(!rep.missing.empty());
    CHECK(rep.missing[0].symbols == std::vector<int>{2});
}

TEST_CASE("driver spec parsing") {
    CHECK(parse_driver_spec("champernowne", 2, 0).kind == DriverSpec::Kind::champernowne);
    const auto per = parse_driver_spec("periodic:1,2", 2, 0);
    CHECK(per.kind == DriverSpec::Kind::periodic);
    CHECK(per.pattern.symbols == std::vector<int>{1, 2});
    const auto mino = parse_driver_spec("minorant:logpow,2", 2, 7);
    CHECK(mino.family == MinorantFamily::logpow);
    CHECK(mino.family_param == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_driver_spec("fancy", 2, 0), ValidationError);
    CHECK_THROWS_AS(parse_driver_spec("minorant:gauss", 2, 0), ValidationError);
}

TEST_CASE("coding_point with certified truncation") {
    const IFSystem cantor = gallery::load("cantor");
    Word all2 = word_of({}, 2);
    for (int i = 0; i < 20; ++i) all2.symbols.push_back(2);
    const auto r = coding_point(cantor, all2, Vec(0.0));
    CHECK(std::fabs(r.point[0] - 1.0) <= std::pow(3.0, -20) + 1e-15);

    Word mixed = word_of({}, 2);
    mixed.symbols.push_back(2);
    for (int i = 0; i < 19; ++i) mixed.symbols.push_back(1);
    const auto r2 = coding_point(cantor, mixed, Vec(0.0));
    CHECK(std::fabs(r2.point[0] - 2.0 / 3.0) <= std::pow(3.0, -20) * (1.0 + 1e-9));

    const ComparisonFunction phi = ComparisonFunction::banach(1.0 / 3.0);
    const auto r3 = coding_point(cantor, all2, Vec(0.0), &phi);
    CHECK(r3.has_bound);
    CHECK(r3.error_bound == doctest::Approx(std::pow(3.0, -20)).epsilon(1e-12));

    // extending the word by any suffix moves the point at most the bound
    Rng rng(4);
    for (int it = 0; it < 20; ++it) {
        Word base = word_of({}, 2);
        for (int i = 0; i < 10; ++i) base.symbols.push_back(1 + static_cast<int>(rng.index(2)));
        const auto rb = coding_point(cantor, base, Vec(0.5), &phi);
        Word ext1 = base, ext2 = base;
        for (int i = 0; i < 6; ++i) {
            ext1.symbols.push_back(1 + static_cast<int>(rng.index(2)));
            ext2.symbols.push_back(1 + static_cast<int>(rng.index(2)));
        }
        const auto re1 = coding_point(cantor, ext1, Vec(0.5));
        const auto re2 = coding_point(cantor, ext2, Vec(0.5));
        CHECK(std::fabs(re1.point[0] - rb.point[0]) <= rb.error_bound + 1e-15);
        CHECK(std::fabs(re2.point[0] - rb.point[0]) <= rb.error_bound + 1e-15);
    }

    CHECK_THROWS_AS(coding_point(cantor, word_of({}, 2), Vec(0.0)), ValidationError);
}

TEST_CASE("coding map intertwines prepend with map application") {
    // pi(i ^ alpha) = w_i(pi(alpha)), observed through deep finite prefixes
    const IFSystem sier = gallery::load("sierpinski");
    Rng rng(88);
    const ComparisonFunction phi = ComparisonFunction::banach(0.5);
    for (int it = 0; it < 20; ++it) {
        Word alpha;
        alpha.alphabet = 3;
        for (int j = 0; j < 30; ++j) alpha.symbols.push_back(1 + static_cast<int>(rng.index(3)));
        const Vec base = sier.space.bounds.center();
        const CodingResult pa = coding_point(sier, alpha, base, &phi);
        for (int i = 1; i <= 3; ++i) {
            Word prepended;
            prepended.alphabet = 3;
            prepended.symbols.push_back(i);
            prepended.symbols.insert(prepended.symbols.end(), alpha.symbols.begin(),
                                     alpha.symbols.end());
            const CodingResult pb = coding_point(sier, prepended, base);
            const Vec expected = apply_map(sier, i - 1, pa.point);
            // both prefixes pin pi to within the certified bound
            CHECK(euclidean_distance(pb.point, expected) <= 2.0 * pa.error_bound + 1e-12);
        }
    }
}

TEST_CASE("williams fixed points") {
    const IFSystem cantor = gallery::load("cantor");
    const PointCloud w2 = williams_points(cantor, 2, 1e-9);
    REQUIRE(w2.size() == 4);
    CHECK(w2.points[0][0] == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(w2.points[1][0] == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(w2.points[2][0] == doctest::Approx(0.75).epsilon(1e-7));
    CHECK(w2.points[3][0] == doctest::Approx(1.0).epsilon(1e-7));

    IFSystem one;
    one.space.dim = 1;
    one.space.bounds = {Vec(0.0), Vec(1.0), 1};
    one.maps = {MapSpec::make_affine1(0.5, 0.0)};
    for (int k : {1, 3, 5}) {
        const PointCloud w = williams_points(one, k, 1e-10);
        REQUIRE(w.size() == 1);
        CHECK(std::fabs(w.points[0][0]) < 1e-9);
    }

    const IFSystem sier = gallery::load("sierpinski");
    const PointCloud corners = williams_points(sier, 1, 1e-9);
    REQUIRE(corners.size() == 3);
    CHECK(corners.points[0][0] == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(corners.points[2][0] == doctest::Approx(1.0).epsilon(1e-7));

    // {x/2, 2x}: every composed word fixes 0, so the fixed-point set is {0}
    const IFSystem semi = gallery::load("semiattractor");
    const PointCloud degenerate = williams_points(semi, 2, 1e-9);
    REQUIRE(degenerate.size() == 1);
    CHECK(degenerate.points[0][0] == doctest::Approx(0.0));

    // a genuinely repelling fixed point away from the start diverges loudly
    IFSystem repel;
    repel.space.dim = 1;
    repel.space.bounds = {Vec(-1.0), Vec(1.0), 1};
    repel.maps = {MapSpec::make_affine1(0.5, 0.0), MapSpec::make_affine1(2.0, 1.0)};
    CHECK_THROWS_AS(williams_points(repel, 2, 1e-9), NumericError);

    CHECK_THROWS_AS(williams_points(cantor, 30, 1e-9), BudgetError);
}
