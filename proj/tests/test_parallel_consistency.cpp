#include "doctest.h"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ifslab/serial_ref.hpp"
#include "ifslab/specio.hpp"
#include "ifslab/transport.hpp"

using namespace ifslab;

// The OpenMP/grid kernels must reproduce the serial reference results
// exactly: reductions are max/min only and writes are per-index.

namespace {

PointCloud random_cloud(const Space &sp, size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) pts.push_back(rng.point_in(sp.bounds));
    return PointCloud::build(sp, std::move(pts), 0.0);
}

template <typename F> void with_threads(int t, F &&fn) {
#ifdef _OPENMP
    const int before = omp_get_max_threads();
    omp_set_num_threads(t);
    fn();
    omp_set_num_threads(before);
#else
    (void)t;
    fn();
#endif
}

} // namespace

TEST_CASE("excess: grid + OpenMP equals the serial brute force exactly") {
    Space plane;
    plane.dim = 2;
    plane.bounds = {Vec(0.0, 0.0), Vec(1.0, 1.0), 2};
    for (const auto &[na, nb] : {std::pair<size_t, size_t>{20, 30},
                                 {300, 200},      // above the grid threshold
                                 {2000, 1500}}) {
        const PointCloud A = random_cloud(plane, na, na);
        const PointCloud B = random_cloud(plane, nb, nb + 1);
        const double expected = serial::excess(plane, A, B);
        for (int threads : {1, 3}) {
            double got = -1.0;
            with_threads(threads, [&] { got = excess(plane, A, B); });
            CHECK(got == expected); // bitwise equal
        }
    }

    Space line;
    line.dim = 1;
    line.bounds = {Vec(0.0), Vec(1.0), 1};
    const PointCloud A1 = random_cloud(line, 700, 5);
    const PointCloud B1 = random_cloud(line, 900, 6);
    CHECK(excess(line, A1, B1) == serial::excess(line, A1, B1));

    Space cube;
    cube.dim = 3;
    cube.bounds = {Vec(0.0, 0.0, 0.0), Vec(1.0, 1.0, 1.0), 3};
    const PointCloud A3 = random_cloud(cube, 1200, 9);
    const PointCloud B3 = random_cloud(cube, 1100, 10);
    CHECK(excess(cube, A3, B3) == serial::excess(cube, A3, B3));

    Space circle = line;
    circle.variant = SpaceVariant::circle;
    const PointCloud A2 = random_cloud(circle, 150, 7);
    const PointCloud B2 = random_cloud(circle, 170, 8);
    CHECK(excess(circle, A2, B2) == serial::excess(circle, A2, B2));
}

TEST_CASE("hutchinson: parallel image, sequential prune, identical output") {
    const IFSystem sier = gallery::load("sierpinski");
    const PointCloud S = random_cloud(sier.space, 5000, 11);
    for (double prune : {0.0, 1e-3, 1e-2}) {
        const PointCloud expected = serial::hutchinson(sier, S, prune);
        for (int threads : {1, 3}) {
            PointCloud got;
            with_threads(threads, [&] { got = hutchinson(sier, S, prune); });
            CHECK(got.points == expected.points);
        }
    }

    // escape errors agree as well
    const IFSystem semi = gallery::load("semiattractor");
    const PointCloud far = PointCloud::build(semi.space, {Vec(9.0)}, 0.0);
    CHECK_THROWS_AS(hutchinson(semi, far, 0.0), EscapeError);
    CHECK_THROWS_AS(serial::hutchinson(semi, far, 0.0), EscapeError);
}

TEST_CASE("estimate_lipschitz: parallel equals serial") {
    const IFSystem sys = gallery::load("sin-average");
    for (int threads : {1, 3}) {
        double got = -1.0;
        with_threads(threads, [&] {
            got = estimate_lipschitz(sys.space, sys.maps[0], sys.space.bounds, 3000, 17);
        });
        CHECK(got == serial::estimate_lipschitz(sys.space, sys.maps[0], sys.space.bounds, 3000, 17));
    }
}

TEST_CASE("remetrized_distance: parallel equals serial") {
    const IFSystem cantor = gallery::load("cantor");
    const auto a_seq = default_a_seq(10);
    Rng rng(23);
    for (int it = 0; it < 10; ++it) {
        const Vec x(rng.uniform01()), y(rng.uniform01());
        const double expected = serial::remetrized_distance(cantor, a_seq, x, y, 10).value;
        for (int threads : {1, 3}) {
            double got = -1.0;
            with_threads(threads,
                         [&] { got = remetrized_distance(cantor, a_seq, x, y, 10).value; });
            CHECK(got == expected);
        }
    }
}

TEST_CASE("transport pivots are thread-count independent") {
    Space line;
    line.dim = 1;
    line.bounds = {Vec(0.0), Vec(1.0), 1};
    Rng rng(31);
    std::vector<Vec> a, b;
    std::vector<double> wa(60, 1.0 / 60), wb(50, 1.0 / 50);
    for (int i = 0; i < 60; ++i) a.push_back(Vec(rng.uniform01()));
    for (int i = 0; i < 50; ++i) b.push_back(Vec(rng.uniform01()));
    TransportPlan p1, p3;
    with_threads(1, [&] { p1 = solve_transport(line, a, wa, b, wb); });
    with_threads(3, [&] { p3 = solve_transport(line, a, wa, b, wb); });
    CHECK(p1.cost == p3.cost);
    REQUIRE(p1.entries.size() == p3.entries.size());
    for (size_t i = 0; i < p1.entries.size(); ++i) {
        CHECK(p1.entries[i].src == p3.entries[i].src);
        CHECK(p1.entries[i].dst == p3.entries[i].dst);
        CHECK(p1.entries[i].mass == p3.entries[i].mass);
    }
}
