#include "doctest.h"

#include <cmath>

#include "ifslab/hyperspace.hpp"
#include "ifslab/serial_ref.hpp"
#include "ifslab/specio.hpp"

using namespace ifslab;

namespace {

Space unit_line() {
    Space sp;
    sp.dim = 1;
    sp.bounds = {Vec(0.0), Vec(1.0), 1};
    return sp;
}

PointCloud cloud1(const Space &sp, std::initializer_list<double> xs) {
    std::vector<Vec> pts;
    for (double x : xs) pts.push_back(Vec(x));
    return PointCloud::build(sp, std::move(pts), 0.0);
}

PointCloud grid1(const Space &sp, double lo, double hi, int n) {
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) pts.push_back(Vec(lo + (hi - lo) * i / (n - 1.0)));
    return PointCloud::build(sp, std::move(pts), 0.0);
}

} // namespace

TEST_CASE("excess and hausdorff on hand instances") {
    const Space sp = unit_line();
    const PointCloud a = cloud1(sp, {0.0, 1.0});
    const PointCloud b = cloud1(sp, {0.0});
    const PointCloud c = cloud1(sp, {0.4, 0.6});
    CHECK(excess(sp, a, b) == doctest::Approx(1.0));
    CHECK(excess(sp, b, a) == doctest::Approx(0.0)); // subset
    CHECK(hausdorff(sp, a, a) == 0.0);
    CHECK(hausdorff(sp, a, b) == doctest::Approx(1.0));
    // brute force over all pairs: sup over {0,1} of min distance to {0.4,0.6}
    CHECK(excess(sp, a, c) == doctest::Approx(0.4));
    CHECK(hausdorff(sp, a, c) == doctest::Approx(0.4));
}

TEST_CASE("hausdorff metric axioms on random clouds") {
    Space plane;
    plane.dim = 2;
    plane.bounds = {Vec(0.0, 0.0), Vec(1.0, 1.0), 2};
    Rng rng(42);
    auto rand_cloud = [&](size_t n) {
        std::vector<Vec> pts;
        for (size_t i = 0; i < n; ++i) pts.push_back(rng.point_in(plane.bounds));
        return PointCloud::build(plane, std::move(pts), 0.0);
    };
    for (int it = 0; it < 15; ++it) {
        const PointCloud A = rand_cloud(30), B = rand_cloud(40), C = rand_cloud(25);
        const double ab = hausdorff(plane, A, B);
        const double ba = hausdorff(plane, B, A);
        const double ac = hausdorff(plane, A, C);
        const double cb = hausdorff(plane, C, B);
        CHECK(ab == ba); // symmetry is exact
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("point cloud pruning is a deterministic epsilon net") {
    const Space sp = unit_line();
    std::vector<Vec> pts;
    Rng rng(9);
    for (int i = 0; i < 500; ++i) pts.push_back(Vec(rng.uniform01()));
    const PointCloud pruned = PointCloud::build(sp, pts, 0.05);
    // pairwise separation at least eps
    for (size_t i = 0; i < pruned.size(); ++i)
        for (size_t j = i + 1; j < pruned.size(); ++j)
            CHECK(distance(sp, pruned.points[i], pruned.points[j]) >= 0.05);
    // every input point is within eps of a kept point
    const PointCloud raw = PointCloud::build(sp, pts, 0.0);
    CHECK(excess(sp, raw, pruned) < 0.05);
    // deterministic
    const PointCloud again = PointCloud::build(sp, pts, 0.05);
    CHECK(pruned.points == again.points);
}

TEST_CASE("hutchinson images") {
    const IFSystem cantor = gallery::load("cantor");
    const PointCloud s = cloud1(cantor.space, {0.0, 1.0});
    const PointCloud img = hutchinson(cantor, s, 0.0);
    REQUIRE(img.size() == 4);
    CHECK(img.points[0][0] == doctest::Approx(0.0));
    CHECK(img.points[1][0] == doctest::Approx(1.0 / 3.0));
    CHECK(img.points[2][0] == doctest::Approx(2.0 / 3.0));
    CHECK(img.points[3][0] == doctest::Approx(1.0));

    // single identity map fixes every cloud
    IFSystem ident;
    ident.space = unit_line();
    ident.maps = {MapSpec::make_affine1(1.0, 0.0)};
    const PointCloud s2 = cloud1(ident.space, {0.1, 0.5, 0.9});
    CHECK(hutchinson(ident, s2, 0.0).points == s2.points);

    // Tarafdar fixes [t, 1-t]: a grid of [0.2, 0.8] maps onto itself within
    // the grid spacing
    const IFSystem tar = gallery::load("tarafdar");
    const PointCloud grid = grid1(tar.space, 0.2, 0.8, 101);
    const double spacing = 0.6 / 100.0;
    CHECK(hausdorff(tar.space, hutchinson(tar, grid, 0.0), grid) <= spacing + 1e-12);
}

TEST_CASE("hutchinson monotonicity up to pruning") {
    const IFSystem cantor = gallery::load("cantor");
    Rng rng(31);
    for (int it = 0; it < 10; ++it) {
        std::vector<Vec> pa, pb;
        for (int i = 0; i < 20; ++i) pb.push_back(Vec(rng.uniform01()));
        for (int i = 0; i < 10; ++i) pa.push_back(pb[static_cast<size_t>(i)]);
        const PointCloud A = PointCloud::build(cantor.space, pa, 0.0);
        const PointCloud B = PointCloud::build(cantor.space, pb, 0.0);
        const double eps = 0.01;
        const PointCloud fa = hutchinson(cantor, A, eps);
        const PointCloud fb = hutchinson(cantor, B, eps);
        CHECK(excess(cantor.space, fa, fb) <= eps + 1e-12);
    }
}

TEST_CASE("contraction transfer through the Hutchinson operator") {
    const IFSystem cantor = gallery::load("cantor");
    Rng rng(17);
    const double eps = 1e-3;
    for (int it = 0; it < 20; ++it) {
        std::vector<Vec> pa, pb;
        for (int i = 0; i < 30; ++i) pa.push_back(Vec(rng.uniform01()));
        for (int i = 0; i < 25; ++i) pb.push_back(Vec(rng.uniform01()));
        const PointCloud A = PointCloud::build(cantor.space, pa, 0.0);
        const PointCloud B = PointCloud::build(cantor.space, pb, 0.0);
        const double before = hausdorff(cantor.space, A, B);
        const double after =
            hausdorff(cantor.space, hutchinson(cantor, A, eps), hutchinson(cantor, B, eps));
        CHECK(after <= before / 3.0 + 2.0 * eps + 1e-9);
    }
}

TEST_CASE("attractor iteration: Cantor trace and seed independence") {
    const IFSystem cantor = gallery::load("cantor");
    const PointCloud seed = cloud1(cantor.space, {0.0, 1.0});
    const auto [cloud, trace] = attractor(cantor, seed, 1e-4, 60, 2.5e-5);
    CHECK(trace.converged);
    // step-distance ratios stay near 1/3 from iteration 2 on
    for (size_t k = 2; k + 1 < trace.entries.size(); ++k) {
        const double ratio = trace.entries[k + 1].step / trace.entries[k].step;
        CHECK(ratio >= 0.28);
        CHECK(ratio <= 0.39);
    }

    // final cloud independent of the seed within 4 * prune_eps
    Rng rng(3);
    for (int it = 0; it < 5; ++it) {
        std::vector<Vec> pts;
        for (int i = 0; i < 5; ++i) pts.push_back(Vec(rng.uniform01()));
        const PointCloud other = PointCloud::build(cantor.space, pts, 0.0);
        const auto [cloud2, trace2] = attractor(cantor, other, 1e-4, 60, 2.5e-5);
        CHECK(trace2.converged);
        CHECK(hausdorff(cantor.space, cloud, cloud2) <= 4.0 * 2.5e-5 + 1e-4);
    }
}

TEST_CASE("attractor: Sierpinski against the depth-8 word enumeration") {
    const IFSystem sier = gallery::load("sierpinski");
    // exhaustive reference: all depth-8 words applied to the corner fixed point
    std::vector<Vec> ref_pts = {Vec(0.0, 0.0)};
    for (int level = 0; level < 8; ++level) {
        std::vector<Vec> next;
        next.reserve(ref_pts.size() * 3);
        for (const auto &p : ref_pts)
            for (int i = 0; i < 3; ++i) next.push_back(apply_map(sier, i, p));
        ref_pts = std::move(next);
    }
    const PointCloud reference = PointCloud::build(sier.space, std::move(ref_pts), 0.0);

    const double prune = 0.004;
    const PointCloud seed = PointCloud::build(sier.space, {Vec(0.0, 0.0)}, 0.0);
    const auto [cloud, trace] = attractor(sier, seed, prune, 64, prune);
    CHECK(trace.converged);
    CHECK(hausdorff(sier.space, cloud, reference) <= 2.0 * prune);
}

TEST_CASE("attractor in three dimensions (tetrahedron)") {
    IFSystem tetra;
    tetra.space.dim = 3;
    tetra.space.bounds = {Vec(0.0, 0.0, 0.0), Vec(1.0, 1.0, 1.0), 3};
    const Vec corners[4] = {Vec(0.0, 0.0, 0.0), Vec(1.0, 0.0, 0.0), Vec(0.5, 1.0, 0.0),
                            Vec(0.5, 0.5, 1.0)};
    for (const Vec &c : corners) {
        AffineMap a;
        a.dim = 3;
        a.m = {0.5, 0, 0, 0, 0.5, 0, 0, 0, 0.5};
        a.offset = 0.5 * c;
        tetra.maps.push_back(MapSpec::make_affine(a));
    }
    std::vector<Vec> ref_pts = {corners[0]};
    for (int level = 0; level < 6; ++level) {
        std::vector<Vec> next;
        for (const auto &p : ref_pts)
            for (int i = 0; i < 4; ++i) next.push_back(apply_map(tetra, i, p));
        ref_pts = std::move(next);
    }
    const PointCloud reference = PointCloud::build(tetra.space, std::move(ref_pts), 0.0);

    const double prune = 0.02;
    const PointCloud seed = PointCloud::build(tetra.space, {corners[0]}, 0.0);
    const auto [cloud, trace] = attractor(tetra, seed, prune, 40, prune);
    CHECK(trace.converged);
    CHECK(hausdorff(tetra.space, cloud, reference) <= 2.0 * prune + std::ldexp(1.5, -6));
}

TEST_CASE("attractor: expanding map escapes loudly") {
    const IFSystem semi = gallery::load("semiattractor");
    const PointCloud seed = cloud1(semi.space, {1.0});
    const auto [cloud, trace] = attractor(semi, seed, 1e-6, 200, 0.0);
    CHECK_FALSE(trace.converged);
    CHECK(trace.reason.find("escaped") != std::string::npos);
}

TEST_CASE("attractor: budget guards") {
    const IFSystem sier = gallery::load("sierpinski");
    const PointCloud seed = PointCloud::build(sier.space, {Vec(0.1, 0.1)}, 0.0);
    CHECK_THROWS_AS(attractor(sier, seed, 1e-12, 40, 0.0, 2000), BudgetError);
}

TEST_CASE("invariance_residual") {
    const IFSystem cantor = gallery::load("cantor");
    const PointCloud seed = cloud1(cantor.space, {0.0, 1.0});
    const double prune = 1e-4;
    const auto [cloud, trace] = attractor(cantor, seed, 4.0 * prune, 60, prune);
    REQUIRE(trace.converged);
    CHECK(invariance_residual(cantor, cloud, prune) <= 2.0 * prune);

    // one-map IFS at its fixed point
    IFSystem one;
    one.space = unit_line();
    one.maps = {MapSpec::make_affine1(0.5, 0.25)}; // fixed point 0.5
    const PointCloud fp = cloud1(one.space, {0.5});
    CHECK(invariance_residual(one, fp, 0.0) == doctest::Approx(0.0));

    const IFSystem tar = gallery::load("tarafdar");
    const PointCloud grid = grid1(tar.space, 0.2, 0.8, 101);
    CHECK(invariance_residual(tar, grid, 0.0) <= 0.6 / 100.0 + 1e-12);
}

TEST_CASE("maximal attractor probes") {
    // Tarafdar on the full interval: F([0,1]) = [0,1]
    const IFSystem tar = gallery::load("tarafdar");
    const PointCloud x0 = grid1(tar.space, 0.0, 1.0, 201);
    const double spacing = 1.0 / 200.0;
    const auto [cloud, rep] = maximal_attractor(tar, x0, 6, spacing);
    CHECK(rep.trapping_ok);
    CHECK(rep.monotone);
    CHECK(hausdorff(tar.space, cloud, x0) <= 2.0 * spacing);

    // Cantor: F^n([0,1]) is 2^n intervals of length 3^-n; oracle from
    // interval arithmetic
    const IFSystem cantor = gallery::load("cantor");
    const PointCloud cx0 = grid1(cantor.space, 0.0, 1.0, 401);
    const int n = 5;
    const auto [ccloud, crep] = maximal_attractor(cantor, cx0, n, 1.0 / 400.0);
    CHECK(crep.trapping_ok);
    std::vector<std::pair<double, double>> intervals = {{0.0, 1.0}};
    for (int k = 0; k < n; ++k) {
        std::vector<std::pair<double, double>> next;
        for (const auto &[lo, hi] : intervals) {
            next.push_back({lo / 3.0, hi / 3.0});
            next.push_back({lo / 3.0 + 2.0 / 3.0, hi / 3.0 + 2.0 / 3.0});
        }
        intervals = std::move(next);
    }
    std::vector<Vec> oracle_pts;
    for (const auto &[lo, hi] : intervals) {
        oracle_pts.push_back(Vec(lo));
        oracle_pts.push_back(Vec(0.5 * (lo + hi)));
        oracle_pts.push_back(Vec(hi));
    }
    const PointCloud oracle = PointCloud::build(cantor.space, std::move(oracle_pts), 0.0);
    CHECK(hausdorff(cantor.space, ccloud, oracle) <= std::pow(3.0, -n) + 1.0 / 400.0 + 1e-12);

    // a single contraction squeezes the grid to its fixed point
    IFSystem one;
    one.space.dim = 1;
    one.space.bounds = {Vec(-1.0), Vec(1.0), 1};
    one.maps = {MapSpec::make_affine1(0.5, 0.0)};
    const PointCloud gx0 = grid1(one.space, -1.0, 1.0, 101);
    const auto [gcloud, grep] = maximal_attractor(one, gx0, 20, 0.02);
    for (const auto &p : gcloud.points) CHECK(std::fabs(p[0]) <= std::pow(2.0, -20) + 0.05);

    // trapping violated: expanding map
    IFSystem expand = one;
    expand.maps = {MapSpec::make_affine1(2.0, 0.0)};
    CHECK_THROWS_AS(maximal_attractor(expand, gx0, 3, 0.001), ValidationError);
}
