// Benchmark comparing the OpenMP/grid kernels against the serial reference
// implementations on representative workloads. Build and run:
//   cmake --build build --target ifslab_bench && ./build/ifslab_bench

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ifslab/serial_ref.hpp"
#include "ifslab/specio.hpp"

using namespace ifslab;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration_cast<std::chrono::microseconds>(clk::now() - t0).count() / 1e6;
}

PointCloud random_cloud(const Space &sp, size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) pts.push_back(rng.point_in(sp.bounds));
    return PointCloud::build(sp, std::move(pts), 0.0);
}

template <typename F> double time_best_of(int reps, F &&fn) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clk::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif

    Space plane;
    plane.dim = 2;
    plane.bounds = {Vec(0.0, 0.0), Vec(1.0, 1.0), 2};

    {
        const PointCloud A = random_cloud(plane, 20000, 1);
        const PointCloud B = random_cloud(plane, 20000, 2);
        volatile double sink = 0.0;
        const double tp = time_best_of(3, [&] { sink = excess(plane, A, B); });
        const double ts = time_best_of(3, [&] { sink = serial::excess(plane, A, B); });
        const double v1 = excess(plane, A, B), v2 = serial::excess(plane, A, B);
        std::printf("excess 20k x 20k        parallel+grid %8.4fs  serial %8.4fs  (equal: %s)\n",
                    tp, ts, v1 == v2 ? "yes" : "NO");
        (void)sink;
    }

    {
        const IFSystem sier = gallery::load("sierpinski");
        const PointCloud S = random_cloud(sier.space, 100000, 3);
        const double tp = time_best_of(3, [&] { hutchinson(sier, S, 1e-3); });
        const double ts = time_best_of(3, [&] { serial::hutchinson(sier, S, 1e-3); });
        const bool equal =
            hutchinson(sier, S, 1e-3).points == serial::hutchinson(sier, S, 1e-3).points;
        std::printf("hutchinson 3 x 100k     parallel      %8.4fs  serial %8.4fs  (equal: %s)\n",
                    tp, ts, equal ? "yes" : "NO");
    }

    {
        const IFSystem sys = gallery::load("sin-average");
        volatile double sink = 0.0;
        const double tp = time_best_of(3, [&] {
            sink = estimate_lipschitz(sys.space, sys.maps[0], sys.space.bounds, 20000, 5);
        });
        const double ts = time_best_of(3, [&] {
            sink = serial::estimate_lipschitz(sys.space, sys.maps[0], sys.space.bounds, 20000, 5);
        });
        std::printf("lipschitz 140k pairs    parallel      %8.4fs  serial %8.4fs\n", tp, ts);
        (void)sink;
    }

    {
        const IFSystem cantor = gallery::load("cantor");
        const auto a_seq = default_a_seq(16);
        volatile double sink = 0.0;
        const double tp = time_best_of(3, [&] {
            sink = remetrized_distance(cantor, a_seq, Vec(0.1), Vec(0.9), 16, nullptr, 1 << 20).value;
        });
        const double ts = time_best_of(3, [&] {
            sink = serial::remetrized_distance(cantor, a_seq, Vec(0.1), Vec(0.9), 16).value;
        });
        std::printf("remetrized depth 16     parallel      %8.4fs  serial %8.4fs\n", tp, ts);
        (void)sink;
    }

    return 0;
}
