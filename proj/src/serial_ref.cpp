#include "ifslab/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ifslab::serial {

double excess(const Space &sp, const PointCloud &A, const PointCloud &B) {
    double worst = 0.0;
    for (const auto &a : A.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto &b : B.points) best = std::min(best, distance(sp, a, b));
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff(const Space &sp, const PointCloud &A, const PointCloud &B) {
    return std::max(serial::excess(sp, A, B), serial::excess(sp, B, A));
}

PointCloud hutchinson(const IFSystem &ifs, const PointCloud &S, double prune_eps) {
    std::vector<Vec> image;
    image.reserve(S.points.size() * static_cast<size_t>(ifs.size()));
    const Box guard = ifs.space.bounds.inflated(10.0);
    for (int i = 0; i < ifs.size(); ++i)
        for (const auto &p : S.points) {
            const Vec y = apply_map(ifs, i, p);
            bool ok = true;
            for (int c = 0; c < ifs.space.dim; ++c) ok = ok && std::isfinite(y[c]);
            if (!ok || (ifs.space.variant == SpaceVariant::euclidean && !guard.contains(y)))
                throw EscapeError("point escaped the inflated domain box under map " +
                                      std::to_string(i + 1),
                                  p, i);
            image.push_back(y);
        }
    return PointCloud::build(ifs.space, std::move(image), prune_eps);
}

double estimate_lipschitz(const Space &sp, const MapSpec &map, const Box &region, int samples,
                          uint64_t rng_seed) {
    if (map.kind == MapSpec::Kind::affine) return map.affine.operator_norm();
    if (map.kind == MapSpec::Kind::builtin) return 1.0;
    const double diam = space_diameter(Space{region.dim, region, sp.variant});
    static const double scales[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    Rng rng(rng_seed);
    double best = 0.0;
    auto consider = [&](const Vec &a, const Vec &b) {
        const double d = distance(sp, a, b);
        if (d == 0.0) return;
        const double dw = distance(sp, map.apply(sp, a), map.apply(sp, b));
        best = std::max(best, dw / d);
    };
    for (int s = 0; s < samples; ++s) {
        const Vec a = rng.point_in(region);
        const Vec b = rng.point_in(region);
        consider(a, b);
        for (double sc : scales) {
            Vec dir;
            dir.dim = region.dim;
            double norm = 0.0;
            for (int i = 0; i < region.dim; ++i) {
                dir[i] = rng.uniform(-1.0, 1.0);
                norm += dir[i] * dir[i];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            Vec c = a;
            for (int i = 0; i < region.dim; ++i) {
                c[i] = a[i] + dir[i] / norm * sc * diam;
                c[i] = std::clamp(c[i], region.lo[i], region.hi[i]);
            }
            consider(a, c);
        }
    }
    return best;
}

RemetrizedResult remetrized_distance(const IFSystem &ifs, std::span<const double> a_seq,
                                     const Vec &x, const Vec &y, int K) {
    const int N = ifs.size();
    std::vector<std::pair<Vec, Vec>> cur = {{x, y}};
    double best = a_seq[0] * distance(ifs.space, x, y);
    for (int k = 1; k <= K; ++k) {
        std::vector<std::pair<Vec, Vec>> next;
        next.reserve(cur.size() * static_cast<size_t>(N));
        for (const auto &[px, py] : cur)
            for (int i = 0; i < N; ++i)
                next.emplace_back(apply_map(ifs, i, px), apply_map(ifs, i, py));
        cur = std::move(next);
        for (const auto &[px, py] : cur)
            best = std::max(best, a_seq[static_cast<size_t>(k)] * distance(ifs.space, px, py));
    }
    RemetrizedResult r;
    r.value = best;
    return r;
}

} // namespace ifslab::serial
