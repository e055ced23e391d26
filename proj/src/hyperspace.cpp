#include "ifslab/hyperspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ifslab {

namespace {

// Uniform cell grid for exact nearest-distance queries (euclidean spaces).
// The ring search only skips cells whose every point provably lies farther
// than the current best, so the returned minimum equals the brute-force one.
class NearGrid {
  public:
    NearGrid(const std::vector<Vec> &pts, int dim, double cell) : pts_(pts), dim_(dim), cell_(cell) {
        lo_ = pts[0];
        Vec hi = pts[0];
        for (const auto &p : pts)
            for (int i = 0; i < dim; ++i) {
                lo_[i] = std::min(lo_[i], p[i]);
                hi[i] = std::max(hi[i], p[i]);
            }
        for (int i = 0; i < 3; ++i) n_[i] = 1;
        for (int i = 0; i < dim; ++i)
            n_[i] = std::max(1, static_cast<int>(std::floor((hi[i] - lo_[i]) / cell_)) + 1);
        cells_.resize(static_cast<size_t>(n_[0]) * static_cast<size_t>(n_[1]) *
                      static_cast<size_t>(n_[2]));
        for (size_t idx = 0; idx < pts.size(); ++idx)
            cells_[flat(coords(pts[idx]))].push_back(static_cast<int>(idx));
    }

    double nearest(const Vec &q) const {
        const std::array<int, 3> qc = raw_coords(q);
        double best = std::numeric_limits<double>::infinity();
        int max_ring = 0;
        for (int i = 0; i < dim_; ++i)
            max_ring = std::max({max_ring, qc[static_cast<size_t>(i)] + 1,
                                 n_[i] - qc[static_cast<size_t>(i)]});
        for (int ring = 0; ring <= max_ring; ++ring) {
            // any point in a cell at Chebyshev cell-distance `ring` is at least
            // (ring-1)*cell away
            if (best <= (ring - 1) * cell_) break;
            scan_ring(q, qc, ring, best);
        }
        return best;
    }

  private:
    std::array<int, 3> raw_coords(const Vec &p) const {
        std::array<int, 3> c{0, 0, 0};
        for (int i = 0; i < dim_; ++i)
            c[static_cast<size_t>(i)] = static_cast<int>(std::floor((p[i] - lo_[i]) / cell_));
        return c;
    }
    std::array<int, 3> coords(const Vec &p) const {
        std::array<int, 3> c = raw_coords(p);
        for (int i = 0; i < dim_; ++i)
            c[static_cast<size_t>(i)] = std::clamp(c[static_cast<size_t>(i)], 0, n_[i] - 1);
        return c;
    }
    size_t flat(const std::array<int, 3> &c) const {
        return (static_cast<size_t>(c[2]) * static_cast<size_t>(n_[1]) +
                static_cast<size_t>(c[1])) *
                   static_cast<size_t>(n_[0]) +
               static_cast<size_t>(c[0]);
    }

    void scan_cell(const Vec &q, const std::array<int, 3> &c, double &best) const {
        for (int i = 0; i < dim_; ++i)
            if (c[static_cast<size_t>(i)] < 0 || c[static_cast<size_t>(i)] >= n_[i]) return;
        for (int idx : cells_[flat(c)])
            best = std::min(best, euclidean_distance(q, pts_[static_cast<size_t>(idx)]));
    }

    void scan_ring(const Vec &q, const std::array<int, 3> &qc, int ring, double &best) const {
        std::array<int, 3> c{0, 0, 0};
        const int r = ring;
        if (dim_ == 1) {
            if (r == 0) {
                c[0] = qc[0];
                scan_cell(q, c, best);
            } else {
                c[0] = qc[0] - r;
                scan_cell(q, c, best);
                c[0] = qc[0] + r;
                scan_cell(q, c, best);
            }
            return;
        }
        if (dim_ == 2) {
            for (int dx = -r; dx <= r; ++dx)
                for (int dy = -r; dy <= r; ++dy) {
                    if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                    c[0] = qc[0] + dx;
                    c[1] = qc[1] + dy;
                    scan_cell(q, c, best);
                }
            return;
        }
        for (int dx = -r; dx <= r; ++dx)
            for (int dy = -r; dy <= r; ++dy)
                for (int dz = -r; dz <= r; ++dz) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
                    c[0] = qc[0] + dx;
                    c[1] = qc[1] + dy;
                    c[2] = qc[2] + dz;
                    scan_cell(q, c, best);
                }
    }

    const std::vector<Vec> &pts_;
    int dim_;
    double cell_;
    Vec lo_;
    int n_[3];
    std::vector<std::vector<int>> cells_;
};

double pick_cell_size(const std::vector<Vec> &pts, int dim) {
    Vec lo = pts[0], hi = pts[0];
    for (const auto &p : pts)
        for (int i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    double extent = 0.0;
    for (int i = 0; i < dim; ++i) extent = std::max(extent, hi[i] - lo[i]);
    if (extent <= 0.0) return 1.0;
    const double per_axis = std::ceil(std::pow(static_cast<double>(pts.size()), 1.0 / dim));
    return std::max(extent / std::max(1.0, per_axis), extent * 1e-9);
}

std::vector<Vec> hutchinson_image(const IFSystem &ifs, const PointCloud &S) {
    const int N = ifs.size();
    const size_t n = S.points.size();
    std::vector<Vec> image(static_cast<size_t>(N) * n);
    const Box guard = ifs.space.bounds.inflated(10.0);
    const long total = static_cast<long>(image.size());
    long escape_at = total; // sentinel: no escape
    long eval_err_at = total;
#pragma omp parallel for schedule(static) reduction(min : escape_at) reduction(min : eval_err_at)
    for (long f = 0; f < total; ++f) {
        const int i = static_cast<int>(static_cast<size_t>(f) / n);
        const size_t j = static_cast<size_t>(f) % n;
        Vec y;
        try {
            y = apply_map(ifs, i, S.points[j]);
        } catch (const expr::EvalError &) {
            if (f < eval_err_at) eval_err_at = f;
            continue;
        }
        image[static_cast<size_t>(f)] = y;
        bool ok = true;
        for (int c = 0; c < ifs.space.dim; ++c) ok = ok && std::isfinite(y[c]);
        if (!ok || (ifs.space.variant == SpaceVariant::euclidean && !guard.contains(y))) {
            if (f < escape_at) escape_at = f;
        }
    }
    if (eval_err_at < total) {
        const int i = static_cast<int>(static_cast<size_t>(eval_err_at) / n);
        const size_t j = static_cast<size_t>(eval_err_at) % n;
        const Vec p = S.points[j];
        throw NumericError("expression domain error under map " + std::to_string(i + 1) +
                           " at point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                           ", " + std::to_string(p[2]) + ")");
    }
    if (escape_at < total) {
        const int i = static_cast<int>(static_cast<size_t>(escape_at) / n);
        const size_t j = static_cast<size_t>(escape_at) % n;
        throw EscapeError("point escaped the inflated domain box under map " + std::to_string(i + 1),
                          S.points[j], i);
    }
    return image;
}

} // namespace

PointCloud PointCloud::build(const Space &sp, std::vector<Vec> pts, double eps) {
    if (pts.empty()) throw ValidationError("point cloud must be nonempty");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    PointCloud out;
    out.resolution = eps;
    if (eps <= 0.0) {
        out.points = std::move(pts);
    } else if (sp.variant == SpaceVariant::circle) {
        for (const auto &p : pts) {
            bool keep = true;
            for (const auto &q : out.points)
                if (distance(sp, p, q) < eps) {
                    keep = false;
                    break;
                }
            if (keep) out.points.push_back(p);
        }
    } else {
        // greedy scan with a cell grid of size eps: any kept point within eps
        // sits in a neighboring cell
        struct Key {
            long long a, b, c;
            bool operator<(const Key &o) const {
                if (a != o.a) return a < o.a;
                if (b != o.b) return b < o.b;
                return c < o.c;
            }
        };
        std::map<Key, std::vector<int>> cells;
        auto key_of = [&](const Vec &p) {
            Key k{0, 0, 0};
            k.a = static_cast<long long>(std::floor(p[0] / eps));
            if (sp.dim > 1) k.b = static_cast<long long>(std::floor(p[1] / eps));
            if (sp.dim > 2) k.c = static_cast<long long>(std::floor(p[2] / eps));
            return k;
        };
        for (const auto &p : pts) {
            const Key k = key_of(p);
            bool keep = true;
            for (long long da = -1; da <= 1 && keep; ++da)
                for (long long db = -1; db <= 1 && keep; ++db)
                    for (long long dc = -1; dc <= 1 && keep; ++dc) {
                        if (sp.dim < 2 && db != 0) continue;
                        if (sp.dim < 3 && dc != 0) continue;
                        auto it = cells.find(Key{k.a + da, k.b + db, k.c + dc});
                        if (it == cells.end()) continue;
                        for (int idx : it->second)
                            if (euclidean_distance(p, out.points[static_cast<size_t>(idx)]) < eps) {
                                keep = false;
                                break;
                            }
                    }
            if (keep) {
                out.points.push_back(p);
                cells[k].push_back(static_cast<int>(out.points.size()) - 1);
            }
        }
    }

    out.bbox.dim = sp.dim;
    out.bbox.lo = out.points[0];
    out.bbox.hi = out.points[0];
    for (const auto &p : out.points)
        for (int i = 0; i < sp.dim; ++i) {
            out.bbox.lo[i] = std::min(out.bbox.lo[i], p[i]);
            out.bbox.hi[i] = std::max(out.bbox.hi[i], p[i]);
        }
    out.bbox.lo.dim = sp.dim;
    out.bbox.hi.dim = sp.dim;
    return out;
}

double excess(const Space &sp, const PointCloud &A, const PointCloud &B) {
    if (A.points.empty() || B.points.empty())
        throw ValidationError("excess needs nonempty clouds");
    const long na = static_cast<long>(A.points.size());
    double worst = 0.0;

    if (sp.variant == SpaceVariant::euclidean &&
        A.points.size() * B.points.size() > 4096 && B.points.size() > 8) {
        const NearGrid grid(B.points, sp.dim, pick_cell_size(B.points, sp.dim));
#pragma omp parallel for schedule(static) reduction(max : worst)
        for (long i = 0; i < na; ++i)
            worst = std::max(worst, grid.nearest(A.points[static_cast<size_t>(i)]));
        return worst;
    }

#pragma omp parallel for schedule(static) reduction(max : worst)
    for (long i = 0; i < na; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto &b : B.points)
            best = std::min(best, distance(sp, A.points[static_cast<size_t>(i)], b));
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff(const Space &sp, const PointCloud &A, const PointCloud &B) {
    return std::max(excess(sp, A, B), excess(sp, B, A));
}

PointCloud hutchinson(const IFSystem &ifs, const PointCloud &S, double prune_eps) {
    if (prune_eps < 0.0) throw ValidationError("prune_eps must be >= 0");
    return PointCloud::build(ifs.space, hutchinson_image(ifs, S), prune_eps);
}

std::pair<PointCloud, ConvergenceTrace> attractor(const IFSystem &ifs, const PointCloud &seed,
                                                  double tol, int max_iter, double prune_eps,
                                                  size_t point_budget) {
    if (!(tol > 0.0)) throw ValidationError("attractor needs tol > 0");
    ifs.validate();
    PointCloud S = seed;
    ConvergenceTrace trace;
    for (int k = 0; k < max_iter; ++k) {
        std::vector<Vec> image;
        try {
            image = hutchinson_image(ifs, S);
        } catch (const EscapeError &e) {
            trace.converged = false;
            trace.reason = e.what();
            return {S, trace};
        }
        const PointCloud raw = PointCloud::build(ifs.space, image, 0.0);
        if (raw.size() > point_budget)
            throw BudgetError("cloud size budget exceeded (" + std::to_string(raw.size()) +
                              " points); prune_eps is too small");
        const double residual = hausdorff(ifs.space, raw, S);
        const PointCloud next =
            prune_eps > 0.0 ? PointCloud::build(ifs.space, raw.points, prune_eps) : raw;
        const double step = hausdorff(ifs.space, S, next);
        trace.entries.push_back({k, next.size(), step, residual});
        S = next;
        if (step <= tol) {
            trace.converged = true;
            return {S, trace};
        }
    }
    trace.converged = false;
    trace.reason = "max_iter reached before step distance fell below tol";
    return {S, trace};
}

double invariance_residual(const IFSystem &ifs, const PointCloud &A, double prune_eps) {
    return hausdorff(ifs.space, hutchinson(ifs, A, prune_eps), A);
}

std::pair<PointCloud, MaximalAttractorReport> maximal_attractor(const IFSystem &ifs,
                                                                const PointCloud &X0, int n,
                                                                double prune_eps) {
    ifs.validate();
    MaximalAttractorReport rep;

    // trapping hypothesis: F(X0) within prune_eps of X0
    const PointCloud first = hutchinson(ifs, X0, prune_eps);
    double worst = 0.0;
    Vec worst_pt = first.points[0];
    for (const auto &p : first.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto &q : X0.points) best = std::min(best, distance(ifs.space, p, q));
        if (best > worst) {
            worst = best;
            worst_pt = p;
        }
    }
    rep.worst_excess = worst;
    rep.worst_point = worst_pt;
    rep.trapping_ok = worst <= prune_eps + 1e-12;
    if (!rep.trapping_ok)
        throw ValidationError("maximal_attractor trapping precondition violated: excess " +
                              std::to_string(worst) + " > prune_eps at point (" +
                              std::to_string(worst_pt[0]) + ", " + std::to_string(worst_pt[1]) +
                              ")");

    PointCloud S = X0;
    for (int k = 0; k < n; ++k) {
        const PointCloud next = hutchinson(ifs, S, prune_eps);
        rep.step_excess.push_back(excess(ifs.space, next, S));
        S = next;
    }
    rep.monotone = true;
    for (double e : rep.step_excess) rep.monotone = rep.monotone && e <= prune_eps + 1e-12;
    return {S, rep};
}

} // namespace ifslab
