#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ifslab/mapkit.hpp"

namespace ifslab {

// Finite epsilon-net stand-in for a nonempty compact set.
struct PointCloud {
    std::vector<Vec> points;
    double resolution = 0.0;
    Box bbox;

    // Sorts lexicographically, then keeps a point iff no earlier kept point
    // lies within `eps` (greedy first-kept scan). eps = 0 drops exact
    // duplicates only.
    static PointCloud build(const Space &sp, std::vector<Vec> pts, double eps);
    size_t size() const { return points.size(); }
};

struct EscapeError : NumericError {
    Vec point;
    int map_index;
    EscapeError(const std::string &m, Vec p, int idx)
        : NumericError(m), point(p), map_index(idx) {}
};

// e(A,B) = max over a in A of min over b in B of d(a,b). Exact; the grid
// acceleration returns the identical value as the brute-force scan.
double excess(const Space &sp, const PointCloud &A, const PointCloud &B);
double hausdorff(const Space &sp, const PointCloud &A, const PointCloud &B);

// Image union over all maps, then epsilon-net pruning. Points escaping the
// 10x inflated domain box raise EscapeError.
PointCloud hutchinson(const IFSystem &ifs, const PointCloud &S, double prune_eps);

struct TraceEntry {
    int k;
    size_t cloud_size;
    double step;     // d_H(S_k, S_{k+1})
    double residual; // d_H(F(S_k), S_k) before pruning
};

struct ConvergenceTrace {
    std::vector<TraceEntry> entries;
    bool converged = false;
    std::string reason;
};

std::pair<PointCloud, ConvergenceTrace> attractor(const IFSystem &ifs, const PointCloud &seed,
                                                  double tol, int max_iter, double prune_eps,
                                                  size_t point_budget = 1000000);

double invariance_residual(const IFSystem &ifs, const PointCloud &A, double prune_eps);

struct MaximalAttractorReport {
    bool trapping_ok = false;
    Vec worst_point;
    double worst_excess = 0.0;
    std::vector<double> step_excess; // e(F^{k+1}(X0), F^k(X0)) per step
    bool monotone = false;           // all step excesses <= prune_eps
};

// Approximates A* = intersection of F^n(X0) under the trapping hypothesis
// F(X0) within prune_eps of X0.
std::pair<PointCloud, MaximalAttractorReport> maximal_attractor(const IFSystem &ifs,
                                                                const PointCloud &X0, int n,
                                                                double prune_eps);

} // namespace ifslab
