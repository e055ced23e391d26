#pragma once

#include <span>

#include "ifslab/hyperspace.hpp"

namespace ifslab::serial {

// Plain single-threaded brute-force kernels. They define the reference
// semantics; the OpenMP/grid paths must reproduce their results exactly.

double excess(const Space &sp, const PointCloud &A, const PointCloud &B);
double hausdorff(const Space &sp, const PointCloud &A, const PointCloud &B);
PointCloud hutchinson(const IFSystem &ifs, const PointCloud &S, double prune_eps);
double estimate_lipschitz(const Space &sp, const MapSpec &map, const Box &region, int samples,
                          uint64_t rng_seed);
RemetrizedResult remetrized_distance(const IFSystem &ifs, std::span<const double> a_seq,
                                     const Vec &x, const Vec &y, int K);

} // namespace ifslab::serial
