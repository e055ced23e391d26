#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ifslab/codespace.hpp"
#include "ifslab/hyperspace.hpp"

namespace ifslab {

struct OrbitConfig {
    Vec x0;
    DriverSpec driver;
    long n = 10000;
    long burn_in = -1; // -1: default max(1000, n/100)
    long stride = 1;
};

struct Orbit {
    std::vector<long> indices; // recorded positions (multiples of stride, plus x0 at 0)
    std::vector<Vec> points;
    std::vector<int> symbols; // sigma_1..sigma_n as realized
    bool escaped = false;
    long escape_index = -1;
    long n = 0;
    long burn_in = 0;
};

// x_n = w_{sigma_n}(x_{n-1}); the newest symbol is applied last, the reversed
// order from finite-word composition. Aborts past |x| = 1e12.
Orbit run_orbit(const IFSystem &ifs, const OrbitConfig &cfg);

struct OmegaEstimate {
    PointCloud cloud;
    double max_abs = 0.0;
    std::vector<std::pair<double, long>> radius_counts; // points with |x| > r
    long burn_in = 0;
    long tail_points = 0;
};

OmegaEstimate omega_limit(const Space &sp, const Orbit &orbit, long burn_in, double prune_eps);

struct BurninSample {
    long burn_in;
    size_t cloud_size;
    double d_h_vs_main; // Hausdorff distance against the headline estimate
};

struct ChaosReport {
    bool pass = false;
    std::string reason;
    double d_h = 0.0;
    double excess_omega_to_ref = 0.0;
    double excess_ref_to_omega = 0.0;
    OmegaEstimate omega;
    std::vector<BurninSample> burnin_sensitivity; // m in {n/10, n/4, n/2}
};

ChaosReport chaos_vs_attractor(const IFSystem &ifs, const OrbitConfig &cfg,
                               const PointCloud &reference, double tol, double prune_eps);

struct TrialResult {
    uint64_t seed;
    bool disjunctive_upto_k = false;
    bool escaped = false;
    double d_h_vs_ref = 0.0;
    bool pass = false;
};

struct StochasticRunReport {
    std::vector<TrialResult> trials;
    int passes = 0;
    int disjunctive_passes = 0;
    double pooled_d_h = 0.0; // pooled omega estimate vs reference
    bool has_reference = false;
};

// Runs `trials` independent seeded orbits (seed, seed+1, ...), checks
// disjunctivity of each realized prefix up to k_disj, and pools the omega
// estimates against the reference when one is given.
StochasticRunReport stochastic_driver_run(const IFSystem &ifs, const Vec &x0,
                                          const DriverSpec &driver, long n, int trials,
                                          uint64_t seed, int k_disj,
                                          const PointCloud *reference, double tol,
                                          double prune_eps);

} // namespace ifslab
