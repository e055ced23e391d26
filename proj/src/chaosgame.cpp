#include "ifslab/chaosgame.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ifslab {

namespace {
constexpr double kEscapeThreshold = 1e12;
}

Orbit run_orbit(const IFSystem &ifs, const OrbitConfig &cfg) {
    ifs.validate();
    if (cfg.n < 1) throw ValidationError("orbit needs n >= 1");
    if (cfg.stride < 1) throw ValidationError("orbit stride must be >= 1");
    const long burn = cfg.burn_in >= 0 ? cfg.burn_in : std::max<long>(1000, cfg.n / 100);
    if (burn >= cfg.n) throw ValidationError("burn_in must be smaller than n");
    if (!ifs.space.bounds.inflated(10.0).contains(cfg.x0) &&
        ifs.space.variant == SpaceVariant::euclidean)
        throw ValidationError("orbit start lies outside the inflated domain");

    Orbit orbit;
    orbit.n = cfg.n;
    orbit.burn_in = burn;
    orbit.symbols.reserve(static_cast<size_t>(cfg.n));
    orbit.indices.reserve(static_cast<size_t>(cfg.n / cfg.stride) + 2);
    orbit.points.reserve(static_cast<size_t>(cfg.n / cfg.stride) + 2);

    Driver driver(cfg.driver);
    Vec x = cfg.x0;
    orbit.indices.push_back(0);
    orbit.points.push_back(x);
    for (long k = 1; k <= cfg.n; ++k) {
        const int s = driver.next();
        if (s < 1 || s > ifs.size())
            throw ValidationError("driver produced symbol " + std::to_string(s) +
                                  " outside 1.." + std::to_string(ifs.size()));
        orbit.symbols.push_back(s);
        x = apply_map(ifs, s - 1, x);
        double mag = 0.0;
        for (int c = 0; c < ifs.space.dim; ++c) mag = std::max(mag, std::fabs(x[c]));
        if (!std::isfinite(mag) || mag > kEscapeThreshold) {
            orbit.escaped = true;
            orbit.escape_index = k;
            return orbit;
        }
        if (k % cfg.stride == 0 || k == cfg.n) {
            orbit.indices.push_back(k);
            orbit.points.push_back(x);
        }
    }
    return orbit;
}

OmegaEstimate omega_limit(const Space &sp, const Orbit &orbit, long burn_in, double prune_eps) {
    std::vector<Vec> tail;
    for (size_t i = 0; i < orbit.indices.size(); ++i)
        if (orbit.indices[i] > burn_in) tail.push_back(orbit.points[i]);
    if (tail.empty()) throw ValidationError("omega_limit: empty tail (burn_in too large)");

    OmegaEstimate est;
    est.burn_in = burn_in;
    est.tail_points = static_cast<long>(tail.size());
    for (const auto &p : tail) {
        double mag = 0.0;
        for (int c = 0; c < sp.dim; ++c) mag = std::max(mag, std::fabs(p[c]));
        est.max_abs = std::max(est.max_abs, mag);
    }
    for (double r = 1.0; r <= kEscapeThreshold; r *= 100.0) {
        long count = 0;
        for (const auto &p : tail) {
            double mag = 0.0;
            for (int c = 0; c < sp.dim; ++c) mag = std::max(mag, std::fabs(p[c]));
            if (mag > r) ++count;
        }
        est.radius_counts.emplace_back(r, count);
        if (count == 0) break;
    }
    est.cloud = PointCloud::build(sp, std::move(tail), prune_eps);
    return est;
}

ChaosReport chaos_vs_attractor(const IFSystem &ifs, const OrbitConfig &cfg,
                               const PointCloud &reference, double tol, double prune_eps) {
    if (reference.points.empty()) throw ValidationError("chaos_vs_attractor needs a reference");
    ChaosReport rep;
    const Orbit orbit = run_orbit(ifs, cfg);
    if (orbit.escaped) {
        rep.pass = false;
        rep.reason = "orbit unbounded (escape at step " + std::to_string(orbit.escape_index) + ")";
        return rep;
    }
    const long burn = orbit.burn_in;
    rep.omega = omega_limit(ifs.space, orbit, burn, prune_eps);
    rep.excess_omega_to_ref = excess(ifs.space, rep.omega.cloud, reference);
    rep.excess_ref_to_omega = excess(ifs.space, reference, rep.omega.cloud);
    rep.d_h = std::max(rep.excess_omega_to_ref, rep.excess_ref_to_omega);
    rep.pass = rep.d_h <= tol;
    if (!rep.pass) rep.reason = "omega-limit estimate differs from reference beyond tol";

    // sensitivity across burn-in choices, so a drifting (semiattractor style)
    // tail is visible in the report
    for (long m : {cfg.n / 10, cfg.n / 4, cfg.n / 2}) {
        if (m <= 0 || m >= cfg.n) continue;
        const OmegaEstimate alt = omega_limit(ifs.space, orbit, m, prune_eps);
        BurninSample s;
        s.burn_in = m;
        s.cloud_size = alt.cloud.size();
        s.d_h_vs_main = hausdorff(ifs.space, alt.cloud, rep.omega.cloud);
        rep.burnin_sensitivity.push_back(s);
    }
    return rep;
}

StochasticRunReport stochastic_driver_run(const IFSystem &ifs, const Vec &x0,
                                          const DriverSpec &driver, long n, int trials,
                                          uint64_t seed, int k_disj, const PointCloud *reference,
                                          double tol, double prune_eps) {
    if (trials < 1) throw ValidationError("stochastic_driver_run needs trials >= 1");
    StochasticRunReport rep;
    rep.trials.resize(static_cast<size_t>(trials));
    rep.has_reference = reference != nullptr;

    std::vector<Orbit> orbits(static_cast<size_t>(trials));
    std::vector<std::string> errors(static_cast<size_t>(trials));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        OrbitConfig cfg;
        cfg.x0 = x0;
        cfg.driver = driver;
        cfg.driver.seed = seed + static_cast<uint64_t>(t);
        cfg.n = n;
        try {
            orbits[static_cast<size_t>(t)] = run_orbit(ifs, cfg);
        } catch (const std::exception &e) {
            errors[static_cast<size_t>(t)] = e.what();
        }
    }
    for (const auto &err : errors)
        if (!err.empty()) throw NumericError("trial orbit failed: " + err);

    std::vector<Vec> pooled;
    for (int t = 0; t < trials; ++t) {
        const Orbit &orbit = orbits[static_cast<size_t>(t)];
        TrialResult &tr = rep.trials[static_cast<size_t>(t)];
        tr.seed = seed + static_cast<uint64_t>(t);
        tr.escaped = orbit.escaped;
        Word prefix;
        prefix.alphabet = ifs.size();
        prefix.symbols = orbit.symbols;
        tr.disjunctive_upto_k = is_disjunctive_upto(prefix, k_disj).ok;
        if (tr.disjunctive_upto_k) ++rep.disjunctive_passes;
        if (!orbit.escaped && reference) {
            const OmegaEstimate est = omega_limit(ifs.space, orbit, orbit.burn_in, prune_eps);
            tr.d_h_vs_ref = hausdorff(ifs.space, est.cloud, *reference);
            tr.pass = tr.d_h_vs_ref <= tol;
            if (tr.pass) ++rep.passes;
            pooled.insert(pooled.end(), est.cloud.points.begin(), est.cloud.points.end());
        }
    }
    if (reference && !pooled.empty()) {
        const PointCloud pooled_cloud = PointCloud::build(ifs.space, std::move(pooled), prune_eps);
        rep.pooled_d_h = hausdorff(ifs.space, pooled_cloud, *reference);
    }
    return rep;
}

} // namespace ifslab
