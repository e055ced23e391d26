#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ifslab/hyperspace.hpp"
#include "ifslab/mapkit.hpp"
#include "ifslab/transport.hpp"

namespace ifslab {

// Finitely supported probability measure. Construction merges atom pairs
// closer than delta/2 (nearest pair first, weight-barycenter) and tracks the
// total mass-times-displacement the merging cost, which bounds the induced
// d_MK perturbation.
struct DiscreteMeasure {
    std::vector<Vec> atoms;
    std::vector<double> weights;
    double merge_radius = 0.0;
    double merge_cost = 0.0; // sum of mass * displacement over merge events

    static DiscreteMeasure build(const Space &sp, std::vector<Vec> atoms,
                                 std::vector<double> weights, double delta,
                                 size_t atom_budget = 100000);
    static DiscreteMeasure dirac(const Vec &x);

    size_t size() const { return atoms.size(); }
    Vec mean() const;
    // total weight of atoms with max-coordinate magnitude <= r
    double mass_within(double r) const;
};

DiscreteMeasure push_forward(const Space &sp, const MapSpec &map, const DiscreteMeasure &mu);

// M(mu) = sum_i p_i * pushforward(w_i, mu), then delta-merge.
DiscreteMeasure markov_step(const IFSystem &ifs, const DiscreteMeasure &mu, double delta,
                            size_t atom_budget = 100000);

struct MKResult {
    double distance = 0.0;
    TransportPlan plan;
};

MKResult monge_kantorovich(const Space &sp, const DiscreteMeasure &mu, const DiscreteMeasure &nu,
                           size_t cell_budget = 10000000);

struct ContractionReport {
    double before = 0.0;
    double after = 0.0;
    double ratio = 0.0;
    bool ratio_defined = false;
    // with Lipschitz constants: bound on the ratio, sum p_i Lip_i;
    // with per-map moduli: bound on `after`, sum p_i phi_i(before)
    double bound = 0.0;
    bool bound_is_modulus = false;
};

ContractionReport markov_contraction_ratio(const IFSystem &ifs, const DiscreteMeasure &mu,
                                           const DiscreteMeasure &nu,
                                           const std::vector<double> *lipschitz = nullptr,
                                           const std::vector<ComparisonFunction> *moduli = nullptr);

struct InvariantResult {
    DiscreteMeasure measure;
    std::vector<double> step_distances; // d_MK(mu_k, mu_{k+1})
    double residual = 0.0;              // d_MK(M mu_hat, mu_hat)
    bool converged = false;
    int iterations = 0;
};

InvariantResult invariant_measure(const IFSystem &ifs, const DiscreteMeasure &mu0, double tol,
                                  int max_iter, double delta, size_t atom_budget = 100000);

struct MannResult {
    DiscreteMeasure average; // nu_n = (1/n) sum_{k<n} M^k(mu0)
    double residual = 0.0;   // d_MK(M nu_n, nu_n)
    double merge_budget = 0.0;
    long n = 0;
};

MannResult mann_average(const IFSystem &ifs, const DiscreteMeasure &mu0, long n, double delta,
                        size_t atom_budget = 100000);

// mu_b o pi^{-1} truncated at depth k: enumerates all N^k words with exact
// cylinder weights when N^k <= 100000, otherwise draws i.i.d. words.
DiscreteMeasure bernoulli_pushforward(const IFSystem &ifs, int depth, long samples, uint64_t seed,
                                      double delta, size_t atom_budget = 100000);

PointCloud support_cloud(const Space &sp, const DiscreteMeasure &mu, double weight_floor);

} // namespace ifslab
