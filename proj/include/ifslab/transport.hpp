#pragma once

#include <string>
#include <vector>

#include "ifslab/geometry.hpp"

namespace ifslab {

struct PlanEntry {
    int src;
    int dst;
    double mass;
};

struct TransportPlan {
    std::vector<PlanEntry> entries;
    double cost = 0.0;
    std::vector<double> dual_u; // per source
    std::vector<double> dual_v; // per target
    long pivots = 0;
};

// Exact finite transportation problem with cost d(x, y). Northwest-corner
// start on lexicographically sorted atoms, then simplex pivots with
// most-negative entering and lowest-index tie breaking; falls back to
// Bland's rule if degeneracy stalls progress.
TransportPlan solve_transport(const Space &sp, const std::vector<Vec> &src_atoms,
                              const std::vector<double> &src_weights,
                              const std::vector<Vec> &dst_atoms,
                              const std::vector<double> &dst_weights,
                              size_t cell_budget = 10000000);

// Complementary-slackness certificate: marginals within tol_marginal,
// recomputed cost within tol_cost, all reduced costs >= -tol_slack and
// ~zero on positive-flow cells.
bool verify_plan(const Space &sp, const std::vector<Vec> &src_atoms,
                 const std::vector<double> &src_weights, const std::vector<Vec> &dst_atoms,
                 const std::vector<double> &dst_weights, const TransportPlan &plan,
                 double tol_marginal, double tol_cost, double tol_slack,
                 std::string *why = nullptr);

} // namespace ifslab
