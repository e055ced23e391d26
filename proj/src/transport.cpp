#include "ifslab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ifslab {

namespace {

struct Basis {
    // spanning tree on nodes 0..m-1 (rows) and m..m+n-1 (cols)
    int m, n;
    std::vector<int> cell_i, cell_j; // basic cells
    std::vector<double> flow;

    int arcs() const { return static_cast<int>(cell_i.size()); }

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(static_cast<size_t>(m + n));
        for (int a = 0; a < arcs(); ++a) {
            adj[static_cast<size_t>(cell_i[static_cast<size_t>(a)])].push_back(a);
            adj[static_cast<size_t>(m + cell_j[static_cast<size_t>(a)])].push_back(a);
        }
        return adj;
    }
};

} // namespace

TransportPlan solve_transport(const Space &sp, const std::vector<Vec> &src_atoms,
                              const std::vector<double> &src_weights,
                              const std::vector<Vec> &dst_atoms,
                              const std::vector<double> &dst_weights, size_t cell_budget) {
    const int m = static_cast<int>(src_atoms.size());
    const int n = static_cast<int>(dst_atoms.size());
    if (m == 0 || n == 0) throw ValidationError("transport needs nonempty measures");
    if (src_atoms.size() * dst_atoms.size() > cell_budget)
        throw BudgetError("transport instance exceeds the cell budget");
    double sum_a = std::accumulate(src_weights.begin(), src_weights.end(), 0.0);
    double sum_b = std::accumulate(dst_weights.begin(), dst_weights.end(), 0.0);
    if (std::fabs(sum_a - sum_b) > 1e-9 || std::fabs(sum_a - 1.0) > 1e-9)
        throw ValidationError("transport marginals must both be probability weights");

    // sort both sides lexicographically; NW corner on this order is already
    // optimal for 1-D euclidean costs
    std::vector<int> ord_s(static_cast<size_t>(m)), ord_d(static_cast<size_t>(n));
    std::iota(ord_s.begin(), ord_s.end(), 0);
    std::iota(ord_d.begin(), ord_d.end(), 0);
    std::stable_sort(ord_s.begin(), ord_s.end(), [&](int a, int b) {
        return src_atoms[static_cast<size_t>(a)] < src_atoms[static_cast<size_t>(b)];
    });
    std::stable_sort(ord_d.begin(), ord_d.end(), [&](int a, int b) {
        return dst_atoms[static_cast<size_t>(a)] < dst_atoms[static_cast<size_t>(b)];
    });

    auto cost = [&](int i, int j) {
        return distance(sp, src_atoms[static_cast<size_t>(ord_s[static_cast<size_t>(i)])],
                        dst_atoms[static_cast<size_t>(ord_d[static_cast<size_t>(j)])]);
    };

    // northwest corner initial basis (m+n-1 cells, zero flows possible)
    Basis basis;
    basis.m = m;
    basis.n = n;
    {
        std::vector<double> a(src_weights.size()), b(dst_weights.size());
        for (int i = 0; i < m; ++i) a[static_cast<size_t>(i)] = src_weights[static_cast<size_t>(ord_s[static_cast<size_t>(i)])];
        for (int j = 0; j < n; ++j) b[static_cast<size_t>(j)] = dst_weights[static_cast<size_t>(ord_d[static_cast<size_t>(j)])];
        int i = 0, j = 0;
        while (true) {
            const double x = (i == m - 1 && j == n - 1)
                                 ? std::max(a[static_cast<size_t>(i)], b[static_cast<size_t>(j)])
                                 : std::min(a[static_cast<size_t>(i)], b[static_cast<size_t>(j)]);
            basis.cell_i.push_back(i);
            basis.cell_j.push_back(j);
            basis.flow.push_back(std::max(0.0, x));
            a[static_cast<size_t>(i)] -= x;
            b[static_cast<size_t>(j)] -= x;
            if (i == m - 1 && j == n - 1) break;
            if (a[static_cast<size_t>(i)] <= b[static_cast<size_t>(j)] && i < m - 1)
                ++i;
            else if (j < n - 1)
                ++j;
            else
                ++i;
        }
    }

    const long total_cells = static_cast<long>(m) * static_cast<long>(n);
    std::vector<double> u(static_cast<size_t>(m)), v(static_cast<size_t>(n));
    std::vector<int> parent_node(static_cast<size_t>(m + n));
    std::vector<int> parent_arc(static_cast<size_t>(m + n));
    std::vector<int> order;
    order.reserve(static_cast<size_t>(m + n));

    double max_cost = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) max_cost = std::max(max_cost, cost(i, j));
    const double tol = 1e-12 * std::max(1.0, max_cost);

    const long hard_cap = 2000L * (m + n) + 20000L;
    const long bland_after = 200L * (m + n) + 2000L;
    long pivot = 0;
    long zero_streak = 0; // consecutive degenerate pivots force Bland's rule
    for (;; ++pivot) {
        if (pivot > hard_cap) throw NumericError("transport simplex exceeded the pivot cap");

        // duals from the basis tree, rooted at row 0
        const auto adj = basis.adjacency();
        order.clear();
        std::vector<char> seen(static_cast<size_t>(m + n), 0);
        order.push_back(0);
        seen[0] = 1;
        parent_arc[0] = -1;
        parent_node[0] = -1;
        for (size_t q = 0; q < order.size(); ++q) {
            const int node = order[q];
            for (int a : adj[static_cast<size_t>(node)]) {
                const int other = node == basis.cell_i[static_cast<size_t>(a)]
                                      ? m + basis.cell_j[static_cast<size_t>(a)]
                                      : basis.cell_i[static_cast<size_t>(a)];
                if (seen[static_cast<size_t>(other)]) continue;
                seen[static_cast<size_t>(other)] = 1;
                parent_node[static_cast<size_t>(other)] = node;
                parent_arc[static_cast<size_t>(other)] = a;
                order.push_back(other);
            }
        }
        if (order.size() != static_cast<size_t>(m + n))
            throw NumericError("transport simplex basis lost connectivity");
        u[0] = 0.0;
        for (size_t q = 1; q < order.size(); ++q) {
            const int node = order[q];
            const int a = parent_arc[static_cast<size_t>(node)];
            const double c = cost(basis.cell_i[static_cast<size_t>(a)], basis.cell_j[static_cast<size_t>(a)]);
            if (node >= m)
                v[static_cast<size_t>(node - m)] = c - u[static_cast<size_t>(basis.cell_i[static_cast<size_t>(a)])];
            else
                u[static_cast<size_t>(node)] = c - v[static_cast<size_t>(basis.cell_j[static_cast<size_t>(a)])];
        }

        // entering arc
        const bool bland = pivot > bland_after || zero_streak > 2L * (m + n);
        double best_red = -tol;
        long best_cell = -1;
        if (bland) {
            for (long f = 0; f < total_cells; ++f) {
                const int i = static_cast<int>(f / n), j = static_cast<int>(f % n);
                const double red = cost(i, j) - u[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
                if (red < -tol) {
                    best_cell = f;
                    best_red = red;
                    break;
                }
            }
        } else {
            double g_red = -tol;
            long g_cell = -1;
#ifdef _OPENMP
#pragma omp parallel
            {
                double l_red = -tol;
                long l_cell = -1;
#pragma omp for schedule(static) nowait
                for (long f = 0; f < total_cells; ++f) {
                    const int i = static_cast<int>(f / n), j = static_cast<int>(f % n);
                    const double red = cost(i, j) - u[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
                    if (red < l_red || (red == l_red && f < l_cell)) {
                        l_red = red;
                        l_cell = f;
                    }
                }
#pragma omp critical
                {
                    if (l_cell >= 0 &&
                        (g_cell < 0 || l_red < g_red || (l_red == g_red && l_cell < g_cell))) {
                        g_red = l_red;
                        g_cell = l_cell;
                    }
                }
            }
#else
            for (long f = 0; f < total_cells; ++f) {
                const int i = static_cast<int>(f / n), j = static_cast<int>(f % n);
                const double red = cost(i, j) - u[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
                if (red < g_red || (red == g_red && g_cell >= 0 && f < g_cell)) {
                    g_red = red;
                    g_cell = f;
                }
            }
#endif
            best_cell = g_cell;
            best_red = g_red;
        }
        (void)best_red;
        if (best_cell < 0) break; // optimal

        const int ei = static_cast<int>(best_cell / n);
        const int ej = static_cast<int>(best_cell % n);

        // cycle: walk the tree path from the entering column node to the
        // entering row node; arcs at even walk positions lose theta
        std::vector<int> path_arcs;
        {
            // path via lowest common ancestor using parent pointers
            std::vector<int> up_from_col, up_from_row;
            std::vector<char> mark(static_cast<size_t>(m + n), 0);
            for (int node = m + ej; node != -1; node = parent_node[static_cast<size_t>(node)])
                mark[static_cast<size_t>(node)] = 1;
            int meet = ei;
            while (!mark[static_cast<size_t>(meet)]) meet = parent_node[static_cast<size_t>(meet)];
            for (int node = m + ej; node != meet; node = parent_node[static_cast<size_t>(node)])
                up_from_col.push_back(parent_arc[static_cast<size_t>(node)]);
            for (int node = ei; node != meet; node = parent_node[static_cast<size_t>(node)])
                up_from_row.push_back(parent_arc[static_cast<size_t>(node)]);
            path_arcs = up_from_col;
            path_arcs.insert(path_arcs.end(), up_from_row.rbegin(), up_from_row.rend());
        }

        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        for (size_t t = 0; t < path_arcs.size(); t += 2) {
            const int a = path_arcs[t];
            const double fl = basis.flow[static_cast<size_t>(a)];
            const long cell = static_cast<long>(basis.cell_i[static_cast<size_t>(a)]) * n +
                              basis.cell_j[static_cast<size_t>(a)];
            const long lcell = leaving < 0
                                   ? -1
                                   : static_cast<long>(basis.cell_i[static_cast<size_t>(leaving)]) * n +
                                         basis.cell_j[static_cast<size_t>(leaving)];
            if (fl < theta || (fl == theta && (leaving < 0 || cell < lcell))) {
                theta = fl;
                leaving = a;
            }
        }
        if (leaving < 0) throw NumericError("transport simplex found no leaving arc");
        zero_streak = theta <= 1e-15 ? zero_streak + 1 : 0;

        for (size_t t = 0; t < path_arcs.size(); ++t) {
            const int a = path_arcs[t];
            basis.flow[static_cast<size_t>(a)] += (t % 2 == 0) ? -theta : theta;
            basis.flow[static_cast<size_t>(a)] = std::max(0.0, basis.flow[static_cast<size_t>(a)]);
        }
        basis.cell_i[static_cast<size_t>(leaving)] = ei;
        basis.cell_j[static_cast<size_t>(leaving)] = ej;
        basis.flow[static_cast<size_t>(leaving)] = theta;
    }

    TransportPlan plan;
    plan.pivots = pivot;
    plan.dual_u.resize(static_cast<size_t>(m));
    plan.dual_v.resize(static_cast<size_t>(n));
    for (int i = 0; i < m; ++i) plan.dual_u[static_cast<size_t>(ord_s[static_cast<size_t>(i)])] = u[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) plan.dual_v[static_cast<size_t>(ord_d[static_cast<size_t>(j)])] = v[static_cast<size_t>(j)];
    for (int a = 0; a < basis.arcs(); ++a) {
        const double fl = basis.flow[static_cast<size_t>(a)];
        if (fl <= 0.0) continue;
        PlanEntry e;
        e.src = ord_s[static_cast<size_t>(basis.cell_i[static_cast<size_t>(a)])];
        e.dst = ord_d[static_cast<size_t>(basis.cell_j[static_cast<size_t>(a)])];
        e.mass = fl;
        plan.cost += fl * distance(sp, src_atoms[static_cast<size_t>(e.src)],
                                   dst_atoms[static_cast<size_t>(e.dst)]);
        plan.entries.push_back(e);
    }
    std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry &x, const PlanEntry &y) {
        return x.src != y.src ? x.src < y.src : x.dst < y.dst;
    });
    return plan;
}

// Tolerances are relative beyond unit scale: atoms far apart (costs >> 1)
// carry proportionally larger rounding in the duals.
bool verify_plan(const Space &sp, const std::vector<Vec> &src_atoms,
                 const std::vector<double> &src_weights, const std::vector<Vec> &dst_atoms,
                 const std::vector<double> &dst_weights, const TransportPlan &plan,
                 double tol_marginal, double tol_cost, double tol_slack, std::string *why) {
    auto fail = [&](const std::string &msg) {
        if (why) *why = msg;
        return false;
    };
    double scale = 1.0;
    for (size_t i = 0; i < src_atoms.size(); ++i)
        for (size_t j = 0; j < dst_atoms.size(); ++j)
            scale = std::max(scale, distance(sp, src_atoms[i], dst_atoms[j]));

    std::vector<double> row(src_weights.size(), 0.0), col(dst_weights.size(), 0.0);
    double cost = 0.0;
    for (const auto &e : plan.entries) {
        if (e.mass < 0.0) return fail("negative mass in plan");
        row[static_cast<size_t>(e.src)] += e.mass;
        col[static_cast<size_t>(e.dst)] += e.mass;
        cost += e.mass * distance(sp, src_atoms[static_cast<size_t>(e.src)],
                                  dst_atoms[static_cast<size_t>(e.dst)]);
    }
    for (size_t i = 0; i < row.size(); ++i)
        if (std::fabs(row[i] - src_weights[i]) > tol_marginal)
            return fail("row marginal mismatch at source " + std::to_string(i));
    for (size_t j = 0; j < col.size(); ++j)
        if (std::fabs(col[j] - dst_weights[j]) > tol_marginal)
            return fail("column marginal mismatch at target " + std::to_string(j));
    if (std::fabs(cost - plan.cost) > tol_cost * scale)
        return fail("stored cost differs from recomputed");

    // dual feasibility + complementary slackness
    for (size_t i = 0; i < src_atoms.size(); ++i)
        for (size_t j = 0; j < dst_atoms.size(); ++j) {
            const double red =
                distance(sp, src_atoms[i], dst_atoms[j]) - plan.dual_u[i] - plan.dual_v[j];
            if (red < -tol_slack * scale)
                return fail("dual infeasibility at cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
        }
    for (const auto &e : plan.entries) {
        const double red = distance(sp, src_atoms[static_cast<size_t>(e.src)],
                                    dst_atoms[static_cast<size_t>(e.dst)]) -
                           plan.dual_u[static_cast<size_t>(e.src)] -
                           plan.dual_v[static_cast<size_t>(e.dst)];
        if (e.mass > tol_marginal && std::fabs(red) > tol_slack * scale)
            return fail("complementary slackness violated on a positive-flow cell");
    }
    return true;
}

} // namespace ifslab
