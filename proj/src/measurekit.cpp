#include "ifslab/measurekit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ifslab {

namespace {

struct CellKey {
    long long a, b, c;
    bool operator<(const CellKey &o) const {
        return std::tie(a, b, c) < std::tie(o.a, o.b, o.c);
    }
};

// Nearest-pair agglomeration: merge the closest pair (ties by lowest index)
// until every pair is at least delta/2 apart. Returns the accumulated
// mass * displacement, a bound on the induced d_MK perturbation.
double agglomerate(const Space &sp, std::vector<Vec> &atoms, std::vector<double> &weights,
                   double delta) {
    if (delta <= 0.0 || atoms.size() < 2) return 0.0;
    const double radius = delta / 2.0;
    const double cell = radius;

    std::vector<char> alive(atoms.size(), 1);
    std::map<CellKey, std::vector<int>> cells;
    auto key_of = [&](const Vec &p) {
        CellKey k{0, 0, 0};
        k.a = static_cast<long long>(std::floor(p[0] / cell));
        if (sp.dim > 1) k.b = static_cast<long long>(std::floor(p[1] / cell));
        if (sp.dim > 2) k.c = static_cast<long long>(std::floor(p[2] / cell));
        return k;
    };
    // circle cells wrap modulo the cell count
    const long long ncells =
        sp.variant == SpaceVariant::circle ? std::max(1LL, static_cast<long long>(std::ceil(1.0 / cell))) : 0;

    using Cand = std::tuple<double, int, int>; // (distance, i, j), i < j
    std::priority_queue<Cand, std::vector<Cand>, std::greater<>> heap;

    auto push_candidates = [&](int idx) {
        const CellKey k = key_of(atoms[static_cast<size_t>(idx)]);
        for (long long da = -1; da <= 1; ++da)
            for (long long db = (sp.dim > 1 ? -1 : 0); db <= (sp.dim > 1 ? 1 : 0); ++db)
                for (long long dc = (sp.dim > 2 ? -1 : 0); dc <= (sp.dim > 2 ? 1 : 0); ++dc) {
                    CellKey nk{k.a + da, k.b + db, k.c + dc};
                    if (ncells > 0) nk.a = ((nk.a % ncells) + ncells) % ncells;
                    auto it = cells.find(nk);
                    if (it == cells.end()) continue;
                    for (int other : it->second) {
                        if (other == idx || !alive[static_cast<size_t>(other)]) continue;
                        const double d =
                            distance(sp, atoms[static_cast<size_t>(idx)], atoms[static_cast<size_t>(other)]);
                        if (d < radius)
                            heap.emplace(d, std::min(idx, other), std::max(idx, other));
                    }
                }
    };

    for (size_t i = 0; i < atoms.size(); ++i) {
        CellKey k = key_of(atoms[i]);
        if (ncells > 0) k.a = ((k.a % ncells) + ncells) % ncells;
        cells[k].push_back(static_cast<int>(i));
    }
    for (size_t i = 0; i < atoms.size(); ++i) push_candidates(static_cast<int>(i));

    double moved = 0.0;
    while (!heap.empty()) {
        const auto [d, i, j] = heap.top();
        heap.pop();
        if (!alive[static_cast<size_t>(i)] || !alive[static_cast<size_t>(j)]) continue;
        const double wi = weights[static_cast<size_t>(i)], wj = weights[static_cast<size_t>(j)];
        const double wsum = wi + wj;
        Vec b = atoms[static_cast<size_t>(i)];
        if (sp.variant == SpaceVariant::circle) {
            double dj = atoms[static_cast<size_t>(j)][0] - atoms[static_cast<size_t>(i)][0];
            dj -= std::round(dj); // representative in [-0.5, 0.5)
            b[0] = atoms[static_cast<size_t>(i)][0] + dj * (wj / wsum);
            b = wrap_point(sp, b);
        } else {
            for (int c = 0; c < sp.dim; ++c)
                b[c] = (wi * atoms[static_cast<size_t>(i)][c] + wj * atoms[static_cast<size_t>(j)][c]) / wsum;
        }
        moved += wi * distance(sp, atoms[static_cast<size_t>(i)], b) +
                 wj * distance(sp, atoms[static_cast<size_t>(j)], b);
        alive[static_cast<size_t>(i)] = 0;
        alive[static_cast<size_t>(j)] = 0;
        atoms.push_back(b);
        weights.push_back(wsum);
        alive.push_back(1);
        const int nid = static_cast<int>(atoms.size()) - 1;
        CellKey k = key_of(b);
        if (ncells > 0) k.a = ((k.a % ncells) + ncells) % ncells;
        cells[k].push_back(nid);
        push_candidates(nid);
    }

    std::vector<Vec> out_atoms;
    std::vector<double> out_weights;
    for (size_t i = 0; i < atoms.size(); ++i)
        if (alive[i]) {
            out_atoms.push_back(atoms[i]);
            out_weights.push_back(weights[i]);
        }
    atoms = std::move(out_atoms);
    weights = std::move(out_weights);
    return moved;
}

void sort_by_atom(std::vector<Vec> &atoms, std::vector<double> &weights) {
    std::vector<size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return atoms[a] < atoms[b]; });
    std::vector<Vec> na(atoms.size());
    std::vector<double> nw(atoms.size());
    for (size_t i = 0; i < order.size(); ++i) {
        na[i] = atoms[order[i]];
        nw[i] = weights[order[i]];
    }
    atoms = std::move(na);
    weights = std::move(nw);
}

// exact-duplicate combine (assumes sorted)
void combine_equal(std::vector<Vec> &atoms, std::vector<double> &weights) {
    std::vector<Vec> na;
    std::vector<double> nw;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (!na.empty() && na.back() == atoms[i])
            nw.back() += weights[i];
        else {
            na.push_back(atoms[i]);
            nw.push_back(weights[i]);
        }
    }
    atoms = std::move(na);
    weights = std::move(nw);
}

} // namespace

DiscreteMeasure DiscreteMeasure::build(const Space &sp, std::vector<Vec> atoms,
                                       std::vector<double> weights, double delta,
                                       size_t atom_budget) {
    if (atoms.empty() || atoms.size() != weights.size())
        throw ValidationError("measure needs matching nonempty atom and weight lists");
    for (double w : weights)
        if (!(w > 0.0)) throw ValidationError("measure weights must be strictly positive");
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("measure weights sum to " + std::to_string(sum) + ", expected 1");

    sort_by_atom(atoms, weights);
    combine_equal(atoms, weights);
    DiscreteMeasure mu;
    mu.merge_radius = delta;
    mu.merge_cost = agglomerate(sp, atoms, weights, delta);
    sort_by_atom(atoms, weights);
    if (atoms.size() > atom_budget)
        throw BudgetError("measure atom budget exceeded (" + std::to_string(atoms.size()) +
                          " atoms); merge radius too small");
    mu.atoms = std::move(atoms);
    mu.weights = std::move(weights);
    return mu;
}

DiscreteMeasure DiscreteMeasure::dirac(const Vec &x) {
    DiscreteMeasure mu;
    mu.atoms = {x};
    mu.weights = {1.0};
    return mu;
}

Vec DiscreteMeasure::mean() const {
    Vec m;
    m.dim = atoms.empty() ? 1 : atoms[0].dim;
    for (size_t i = 0; i < atoms.size(); ++i)
        for (int c = 0; c < 3; ++c) m[c] += weights[i] * atoms[i][c];
    return m;
}

double DiscreteMeasure::mass_within(double r) const {
    double mass = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        double mag = 0.0;
        for (int c = 0; c < atoms[i].dim; ++c) mag = std::max(mag, std::fabs(atoms[i][c]));
        if (mag <= r) mass += weights[i];
    }
    return mass;
}

DiscreteMeasure push_forward(const Space &sp, const MapSpec &map, const DiscreteMeasure &mu) {
    std::vector<Vec> atoms(mu.atoms.size());
    const long n = static_cast<long>(mu.atoms.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        atoms[static_cast<size_t>(i)] = map.apply(sp, mu.atoms[static_cast<size_t>(i)]);
    std::vector<double> weights = mu.weights;
    sort_by_atom(atoms, weights);
    combine_equal(atoms, weights);
    DiscreteMeasure out;
    out.merge_radius = 0.0;
    out.atoms = std::move(atoms);
    out.weights = std::move(weights);
    return out;
}

DiscreteMeasure markov_step(const IFSystem &ifs, const DiscreteMeasure &mu, double delta,
                            size_t atom_budget) {
    if (!ifs.has_weights()) throw ValidationError("markov_step needs IFS weights");
    ifs.validate();
    std::vector<Vec> atoms;
    std::vector<double> weights;
    atoms.reserve(mu.size() * static_cast<size_t>(ifs.size()));
    for (int i = 0; i < ifs.size(); ++i) {
        const DiscreteMeasure pushed = push_forward(ifs.space, ifs.maps[static_cast<size_t>(i)], mu);
        for (size_t j = 0; j < pushed.size(); ++j) {
            atoms.push_back(pushed.atoms[j]);
            weights.push_back(ifs.weights[static_cast<size_t>(i)] * pushed.weights[j]);
        }
    }
    sort_by_atom(atoms, weights);
    combine_equal(atoms, weights);
    DiscreteMeasure out;
    out.merge_radius = delta;
    out.merge_cost = agglomerate(ifs.space, atoms, weights, delta);
    sort_by_atom(atoms, weights);
    if (atoms.size() > atom_budget)
        throw BudgetError("markov_step atom budget exceeded; merge radius too small");
    out.atoms = std::move(atoms);
    out.weights = std::move(weights);
    return out;
}

MKResult monge_kantorovich(const Space &sp, const DiscreteMeasure &mu, const DiscreteMeasure &nu,
                           size_t cell_budget) {
    MKResult r;
    r.plan = solve_transport(sp, mu.atoms, mu.weights, nu.atoms, nu.weights, cell_budget);
    r.distance = r.plan.cost;
    std::string why;
    if (!verify_plan(sp, mu.atoms, mu.weights, nu.atoms, nu.weights, r.plan, 1e-10, 1e-10, 1e-9,
                     &why))
        throw NumericError("transport optimality certificate failed: " + why);
    return r;
}

ContractionReport markov_contraction_ratio(const IFSystem &ifs, const DiscreteMeasure &mu,
                                           const DiscreteMeasure &nu,
                                           const std::vector<double> *lipschitz,
                                           const std::vector<ComparisonFunction> *moduli) {
    ContractionReport rep;
    rep.before = monge_kantorovich(ifs.space, mu, nu).distance;
    const DiscreteMeasure mmu = markov_step(ifs, mu, 0.0);
    const DiscreteMeasure mnu = markov_step(ifs, nu, 0.0);
    rep.after = monge_kantorovich(ifs.space, mmu, mnu).distance;
    if (rep.before > 0.0) {
        rep.ratio = rep.after / rep.before;
        rep.ratio_defined = true;
    }
    if (moduli) {
        // d_MK(M mu, M nu) <= sum_i p_i phi_i(d_MK(mu, nu))
        if (static_cast<int>(moduli->size()) != ifs.size())
            throw ValidationError("need one modulus per map");
        rep.bound = 0.0;
        for (int i = 0; i < ifs.size(); ++i)
            rep.bound += ifs.weights[static_cast<size_t>(i)] *
                         (*moduli)[static_cast<size_t>(i)].eval_unclamped(rep.before);
        rep.bound_is_modulus = true;
    } else if (lipschitz) {
        rep.bound = 0.0;
        for (int i = 0; i < ifs.size(); ++i)
            rep.bound += ifs.weights[static_cast<size_t>(i)] * (*lipschitz)[static_cast<size_t>(i)];
    }
    return rep;
}

InvariantResult invariant_measure(const IFSystem &ifs, const DiscreteMeasure &mu0, double tol,
                                  int max_iter, double delta, size_t atom_budget) {
    if (!(tol > 0.0)) throw ValidationError("invariant_measure needs tol > 0");
    InvariantResult r;
    r.measure = mu0;
    for (int k = 0; k < max_iter; ++k) {
        const DiscreteMeasure next = markov_step(ifs, r.measure, delta, atom_budget);
        const double d = monge_kantorovich(ifs.space, r.measure, next).distance;
        r.step_distances.push_back(d);
        r.measure = next;
        r.iterations = k + 1;
        if (d <= tol) {
            r.converged = true;
            break;
        }
    }
    const DiscreteMeasure image = markov_step(ifs, r.measure, 0.0, atom_budget);
    r.residual = monge_kantorovich(ifs.space, r.measure, image).distance;
    return r;
}

MannResult mann_average(const IFSystem &ifs, const DiscreteMeasure &mu0, long n, double delta,
                        size_t atom_budget) {
    if (n < 1) throw ValidationError("mann_average needs n >= 1");
    std::vector<Vec> sum_atoms = mu0.atoms;
    std::vector<double> sum_weights = mu0.weights; // unnormalized running sum
    double merge_moved = 0.0;
    DiscreteMeasure cur = mu0;
    for (long k = 1; k < n; ++k) {
        cur = markov_step(ifs, cur, delta, atom_budget);
        sum_atoms.insert(sum_atoms.end(), cur.atoms.begin(), cur.atoms.end());
        sum_weights.insert(sum_weights.end(), cur.weights.begin(), cur.weights.end());
        sort_by_atom(sum_atoms, sum_weights);
        combine_equal(sum_atoms, sum_weights);
        merge_moved += agglomerate(ifs.space, sum_atoms, sum_weights, delta);
        if (sum_atoms.size() > atom_budget)
            throw BudgetError("mann_average atom budget exceeded; merge radius too small");
    }
    MannResult out;
    out.n = n;
    sort_by_atom(sum_atoms, sum_weights);
    for (double &w : sum_weights) w /= static_cast<double>(n);
    out.average.atoms = std::move(sum_atoms);
    out.average.weights = std::move(sum_weights);
    out.average.merge_radius = delta;
    out.average.merge_cost = merge_moved;
    // cur's own merges also perturb the average; the reported budget is the
    // normalized total displacement plus the residual comparison overhead
    out.merge_budget = 2.0 * merge_moved / static_cast<double>(n);
    const DiscreteMeasure image = markov_step(ifs, out.average, 0.0, atom_budget);
    out.residual = monge_kantorovich(ifs.space, out.average, image).distance;
    return out;
}

DiscreteMeasure bernoulli_pushforward(const IFSystem &ifs, int depth, long samples, uint64_t seed,
                                      double delta, size_t atom_budget) {
    ifs.validate();
    if (!ifs.has_weights()) throw ValidationError("bernoulli_pushforward needs IFS weights");
    if (depth < 1) throw ValidationError("bernoulli_pushforward needs depth >= 1");
    const int N = ifs.size();
    const Vec base = ifs.space.bounds.center();

    double nk = 1.0;
    for (int i = 0; i < depth; ++i) nk *= N;
    const bool exact = nk <= 100000.0;

    std::vector<Vec> atoms;
    std::vector<double> weights;
    if (exact) {
        const long total = static_cast<long>(nk);
        atoms.resize(static_cast<size_t>(total));
        weights.resize(static_cast<size_t>(total));
#pragma omp parallel for schedule(static)
        for (long w = 0; w < total; ++w) {
            // decode the word from its lexicographic rank
            std::vector<int> word(static_cast<size_t>(depth));
            long x = w;
            double cyl = 1.0;
            for (int i = depth - 1; i >= 0; --i) {
                word[static_cast<size_t>(i)] = static_cast<int>(x % N) + 1;
                x /= N;
            }
            for (int s : word) cyl *= ifs.weights[static_cast<size_t>(s - 1)];
            Vec p = base;
            for (size_t j = word.size(); j-- > 0;)
                p = apply_map(ifs, word[j] - 1, p);
            atoms[static_cast<size_t>(w)] = p;
            weights[static_cast<size_t>(w)] = cyl;
        }
    } else {
        if (samples < 1) throw ValidationError("sampled bernoulli_pushforward needs samples >= 1");
        if (static_cast<size_t>(samples) > atom_budget)
            throw BudgetError("bernoulli_pushforward sample budget exceeded");
        atoms.resize(static_cast<size_t>(samples));
        weights.assign(static_cast<size_t>(samples), 1.0 / static_cast<double>(samples));
        // one independent generator per sample keeps the loop order-free
#pragma omp parallel for schedule(static)
        for (long s = 0; s < samples; ++s) {
            Rng rng(seed + static_cast<uint64_t>(s) * 0x9e3779b9ULL);
            Vec p = base;
            std::vector<int> word(static_cast<size_t>(depth));
            for (int i = 0; i < depth; ++i) word[static_cast<size_t>(i)] = rng.categorical(ifs.weights) + 1;
            for (size_t j = word.size(); j-- > 0;)
                p = apply_map(ifs, word[j] - 1, p);
            atoms[static_cast<size_t>(s)] = p;
        }
    }
    return DiscreteMeasure::build(ifs.space, std::move(atoms), std::move(weights), delta,
                                  atom_budget);
}

PointCloud support_cloud(const Space &sp, const DiscreteMeasure &mu, double weight_floor) {
    double max_w = 0.0;
    for (double w : mu.weights) max_w = std::max(max_w, w);
    if (weight_floor < 0.0 || weight_floor >= max_w)
        throw ValidationError("weight_floor must lie in [0, max weight)");
    std::vector<Vec> pts;
    for (size_t i = 0; i < mu.size(); ++i)
        if (mu.weights[i] > weight_floor) pts.push_back(mu.atoms[i]);
    if (pts.empty()) throw ValidationError("support_cloud: no atoms above the weight floor");
    return PointCloud::build(sp, std::move(pts), mu.merge_radius);
}

} // namespace ifslab
