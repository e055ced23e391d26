#include "ifslab/mapkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ifslab {

namespace {

// Largest eigenvalue of a symmetric dim x dim matrix by cyclic Jacobi.
double symmetric_max_eigenvalue(std::array<double, 9> a, int dim) {
    if (dim == 1) return a[0];
    auto at = [&](int r, int c) -> double & { return a[static_cast<size_t>(r * dim + c)]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < dim; ++p)
            for (int q = p + 1; q < dim; ++q) off += at(p, q) * at(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                if (std::fabs(at(p, q)) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * at(p, q), at(q, q) - at(p, p));
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < dim; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double best = at(0, 0);
    for (int i = 1; i < dim; ++i) best = std::max(best, at(i, i));
    return best;
}

const std::vector<std::string> kSlotNames = {"x", "y", "z"};

} // namespace

double AffineMap::operator_norm() const {
    // sqrt of the largest eigenvalue of M^T M
    std::array<double, 9> mtm{};
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k)
                s += m[static_cast<size_t>(k * dim + r)] * m[static_cast<size_t>(k * dim + c)];
            mtm[static_cast<size_t>(r * dim + c)] = s;
        }
    const double lam = symmetric_max_eigenvalue(mtm, dim);
    return std::sqrt(std::max(0.0, lam));
}

MapSpec MapSpec::make_affine(const AffineMap &a) {
    MapSpec s;
    s.kind = Kind::affine;
    s.dim = a.dim;
    s.affine = a;
    return s;
}

MapSpec MapSpec::make_affine1(double scale, double offset) {
    AffineMap a;
    a.dim = 1;
    a.m[0] = scale;
    a.offset = Vec(offset);
    return make_affine(a);
}

MapSpec MapSpec::make_expr(int dim, const std::vector<std::string> &sources) {
    if (static_cast<int>(sources.size()) != dim)
        throw ValidationError("expr map needs one expression per output coordinate");
    MapSpec s;
    s.kind = Kind::expr;
    s.dim = dim;
    const std::vector<std::string> vars(kSlotNames.begin(), kSlotNames.begin() + dim);
    for (const auto &src : sources) {
        s.coords.push_back(expr::parse(src, vars));
        s.bound_coords.emplace_back(s.coords.back(), kSlotNames);
    }
    return s;
}

MapSpec MapSpec::make_builtin(BuiltinKind k, double param) {
    MapSpec s;
    s.kind = Kind::builtin;
    s.dim = 1;
    s.builtin = k;
    s.param = param;
    return s;
}

Vec MapSpec::apply(const Space &sp, const Vec &x) const {
    switch (kind) {
        case Kind::affine: return affine.apply(x);
        case Kind::expr: {
            Vec y;
            y.dim = dim;
            const double slots[3] = {x[0], x[1], x[2]};
            for (int i = 0; i < dim; ++i) y[i] = bound_coords[static_cast<size_t>(i)].eval(slots);
            return y;
        }
        case Kind::builtin: {
            if (builtin == BuiltinKind::identity) return x;
            Vec y = x;
            y[0] = x[0] + param;
            return wrap_point(sp, y);
        }
    }
    throw ValidationError("bad map kind");
}

void IFSystem::validate() const {
    if (maps.empty()) throw ValidationError("IFS needs at least one map");
    const int d = space.dim;
    if (d < 1 || d > 3) throw ValidationError("dimension must be 1, 2 or 3");
    for (const auto &m : maps)
        if (m.dim != d) throw ValidationError("map dimension does not match space dimension");
    if (space.bounds.empty()) throw ValidationError("domain box is empty");
    if (space.variant == SpaceVariant::circle && d != 1)
        throw ValidationError("circle space needs dim 1");
    if (!weights.empty()) {
        if (weights.size() != maps.size())
            throw ValidationError("weights length does not match map count");
        double sum = 0.0;
        for (double w : weights) {
            if (w <= 0.0) throw ValidationError("weights must be strictly positive");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw ValidationError("weights sum " + std::to_string(sum) + ", expected 1");
    }
}

ComposedMap compose_word(const IFSystem &ifs, std::span<const int> alpha) {
    for (int s : alpha)
        if (s < 1 || s > ifs.size())
            throw ValidationError("word symbol " + std::to_string(s) + " out of range 1.." +
                                  std::to_string(ifs.size()));
    ComposedMap c;
    c.ifs = &ifs;
    c.word.assign(alpha.begin(), alpha.end());
    return c;
}

ComparisonFunction ComparisonFunction::banach(double lam) {
    if (!(lam > 0.0 && lam < 1.0)) throw ValidationError("banach modulus needs lambda in (0,1)");
    ComparisonFunction f;
    f.kind = Kind::banach;
    f.lambda = lam;
    return f;
}

ComparisonFunction ComparisonFunction::rakotch_table(std::vector<double> t,
                                                     std::vector<double> lam) {
    if (t.empty() || t.size() != lam.size()) throw ValidationError("bad rakotch table");
    for (size_t i = 1; i < t.size(); ++i) {
        if (t[i] <= t[i - 1]) throw ValidationError("rakotch knots must be ascending");
        if (lam[i] > lam[i - 1] + 1e-15) throw ValidationError("rakotch lambda must be nonincreasing");
    }
    ComparisonFunction f;
    f.kind = Kind::rakotch;
    f.knots = std::move(t);
    f.values = std::move(lam);
    f.covered.assign(f.knots.size(), true);
    return f;
}

ComparisonFunction ComparisonFunction::tabulated(std::vector<double> t, std::vector<double> phi) {
    if (t.empty() || t.size() != phi.size()) throw ValidationError("bad tabulated modulus");
    for (size_t i = 0; i < t.size(); ++i) {
        if (i > 0 && t[i] <= t[i - 1]) throw ValidationError("tabulated knots must be ascending");
        if (phi[i] > t[i] + 1e-15) throw ValidationError("modulus must satisfy phi(t) <= t");
    }
    ComparisonFunction f;
    f.kind = Kind::tabulated;
    f.knots = std::move(t);
    f.values = std::move(phi);
    return f;
}

double ComparisonFunction::eval(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind) {
        case Kind::banach: return lambda * t;
        case Kind::rakotch: {
            // step lambda: first knot >= t, constant beyond the last
            size_t i = 0;
            while (i + 1 < knots.size() && knots[i] < t) ++i;
            const double lam = values[i];
            return std::min(lam * t, t);
        }
        case Kind::tabulated: {
            // beyond the last knot: keep lambda = phi(t_last)/t_last constant
            if (t >= knots.back()) return std::min(values.back() / knots.back() * t, t);
            double t0 = 0.0, p0 = 0.0;
            for (size_t i = 0; i < knots.size(); ++i) {
                if (t <= knots[i]) {
                    const double w = (t - t0) / (knots[i] - t0);
                    return p0 + w * (values[i] - p0);
                }
                t0 = knots[i];
                p0 = values[i];
            }
            return values.back();
        }
    }
    return t;
}

double ComparisonFunction::eval_unclamped(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind == Kind::rakotch) {
        size_t i = 0;
        while (i + 1 < knots.size() && knots[i] < t) ++i;
        return values[i] * t;
    }
    return eval(t);
}

bool ComparisonFunction::contractive_evidence() const {
    if (kind == Kind::banach) return lambda < 1.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const bool cov = covered.empty() ? true : static_cast<bool>(covered[i]);
        if (!cov) continue;
        const double lam = kind == Kind::rakotch ? values[i] : values[i] / knots[i];
        if (!(lam < 1.0)) return false;
    }
    return true;
}

ComparisonFunction modulus_join(std::span<const ComparisonFunction> phis) {
    if (phis.empty()) throw ValidationError("modulus_join needs a nonempty list");
    bool all_banach = true;
    for (const auto &p : phis) all_banach = all_banach && p.kind == ComparisonFunction::Kind::banach;
    if (all_banach) {
        double lam = 0.0;
        for (const auto &p : phis) lam = std::max(lam, p.lambda);
        return ComparisonFunction::banach(lam);
    }
    std::vector<double> knots;
    for (const auto &p : phis) {
        if (p.kind == ComparisonFunction::Kind::banach) continue;
        knots.insert(knots.end(), p.knots.begin(), p.knots.end());
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> vals;
    vals.reserve(knots.size());
    for (double t : knots) {
        double v = 0.0;
        for (const auto &p : phis) v = std::max(v, p.eval(t));
        vals.push_back(std::min(v, t));
    }
    return ComparisonFunction::tabulated(std::move(knots), std::move(vals));
}

double iterate_modulus(const ComparisonFunction &phi, double t, int k) {
    if (t < 0.0) throw ValidationError("iterate_modulus needs t >= 0");
    if (k < 0) throw ValidationError("iterate_modulus needs k >= 0");
    double v = t;
    for (int i = 0; i < k; ++i) v = phi.eval(v);
    return v;
}

bool modulus_decays(const ComparisonFunction &phi, double t, double eps, int k_max, int *k_out) {
    double v = t;
    for (int k = 0; k <= k_max; ++k) {
        if (v < eps) {
            if (k_out) *k_out = k;
            return true;
        }
        v = phi.eval(v);
    }
    if (k_out) *k_out = k_max;
    return false;
}

PicardResult picard_fixed_point(const Space &sp, const std::function<Vec(const Vec &)> &map,
                                const Vec &x0, double tol, int max_iter) {
    if (!(tol > 0.0)) throw ValidationError("picard_fixed_point needs tol > 0");
    PicardResult r;
    r.point = x0;
    for (int it = 0; it <= max_iter; ++it) {
        const Vec next = map(r.point);
        const double d = distance(sp, r.point, next);
        r.iterations = it;
        r.residual = d;
        if (d <= tol) {
            r.converged = true;
            return r;
        }
        if (!std::isfinite(d) || d > 1e12) break; // diverging orbit
        r.point = next;
    }
    r.converged = false;
    return r;
}

namespace {

// Max ratio d(w(x),w(y))/d(x,y) over one deterministic pair stream. Collects
// (ratio, distance) samples when `out_pairs` is supplied (for envelopes).
double sampled_lipschitz(const Space &sp, const std::function<Vec(const Vec &)> &map,
                         const Box &region, int samples, uint64_t seed,
                         std::vector<std::pair<double, double>> *out_pairs) {
    double vol = 1.0;
    for (int i = 0; i < region.dim; ++i) vol *= region.hi[i] - region.lo[i];
    if (!(vol > 0.0) && sp.variant != SpaceVariant::circle)
        throw ValidationError("degenerate region for sampled Lipschitz estimate");

    const double diam = space_diameter(Space{region.dim, region, sp.variant});
    static const double scales[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    // Pre-generate pair list so the parallel loop is pure.
    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(static_cast<size_t>(samples) * 7);
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        Vec a = rng.point_in(region);
        Vec b = rng.point_in(region);
        pairs.emplace_back(a, b);
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
            pairs.emplace_back(a, c);
        }
    }

    std::vector<std::pair<double, double>> ratios(pairs.size(), {0.0, 0.0});
    const long npairs = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(static)
    for (long idx = 0; idx < npairs; ++idx) {
        const auto &[a, b] = pairs[static_cast<size_t>(idx)];
        const double d = distance(sp, a, b);
        if (d == 0.0) continue;
        try {
            const double dw = distance(sp, map(a), map(b));
            ratios[static_cast<size_t>(idx)] = {dw / d, d};
        } catch (const expr::EvalError &) {
            // domain error at a sampled pair: no evidence from this pair
        }
    }

    double best = 0.0;
    for (const auto &[r, d] : ratios)
        if (d > 0.0) best = std::max(best, r);
    if (out_pairs) *out_pairs = std::move(ratios);
    return best;
}

} // namespace

double estimate_lipschitz_fn(const Space &sp, const std::function<Vec(const Vec &)> &map,
                             const Box &region, int samples, uint64_t rng_seed) {
    if (samples < 2) throw ValidationError("estimate_lipschitz needs samples >= 2");
    return sampled_lipschitz(sp, map, region, samples, rng_seed, nullptr);
}

double estimate_lipschitz(const Space &sp, const MapSpec &map, const Box &region, int samples,
                          uint64_t rng_seed) {
    if (map.kind == MapSpec::Kind::affine) return map.affine.operator_norm();
    if (map.kind == MapSpec::Kind::builtin) return 1.0; // rotation and identity are isometries
    return estimate_lipschitz_fn(
        sp, [&](const Vec &x) { return map.apply(sp, x); }, region, samples, rng_seed);
}

ComparisonFunction rakotch_envelope(const Space &sp, const MapSpec &map, const Box &region,
                                    int bins, int samples, uint64_t rng_seed) {
    if (bins < 1) throw ValidationError("rakotch_envelope needs bins >= 1");
    const double diam = space_diameter(Space{region.dim, region, sp.variant});
    const double lo = 1e-6 * diam;

    std::vector<std::pair<double, double>> ratios;
    sampled_lipschitz(
        sp, [&](const Vec &x) { return map.apply(sp, x); }, region, samples, rng_seed, &ratios);

    // logarithmic bins over (lo, diam]; knot = bin upper edge
    std::vector<double> knots(static_cast<size_t>(bins));
    std::vector<double> lam(static_cast<size_t>(bins), 0.0);
    std::vector<bool> covered(static_cast<size_t>(bins), false);
    const double lratio = std::log(diam / lo);
    for (int i = 0; i < bins; ++i)
        knots[static_cast<size_t>(i)] = lo * std::exp(lratio * (i + 1) / bins);

    for (const auto &[r, d] : ratios) {
        if (d <= 0.0) continue;
        int b;
        if (d <= lo)
            b = 0;
        else if (d >= diam)
            b = bins - 1;
        else
            b = std::clamp(static_cast<int>(std::floor(std::log(d / lo) / lratio * bins)), 0,
                           bins - 1);
        lam[static_cast<size_t>(b)] = std::max(lam[static_cast<size_t>(b)], r);
        covered[static_cast<size_t>(b)] = true;
    }

    // suffix max from the right makes lambda nonincreasing in t
    for (int i = bins - 2; i >= 0; --i)
        lam[static_cast<size_t>(i)] =
            std::max(lam[static_cast<size_t>(i)], lam[static_cast<size_t>(i + 1)]);

    ComparisonFunction f;
    f.kind = ComparisonFunction::Kind::rakotch;
    f.knots = std::move(knots);
    f.values = std::move(lam);
    f.covered = std::move(covered);
    return f;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

ClassificationReport classify(const IFSystem &ifs, const std::optional<std::vector<double>> &coeffs,
                              int p_max, int samples, uint64_t rng_seed) {
    ifs.validate();
    if (p_max < 1) throw ValidationError("classify needs p_max >= 1");
    const int N = ifs.size();
    if (coeffs && static_cast<int>(coeffs->size()) != N)
        throw ValidationError("coefficient list length does not match map count");
    if (coeffs && !ifs.has_weights())
        throw ValidationError("average checks need weights on the IFS");

    ClassificationReport rep;
    for (int i = 0; i < N; ++i)
        rep.lipschitz.push_back(estimate_lipschitz(ifs.space, ifs.maps[static_cast<size_t>(i)],
                                                   ifs.space.bounds, samples,
                                                   rng_seed + static_cast<uint64_t>(i)));
    rep.banach_contractive = true;
    for (double l : rep.lipschitz) rep.banach_contractive = rep.banach_contractive && l < 1.0;

    // average-contractive weight region: sort maps by Lipschitz constant so
    // c_1 is the minimum, then emit p_i(c_i - c_1) < 1 - c_1 - sum_{j<i} ...
    rep.sorted_by_lip.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) rep.sorted_by_lip[static_cast<size_t>(i)] = i;
    std::stable_sort(rep.sorted_by_lip.begin(), rep.sorted_by_lip.end(), [&](int a, int b) {
        return rep.lipschitz[static_cast<size_t>(a)] < rep.lipschitz[static_cast<size_t>(b)];
    });
    const double cmin = rep.lipschitz[static_cast<size_t>(rep.sorted_by_lip[0])];
    rep.region_nonempty = cmin < 1.0;
    if (rep.region_nonempty) {
        std::string deficit = "1 - " + format_double(cmin);
        for (int k = 1; k < N; ++k) {
            const int i = rep.sorted_by_lip[static_cast<size_t>(k)];
            WeightRegionInequality iq;
            iq.map_index = i;
            iq.slope = rep.lipschitz[static_cast<size_t>(i)] - cmin;
            iq.rhs = 1.0 - cmin;
            const std::string pi = "p" + std::to_string(i + 1);
            iq.text = pi + "*(" + format_double(rep.lipschitz[static_cast<size_t>(i)]) + " - " +
                      format_double(cmin) + ") < " + deficit;
            if (N == 2) {
                iq.resolved = iq.slope > 0.0;
                if (iq.resolved) {
                    iq.bound = iq.rhs / iq.slope;
                    iq.text = pi + " < " + format_double(iq.bound);
                }
            }
            deficit += " - " + pi + "*(" + format_double(iq.slope) + ")";
            rep.region.push_back(std::move(iq));
        }
    }

    if (ifs.has_weights()) {
        rep.weights_supplied = true;
        rep.average_sum = 0.0;
        for (int i = 0; i < N; ++i)
            rep.average_sum += ifs.weights[static_cast<size_t>(i)] * rep.lipschitz[static_cast<size_t>(i)];
        // sampled Lipschitz values are lower bounds, so certify strictness
        // only up to the estimator resolution
        rep.average_contractive = rep.average_sum < 1.0 - 1e-6;
    }

    if (coeffs) {
        rep.coeffs_supplied = true;
        rep.coeff_weight_sum = 0.0;
        for (int i = 0; i < N; ++i)
            rep.coeff_weight_sum += ifs.weights[static_cast<size_t>(i)] * (*coeffs)[static_cast<size_t>(i)];
        bool env_ok = true;
        // Sampled envelopes carry ~1e-10 of evaluation noise near tiny
        // distances; compare with a 1e-9 cushion.
        const double cushion = 1e-9;
        for (int i = 0; i < N; ++i) {
            const ComparisonFunction env =
                rakotch_envelope(ifs.space, ifs.maps[static_cast<size_t>(i)], ifs.space.bounds, 32,
                                 samples, rng_seed + 1000 + static_cast<uint64_t>(i));
            bool below = true;
            for (size_t b = 0; b < env.values.size(); ++b)
                if (env.covered[b] && !(env.values[b] < (*coeffs)[static_cast<size_t>(i)] + cushion))
                    below = false;
            rep.envelope_below_coeff.push_back(below);
            env_ok = env_ok && below;
        }
        rep.average_rakotch = rep.coeff_weight_sum <= 1.0 + 1e-12 && env_ok;
    }

    // eventual contractivity of the iterated system
    rep.eventual_p = 0;
    size_t words = static_cast<size_t>(N);
    for (int p = 1; p <= p_max && words <= 10000; ++p, words *= static_cast<size_t>(N)) {
        double worst = 0.0;
        std::vector<int> word(static_cast<size_t>(p), 1);
        bool done = false;
        while (!done) {
            double lip;
            bool all_affine = true;
            for (int s : word)
                all_affine =
                    all_affine && ifs.maps[static_cast<size_t>(s - 1)].kind == MapSpec::Kind::affine;
            if (all_affine) {
                // exact: norm of the matrix product (leftmost applied last)
                AffineMap prod = ifs.maps[static_cast<size_t>(word[0] - 1)].affine;
                for (size_t j = 1; j < word.size(); ++j) {
                    const AffineMap &next = ifs.maps[static_cast<size_t>(word[j] - 1)].affine;
                    AffineMap out;
                    out.dim = prod.dim;
                    for (int r = 0; r < out.dim; ++r)
                        for (int c = 0; c < out.dim; ++c) {
                            double s = 0.0;
                            for (int k = 0; k < out.dim; ++k)
                                s += prod.m[static_cast<size_t>(r * out.dim + k)] *
                                     next.m[static_cast<size_t>(k * out.dim + c)];
                            out.m[static_cast<size_t>(r * out.dim + c)] = s;
                        }
                    out.offset = prod.apply(next.offset);
                    prod = out;
                }
                lip = prod.operator_norm();
            } else {
                const ComposedMap cm = compose_word(ifs, word);
                lip = estimate_lipschitz_fn(
                    ifs.space, [&](const Vec &x) { return cm(x); }, ifs.space.bounds,
                    std::max(2, samples / 4), rng_seed + 7777);
            }
            worst = std::max(worst, lip);
            // next word in lexicographic order
            int j = p - 1;
            while (j >= 0 && word[static_cast<size_t>(j)] == N) {
                word[static_cast<size_t>(j)] = 1;
                --j;
            }
            if (j < 0)
                done = true;
            else
                ++word[static_cast<size_t>(j)];
        }
        rep.eventual_worst.push_back(worst);
        if (worst < 1.0 && rep.eventual_p == 0) rep.eventual_p = p;
    }
    return rep;
}

std::vector<double> default_a_seq(int K) {
    std::vector<double> a(static_cast<size_t>(K + 1));
    for (int k = 0; k <= K; ++k) a[static_cast<size_t>(k)] = 2.0 - 1.0 / (k + 1);
    return a;
}

RemetrizedResult remetrized_distance(const IFSystem &ifs, std::span<const double> a_seq,
                                     const Vec &x, const Vec &y, int K,
                                     const ComparisonFunction *phi, size_t eval_budget) {
    ifs.validate();
    if (static_cast<int>(a_seq.size()) < K + 1)
        throw ValidationError("a_seq must cover indices 0..K");
    for (int k = 0; k <= K; ++k) {
        const double a = a_seq[static_cast<size_t>(k)];
        if (a < 1.0 || a > 2.0) throw ValidationError("a_seq values must lie in [1,2]");
        if (k > 0 && !(a > a_seq[static_cast<size_t>(k - 1)]))
            throw ValidationError("a_seq must be strictly increasing");
    }
    const int N = ifs.size();
    size_t total = 1, level = 1;
    for (int k = 1; k <= K; ++k) {
        level *= static_cast<size_t>(N);
        total += level;
        if (total > eval_budget)
            throw BudgetError("remetrized_distance word budget exceeded at depth " +
                              std::to_string(k));
    }

    std::vector<std::pair<Vec, Vec>> cur = {{x, y}};
    double best = a_seq[0] * distance(ifs.space, x, y);
    for (int k = 1; k <= K; ++k) {
        std::vector<std::pair<Vec, Vec>> next(cur.size() * static_cast<size_t>(N));
        const long m = static_cast<long>(cur.size());
#pragma omp parallel for schedule(static)
        for (long j = 0; j < m; ++j)
            for (int i = 0; i < N; ++i)
                next[static_cast<size_t>(j) * static_cast<size_t>(N) + static_cast<size_t>(i)] = {
                    apply_map(ifs, i, cur[static_cast<size_t>(j)].first),
                    apply_map(ifs, i, cur[static_cast<size_t>(j)].second)};
        cur = std::move(next);
        const double a = a_seq[static_cast<size_t>(k)];
        double lvl = 0.0;
        const long n = static_cast<long>(cur.size());
#pragma omp parallel for schedule(static) reduction(max : lvl)
        for (long j = 0; j < n; ++j)
            lvl = std::max(lvl,
                           distance(ifs.space, cur[static_cast<size_t>(j)].first,
                                    cur[static_cast<size_t>(j)].second));
        best = std::max(best, a * lvl);
    }

    RemetrizedResult r;
    r.value = best;
    if (phi) {
        r.has_tail_bound = true;
        r.tail_bound = 2.0 * iterate_modulus(*phi, space_diameter(ifs.space), K);
    }
    return r;
}

} // namespace ifslab
