#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifslab/expr.hpp"
#include "ifslab/geometry.hpp"

namespace ifslab {

struct AffineMap {
    int dim = 1;
    // row-major dim x dim
    std::array<double, 9> m{};
    Vec offset;

    Vec apply(const Vec &x) const {
        Vec y;
        y.dim = dim;
        for (int r = 0; r < dim; ++r) {
            double s = offset[r];
            for (int c = 0; c < dim; ++c) s += m[static_cast<size_t>(r * dim + c)] * x[c];
            y[r] = s;
        }
        return y;
    }

    // Exact operator norm (largest singular value).
    double operator_norm() const;
};

enum class BuiltinKind { identity, circle_rotation };

struct MapSpec {
    enum class Kind { affine, expr, builtin };
    Kind kind = Kind::affine;
    int dim = 1;

    AffineMap affine;                          // kind == affine
    std::vector<expr::Expression> coords;      // kind == expr, one per output coordinate
    std::vector<expr::BoundExpr> bound_coords; // bound to (x, y, z) slots
    BuiltinKind builtin = BuiltinKind::identity;
    double param = 0.0; // circle-rotation(r)

    static MapSpec make_affine(const AffineMap &a);
    static MapSpec make_affine1(double scale, double offset); // x -> scale*x + offset
    static MapSpec make_expr(int dim, const std::vector<std::string> &sources);
    static MapSpec make_builtin(BuiltinKind k, double param = 0.0);

    Vec apply(const Space &sp, const Vec &x) const;
};

struct IFSystem {
    std::vector<MapSpec> maps;
    std::vector<double> weights; // empty, or size N, positive, sum 1
    Space space;

    int size() const { return static_cast<int>(maps.size()); }
    bool has_weights() const { return !weights.empty(); }
    void validate() const;
};

inline Vec apply_map(const IFSystem &ifs, int i, const Vec &x) {
    return ifs.maps[static_cast<size_t>(i)].apply(ifs.space, x);
}

// w_alpha = w_{a1} o ... o w_{ak}: the leftmost symbol is applied last
// (symbolic-dynamics order). Symbols are 1-based.
struct ComposedMap {
    const IFSystem *ifs = nullptr;
    std::vector<int> word;

    Vec operator()(const Vec &x) const {
        Vec y = x;
        for (size_t j = word.size(); j-- > 0;) {
            const int s = word[j];
            if (s < 1 || s > ifs->size())
                throw ValidationError("word symbol " + std::to_string(s) + " out of range");
            y = apply_map(*ifs, s - 1, y);
        }
        return y;
    }
};

ComposedMap compose_word(const IFSystem &ifs, std::span<const int> alpha);

// Modulus of continuity phi with phi(0) = 0 and phi(t) <= t.
struct ComparisonFunction {
    enum class Kind { banach, rakotch, tabulated };
    Kind kind = Kind::banach;
    double lambda = 0.5; // banach

    // rakotch: knots t_i ascending with lambda(t_i); evaluated as a
    // right-continuous step function in lambda. tabulated: knots with phi(t_i),
    // linear interpolation from (0,0), constant beyond the last knot.
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<bool> covered; // rakotch envelopes: bins with sample evidence

    static ComparisonFunction banach(double lam);
    static ComparisonFunction rakotch_table(std::vector<double> t, std::vector<double> lam);
    static ComparisonFunction tabulated(std::vector<double> t, std::vector<double> phi);

    double eval(double t) const;
    // lambda(t) * t without the phi <= t clamp; rakotch envelopes with
    // lambda >= 1 (average-Rakotch coefficients) need this raw value
    double eval_unclamped(double t) const;
    // rakotch kind: true when every covered bin has lambda < 1
    bool contractive_evidence() const;
};

ComparisonFunction modulus_join(std::span<const ComparisonFunction> phis);
double iterate_modulus(const ComparisonFunction &phi, double t, int k);
// true when phi^k(t) drops below eps for some k <= k_max (k reported)
bool modulus_decays(const ComparisonFunction &phi, double t, double eps, int k_max, int *k_out);

struct PicardResult {
    Vec point;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

PicardResult picard_fixed_point(const Space &sp, const std::function<Vec(const Vec &)> &map,
                                const Vec &x0, double tol, int max_iter);

// Sampled lower-bound Lipschitz estimate over `region`; exact operator norm
// for affine maps. Pair sampling mixes uniform pairs with perturbation pairs
// at scales 1e-1..1e-6 of the region diameter.
double estimate_lipschitz(const Space &sp, const MapSpec &map, const Box &region, int samples,
                          uint64_t rng_seed);
double estimate_lipschitz_fn(const Space &sp, const std::function<Vec(const Vec &)> &map,
                             const Box &region, int samples, uint64_t rng_seed);

ComparisonFunction rakotch_envelope(const Space &sp, const MapSpec &map, const Box &region,
                                    int bins, int samples, uint64_t rng_seed);

struct WeightRegionInequality {
    int map_index;    // 0-based index after sorting by Lipschitz estimate
    double slope;     // c_i - c_min
    double rhs;       // 1 - c_min (first inequality; later ones depend on earlier p's)
    std::string text; // rendered form
    // For N = 2 the inequality resolves to p2 < bound (or "any p2" when slope <= 0).
    bool resolved = false;
    double bound = 0.0;
};

struct ClassificationReport {
    std::vector<double> lipschitz;    // per map
    bool banach_contractive = false;  // every estimate < 1
    bool region_nonempty = false;     // min Lip < 1
    std::vector<int> sorted_by_lip;   // permutation, ascending Lipschitz
    std::vector<WeightRegionInequality> region;

    bool weights_supplied = false;
    double average_sum = 0.0;         // sum p_i * Lip_i
    bool average_contractive = false; // strict: average_sum < 1

    bool coeffs_supplied = false;
    bool average_rakotch = false;
    double coeff_weight_sum = 0.0; // sum p_i * c_i
    std::vector<bool> envelope_below_coeff;

    int eventual_p = 0; // smallest p <= p_max with all |alpha|=p compositions Lip < 1; 0 = none
    std::vector<double> eventual_worst; // worst word Lipschitz per length 1..p_max
};

ClassificationReport classify(const IFSystem &ifs, const std::optional<std::vector<double>> &coeffs,
                              int p_max, int samples, uint64_t rng_seed);

std::vector<double> default_a_seq(int K); // a_k = 2 - 1/(k+1)

struct RemetrizedResult {
    double value = 0.0;
    double tail_bound = 0.0;
    bool has_tail_bound = false;
};

// dhat(x,y) = max over k = 0..K, alpha in I^k of a_k * d(w_alpha(x), w_alpha(y)).
// With a joined modulus phi, terms beyond depth K are bounded by
// 2 * phi^K(diam(domain)).
RemetrizedResult remetrized_distance(const IFSystem &ifs, std::span<const double> a_seq,
                                     const Vec &x, const Vec &y, int K,
                                     const ComparisonFunction *phi = nullptr,
                                     size_t eval_budget = 1000000);

} // namespace ifslab
